// Copyright 2026 The BFLC Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Hash-linked, append-only ledger of model and update blocks.
//
// Layout, with k updates per round:
//   index t*(k+1)                      model block of round t
//   indices t*(k+1)+1 .. (t+1)*(k+1)-1 update blocks of round t
//
// Each header links to the digest of its predecessor's canonical header bytes
// (genesis links to the zero digest), and carries the digest of its own
// payload. Pruning drops payloads but keeps every header, so link integrity of
// the whole chain stays checkable.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bflc/digest.hpp"
#include "bflc/param_vector.hpp"
#include "bflc/types.hpp"

namespace bflc {

enum class BlockKind : std::uint8_t { Model = 0, Update = 1 };

struct BlockHeader {
    std::uint64_t index = 0;
    Digest prev_digest;
    Digest payload_digest;
    std::uint64_t round = 0;
    BlockKind kind = BlockKind::Model;

    /// Digest of the canonical header serialization; the next block's prev_digest.
    [[nodiscard]] Digest digest() const;
};

struct ModelBlock {
    BlockHeader header;
    ParamVector model;
};

struct UpdateBlock {
    BlockHeader header;
    ParamVector delta;
    NodeId uploader;
    double score = 0.0;
};

/// A block whose payload was dropped by prune(); only the header survives.
struct PrunedBlock {
    BlockHeader header;
};

using Block = std::variant<ModelBlock, UpdateBlock, PrunedBlock>;

const BlockHeader& header_of(const Block& block);
BlockHeader& header_of(Block& block);

Digest model_payload_digest(const ParamVector& model);
Digest update_payload_digest(const ParamVector& delta, NodeId uploader, double score);

struct VerifyResult {
    bool valid = true;
    std::optional<std::uint64_t> first_bad_index;
    std::string reason;

    explicit operator bool() const { return valid; }
};

class Chain {
public:
    /// Genesis chain: one model block at index 0, round 0.
    Chain(std::uint64_t k, ParamVector genesis_model);

    /// Reassemble a chain from stored blocks without checking them; call
    /// verify() before trusting the result.
    static Chain from_blocks(std::uint64_t k, std::vector<Block> blocks, std::uint64_t pruned_before);

    [[nodiscard]] std::uint64_t k() const { return k_; }
    [[nodiscard]] std::size_t size() const { return blocks_.size(); }
    [[nodiscard]] std::span<const Block> blocks() const { return blocks_; }
    [[nodiscard]] const Block& block(std::uint64_t index) const { return blocks_.at(index); }
    [[nodiscard]] std::uint64_t pruned_before() const { return pruned_before_; }

    /// Round of the tail model block; also the round currently collecting updates.
    [[nodiscard]] std::uint64_t current_round() const;
    /// Update blocks already appended for current_round().
    [[nodiscard]] std::uint64_t pending_updates() const;

    [[nodiscard]] std::uint64_t model_index(std::uint64_t round) const { return round * (k_ + 1); }

    std::uint64_t append_update(std::uint64_t round, ParamVector delta, NodeId uploader, double score);
    std::uint64_t append_model(std::uint64_t round, ParamVector model);

    /// The tail model block, located by index arithmetic.
    [[nodiscard]] std::pair<std::uint64_t, const ParamVector&> latest_model() const;

    [[nodiscard]] std::vector<UpdateBlock> updates_of_round(std::uint64_t round) const;

    [[nodiscard]] VerifyResult verify() const;

    /// Truncate so the model block of `to_round` is the tail.
    void rollback(std::uint64_t to_round);

    /// Drop payloads of every block before the model block of `keep_from_round`.
    void prune(std::uint64_t keep_from_round);

private:
    Chain() = default;
    [[nodiscard]] Digest tail_digest() const;

    std::uint64_t k_ = 1;
    std::vector<Block> blocks_;
    std::uint64_t pruned_before_ = 0;
};

}  // namespace bflc
