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

#include "bflc/chain.hpp"

#include <cmath>

#include "bflc/error.hpp"

namespace bflc {

Digest BlockHeader::digest() const {
    CanonicalWriter w;
    w.u64(index);
    w.u64(round);
    w.u8(static_cast<std::uint8_t>(kind));
    w.digest(prev_digest);
    w.digest(payload_digest);
    return w.finish();
}

const BlockHeader& header_of(const Block& block) {
    return std::visit([](const auto& b) -> const BlockHeader& { return b.header; }, block);
}

BlockHeader& header_of(Block& block) {
    return std::visit([](auto& b) -> BlockHeader& { return b.header; }, block);
}

Digest model_payload_digest(const ParamVector& model) {
    CanonicalWriter w;
    w.u8(static_cast<std::uint8_t>(BlockKind::Model));
    w.f64s(model.view());
    return w.finish();
}

Digest update_payload_digest(const ParamVector& delta, NodeId uploader, double score) {
    CanonicalWriter w;
    w.u8(static_cast<std::uint8_t>(BlockKind::Update));
    w.f64s(delta.view());
    w.u64(uploader.value);
    w.f64(score);
    return w.finish();
}

Chain::Chain(std::uint64_t k, ParamVector genesis_model) : k_(k) {
    require(k >= 1, ErrorCode::InvalidArgument, "k must be at least 1");
    require(!genesis_model.empty(), ErrorCode::InvalidArgument, "genesis model is empty");
    require(genesis_model.valid(), ErrorCode::InvalidArgument, "genesis model has non-finite values");
    BlockHeader h;
    h.index = 0;
    h.round = 0;
    h.kind = BlockKind::Model;
    h.prev_digest = Digest::zero();
    h.payload_digest = model_payload_digest(genesis_model);
    blocks_.push_back(ModelBlock{h, std::move(genesis_model)});
}

Chain Chain::from_blocks(std::uint64_t k, std::vector<Block> blocks, std::uint64_t pruned_before) {
    require(k >= 1, ErrorCode::InvalidArgument, "k must be at least 1");
    require(!blocks.empty(), ErrorCode::InvalidArgument, "chain has no blocks");
    Chain c;
    c.k_ = k;
    c.blocks_ = std::move(blocks);
    c.pruned_before_ = pruned_before;
    return c;
}

std::uint64_t Chain::current_round() const { return (blocks_.size() - 1) / (k_ + 1); }

std::uint64_t Chain::pending_updates() const { return (blocks_.size() - 1) % (k_ + 1); }

Digest Chain::tail_digest() const { return header_of(blocks_.back()).digest(); }

std::uint64_t Chain::append_update(std::uint64_t round, ParamVector delta, NodeId uploader, double score) {
    require(score >= 0.0 && score <= 1.0, ErrorCode::InvalidArgument, "score outside [0,1]");
    require(delta.valid(), ErrorCode::InvalidArgument, "delta has non-finite values");
    const auto& [latest_round, model] = latest_model();
    require(delta.size() == model.size(), ErrorCode::InvalidArgument, "delta length differs from model");
    require(round == latest_round, ErrorCode::OutOfOrder,
            "update for round " + std::to_string(round) + " while round " + std::to_string(latest_round) + " is open");
    require(pending_updates() < k_, ErrorCode::RoundFull, "round " + std::to_string(round) + " already has k updates");

    BlockHeader h;
    h.index = blocks_.size();
    h.round = round;
    h.kind = BlockKind::Update;
    h.prev_digest = tail_digest();
    h.payload_digest = update_payload_digest(delta, uploader, score);
    blocks_.push_back(UpdateBlock{h, std::move(delta), uploader, score});
    return h.index;
}

std::uint64_t Chain::append_model(std::uint64_t round, ParamVector model) {
    require(model.valid() && !model.empty(), ErrorCode::InvalidArgument, "model is empty or non-finite");
    const auto open = current_round();
    require(round == open + 1, ErrorCode::OutOfOrder,
            "model for round " + std::to_string(round) + " but round " + std::to_string(open) + " is open");
    require(pending_updates() == k_, ErrorCode::RoundIncomplete,
            "round " + std::to_string(open) + " has " + std::to_string(pending_updates()) + " of " +
                std::to_string(k_) + " updates");

    BlockHeader h;
    h.index = blocks_.size();
    h.round = round;
    h.kind = BlockKind::Model;
    h.prev_digest = tail_digest();
    h.payload_digest = model_payload_digest(model);
    blocks_.push_back(ModelBlock{h, std::move(model)});
    return h.index;
}

std::pair<std::uint64_t, const ParamVector&> Chain::latest_model() const {
    const auto round = current_round();
    // prune() never reaches the tail model, but a chain read from disk might.
    const auto* block = std::get_if<ModelBlock>(&blocks_[model_index(round)]);
    require(block != nullptr, ErrorCode::PrunedUnavailable, "tail model block has no payload");
    return {round, block->model};
}

std::vector<UpdateBlock> Chain::updates_of_round(std::uint64_t round) const {
    require(round >= pruned_before_, ErrorCode::PrunedUnavailable,
            "round " + std::to_string(round) + " was pruned");
    require(round <= current_round(), ErrorCode::InvalidArgument, "round " + std::to_string(round) + " not reached");
    std::vector<UpdateBlock> out;
    const auto first = model_index(round) + 1;
    const auto last = std::min<std::uint64_t>(model_index(round + 1), blocks_.size());
    for (auto i = first; i < last; ++i) {
        out.push_back(std::get<UpdateBlock>(blocks_[i]));
    }
    return out;
}

VerifyResult Chain::verify() const {
    auto bad = [](std::uint64_t i, std::string why) { return VerifyResult{false, i, std::move(why)}; };
    const auto retained_from = model_index(pruned_before_);
    Digest prev = Digest::zero();
    for (std::uint64_t i = 0; i < blocks_.size(); ++i) {
        const Block& block = blocks_[i];
        const BlockHeader& h = header_of(block);
        if (h.index != i) {
            return bad(i, "index field does not match position");
        }
        const auto expected_round = i / (k_ + 1);
        const auto expected_kind = i % (k_ + 1) == 0 ? BlockKind::Model : BlockKind::Update;
        if (h.round != expected_round || h.kind != expected_kind) {
            return bad(i, "round/kind violate the index layout");
        }
        if (h.prev_digest != prev) {
            return bad(i, "prev_digest does not match predecessor");
        }
        prev = h.digest();

        if (const auto* m = std::get_if<ModelBlock>(&block)) {
            if (h.kind != BlockKind::Model) {
                return bad(i, "model payload under update header");
            }
            if (model_payload_digest(m->model) != h.payload_digest) {
                return bad(i, "model payload digest mismatch");
            }
        } else if (const auto* u = std::get_if<UpdateBlock>(&block)) {
            if (h.kind != BlockKind::Update) {
                return bad(i, "update payload under model header");
            }
            if (!(u->score >= 0.0 && u->score <= 1.0)) {
                return bad(i, "update score outside [0,1]");
            }
            if (update_payload_digest(u->delta, u->uploader, u->score) != h.payload_digest) {
                return bad(i, "update payload digest mismatch");
            }
        } else if (i >= retained_from) {
            return bad(i, "payload missing from retained block");
        }
    }
    return {};
}

void Chain::rollback(std::uint64_t to_round) {
    require(to_round >= pruned_before_, ErrorCode::PrunedUnavailable,
            "rollback target round " + std::to_string(to_round) + " was pruned");
    require(to_round <= current_round(), ErrorCode::InvalidArgument,
            "rollback target round " + std::to_string(to_round) + " not reached");
    blocks_.resize(model_index(to_round) + 1);
}

void Chain::prune(std::uint64_t keep_from_round) {
    require(keep_from_round <= current_round(), ErrorCode::InvalidArgument,
            "cannot prune past the latest round");
    if (keep_from_round <= pruned_before_) {
        return;
    }
    const auto cut = model_index(keep_from_round);
    for (std::uint64_t i = model_index(pruned_before_); i < cut; ++i) {
        blocks_[i] = PrunedBlock{header_of(blocks_[i])};
    }
    pruned_before_ = keep_from_round;
}

}  // namespace bflc
