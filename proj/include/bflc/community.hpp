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

// Node membership (blacklist-mode admission) and the token ledger for
// permission fees and profit sharing by contribution.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bflc/types.hpp"

namespace bflc {

struct ExpulsionRecord {
    NodeId node;
    std::string reason;
};

class Community {
public:
    /// `managers` become the founding members. Fees land in the manager
    /// treasury, which also funds reward pools.
    Community(std::set<NodeId> managers, std::int64_t permission_fee, std::int64_t treasury = 0);

    [[nodiscard]] const std::set<NodeId>& members() const { return members_; }
    [[nodiscard]] const std::set<NodeId>& managers() const { return managers_; }
    [[nodiscard]] const std::set<NodeId>& blacklist() const { return blacklist_; }
    [[nodiscard]] const std::vector<ExpulsionRecord>& expulsions() const { return expulsions_; }
    [[nodiscard]] std::int64_t permission_fee() const { return permission_fee_; }
    [[nodiscard]] std::int64_t treasury() const { return treasury_; }
    [[nodiscard]] std::int64_t balance(NodeId node) const;
    [[nodiscard]] bool is_member(NodeId node) const { return members_.contains(node); }

    /// Sum of all node balances plus the treasury.
    [[nodiscard]] std::int64_t total_tokens() const;

    /// Credit a node's wallet from outside the community (e.g. an endowment).
    void deposit(NodeId node, std::int64_t amount);

    /// Admit `node`, moving `fee_paid` from its wallet to the treasury. Throws
    /// admission-denied for blacklisted nodes and payment-required when the fee
    /// is short or the wallet cannot cover it.
    void join(NodeId node, std::int64_t fee_paid, std::uint64_t joined_round = 0);

    /// Remove and permanently blacklist `node`. Throws not-found.
    void expel(NodeId node, std::string reason);

    /// Pay node i floor(pool * s_i / sum(s)) from the treasury; the remainder
    /// goes to the top scorer (lowest id on ties). No-op when every score is
    /// zero. Throws insufficient-funds if the treasury cannot cover `pool`.
    void distribute_rewards(const std::map<NodeId, double>& round_scores, std::int64_t pool);

    /// CSV: node_id,balance,joined_round,blacklisted
    void write_ledger_csv(std::ostream& out) const;

private:
    std::set<NodeId> members_;
    std::set<NodeId> managers_;
    std::set<NodeId> blacklist_;
    std::map<NodeId, std::int64_t> balances_;
    std::map<NodeId, std::uint64_t> joined_round_;
    std::vector<ExpulsionRecord> expulsions_;
    std::int64_t permission_fee_;
    std::int64_t treasury_;
};

}  // namespace bflc
