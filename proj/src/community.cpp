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

#include "bflc/community.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "bflc/error.hpp"

namespace bflc {

Community::Community(std::set<NodeId> managers, std::int64_t permission_fee, std::int64_t treasury)
    : members_(managers), managers_(std::move(managers)), permission_fee_(permission_fee), treasury_(treasury) {
    require(permission_fee >= 0, ErrorCode::InvalidArgument, "permission fee must be non-negative");
    require(treasury >= 0, ErrorCode::InvalidArgument, "treasury must be non-negative");
    for (NodeId m : members_) {
        balances_.try_emplace(m, 0);
        joined_round_.try_emplace(m, 0);
    }
}

std::int64_t Community::balance(NodeId node) const {
    const auto it = balances_.find(node);
    return it == balances_.end() ? 0 : it->second;
}

std::int64_t Community::total_tokens() const {
    std::int64_t total = treasury_;
    for (const auto& [id, b] : balances_) {
        total += b;
    }
    return total;
}

void Community::deposit(NodeId node, std::int64_t amount) {
    require(amount >= 0, ErrorCode::InvalidArgument, "deposit must be non-negative");
    balances_[node] += amount;
}

void Community::join(NodeId node, std::int64_t fee_paid, std::uint64_t joined_round) {
    require(!members_.contains(node), ErrorCode::InvalidArgument, "node " + std::to_string(node.value) + " is already a member");
    require(!blacklist_.contains(node), ErrorCode::AdmissionDenied, "node " + std::to_string(node.value) + " is blacklisted");
    require(fee_paid >= permission_fee_, ErrorCode::PaymentRequired,
            "fee " + std::to_string(fee_paid) + " below permission fee " + std::to_string(permission_fee_));
    require(balance(node) >= fee_paid, ErrorCode::PaymentRequired,
            "node " + std::to_string(node.value) + " cannot cover fee " + std::to_string(fee_paid));
    balances_[node] -= fee_paid;
    treasury_ += fee_paid;
    members_.insert(node);
    joined_round_[node] = joined_round;
}

void Community::expel(NodeId node, std::string reason) {
    require(members_.contains(node), ErrorCode::NotFound, "node " + std::to_string(node.value) + " is not a member");
    members_.erase(node);
    managers_.erase(node);
    blacklist_.insert(node);
    expulsions_.push_back({node, std::move(reason)});
}

void Community::distribute_rewards(const std::map<NodeId, double>& round_scores, std::int64_t pool) {
    require(pool >= 0, ErrorCode::InvalidArgument, "reward pool must be non-negative");
    double total = 0.0;
    for (const auto& [id, s] : round_scores) {
        require(s >= 0.0 && std::isfinite(s), ErrorCode::InvalidArgument, "scores must be finite and non-negative");
        total += s;
    }
    if (total <= 0.0 || pool == 0) {
        return;
    }
    require(treasury_ >= pool, ErrorCode::InsufficientFunds,
            "treasury " + std::to_string(treasury_) + " cannot fund pool " + std::to_string(pool));

    std::int64_t paid = 0;
    NodeId top;
    double top_score = -1.0;
    std::map<NodeId, std::int64_t> shares;
    for (const auto& [id, s] : round_scores) {
        // Long double keeps pool * s exact enough that the share never rounds up.
        auto share = static_cast<std::int64_t>(std::floor(static_cast<long double>(pool) * s / total));
        share = std::clamp<std::int64_t>(share, 0, pool - paid);
        shares[id] = share;
        paid += share;
        if (s > top_score) {  // map order is ascending id, so ties keep the lowest
            top_score = s;
            top = id;
        }
    }
    shares[top] += pool - paid;
    for (const auto& [id, share] : shares) {
        balances_[id] += share;
    }
    treasury_ -= pool;
}

void Community::write_ledger_csv(std::ostream& out) const {
    out << "node_id,balance,joined_round,blacklisted\n";
    std::set<NodeId> ids = members_;
    ids.insert(blacklist_.begin(), blacklist_.end());
    for (const auto& [id, b] : balances_) {
        ids.insert(id);
    }
    for (NodeId id : ids) {
        const auto jr = joined_round_.find(id);
        out << id.value << ',' << balance(id) << ',';
        if (jr != joined_round_.end()) {
            out << jr->second;
        }
        out << ',' << (blacklist_.contains(id) ? 1 : 0) << '\n';
    }
}

}  // namespace bflc
