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

#include "bflc/consensus.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "bflc/error.hpp"
#include "bflc/random.hpp"

namespace bflc {

void QualificationPolicy::validate() const {
    require(theta > 0.0 && theta <= 1.0, ErrorCode::InvalidArgument, "theta must lie in (0,1]");
    require(rho > 0.0 && rho <= 1.0, ErrorCode::InvalidArgument, "rho must lie in (0,1]");
}

bool qualify(double median_score, const QualificationPolicy& policy, double global_score) {
    switch (policy.mode) {
        case QualificationPolicy::Mode::AbsoluteThreshold: return median_score >= policy.theta;
        case QualificationPolicy::Mode::RelativeToGlobal: return median_score >= policy.rho * global_score;
        case QualificationPolicy::Mode::Combined:
            return median_score >= policy.theta && median_score >= policy.rho * global_score;
    }
    return false;
}

UpdateScore score_update(std::span<const Dataset* const> member_data, const ParamVector& global,
                         const ParamVector& delta) {
    require(!member_data.empty(), ErrorCode::InvalidArgument, "committee is empty");
    require(global.size() == delta.size(), ErrorCode::InvalidArgument, "delta length differs from global model");
    const ParamVector candidate = global + delta;
    UpdateScore out;
    out.member_scores.reserve(member_data.size());
    for (const Dataset* data : member_data) {
        out.member_scores.push_back(evaluate(candidate, *data));
    }
    out.median_score = median(out.member_scores);
    return out;
}

CommitteeState::CommitteeState(std::vector<CommitteeMember> members, std::uint64_t round,
                               QualificationPolicy policy)
    : members_(std::move(members)), round_(round), policy_(policy) {
    require(!members_.empty(), ErrorCode::InvalidArgument, "committee needs at least one member");
    policy_.validate();
    std::set<NodeId> seen;
    for (const auto& m : members_) {
        require(m.data != nullptr && !m.data->empty(), ErrorCode::InvalidArgument,
                "committee member " + std::to_string(m.id.value) + " has no validation data");
        require(seen.insert(m.id).second, ErrorCode::InvalidArgument, "duplicate committee member");
    }
}

std::vector<NodeId> CommitteeState::member_ids() const {
    std::vector<NodeId> ids;
    ids.reserve(members_.size());
    for (const auto& m : members_) {
        ids.push_back(m.id);
    }
    return ids;
}

bool CommitteeState::is_member(NodeId id) const {
    return std::any_of(members_.begin(), members_.end(), [id](const CommitteeMember& m) { return m.id == id; });
}

double CommitteeState::global_score(const ParamVector& global) {
    if (!global_score_) {
        std::vector<double> scores;
        scores.reserve(members_.size());
        for (const auto& m : members_) {
            scores.push_back(evaluate(global, *m.data));
        }
        global_score_ = median(std::move(scores));
    }
    return *global_score_;
}

SubmitOutcome submit_update(CommitteeState& state, Chain& chain, NodeId uploader, ParamVector delta,
                            const ScoreTransform& transform) {
    require(!state.is_member(uploader), ErrorCode::Forbidden,
            "committee member " + std::to_string(uploader.value) + " cannot submit updates");
    const bool already = std::any_of(state.pending_.begin(), state.pending_.end(),
                                     [uploader](const ScoredSubmission& s) { return s.uploader == uploader; });
    require(!already, ErrorCode::DuplicateSubmission,
            "node " + std::to_string(uploader.value) + " already accepted this round");
    require(chain.current_round() == state.round(), ErrorCode::OutOfOrder, "chain and committee disagree on round");
    if (chain.pending_updates() >= chain.k()) {
        return {SubmitOutcome::Status::RoundClosed, std::nullopt, 0.0};
    }

    const auto [round, global] = chain.latest_model();
    std::vector<const Dataset*> data;
    data.reserve(state.size());
    for (const auto& m : state.members()) {
        data.push_back(m.data);
    }
    UpdateScore scored = score_update(data, global, delta);
    state.validations_ += state.size();
    if (transform) {
        for (std::size_t i = 0; i < scored.member_scores.size(); ++i) {
            scored.member_scores[i] = transform(i, state.members_[i].id, scored.member_scores[i]);
        }
        scored.median_score = median(scored.member_scores);
    }

    const double global_score =
        state.policy().mode != QualificationPolicy::Mode::AbsoluteThreshold ? state.global_score(global) : 0.0;
    ScoredSubmission sub{uploader, std::move(delta), std::move(scored.member_scores), scored.median_score, {}};
    if (!qualify(sub.median_score, state.policy(), global_score)) {
        const double score = sub.median_score;
        state.rejected_.push_back(std::move(sub));
        return {SubmitOutcome::Status::Rejected, std::nullopt, score};
    }
    const auto index = chain.append_update(round, sub.delta, uploader, sub.median_score);
    sub.chain_index = index;
    const double score = sub.median_score;
    state.pending_.push_back(std::move(sub));
    return {SubmitOutcome::Status::Accepted, index, score};
}

ParamVector finalize_round(const CommitteeState& state, Chain& chain, Aggregator aggregator) {
    require(chain.current_round() == state.round(), ErrorCode::OutOfOrder, "chain and committee disagree on round");
    require(chain.pending_updates() == chain.k(), ErrorCode::RoundIncomplete,
            "round " + std::to_string(state.round()) + " has " + std::to_string(chain.pending_updates()) + " of " +
                std::to_string(chain.k()) + " updates");
    const auto updates = chain.updates_of_round(state.round());
    std::vector<ParamVector> deltas;
    deltas.reserve(updates.size());
    for (const auto& u : updates) {
        deltas.push_back(u.delta);
    }
    const ParamVector& global = chain.latest_model().second;
    ParamVector next = aggregator == Aggregator::Mean ? aggregate_mean(global, deltas) : aggregate_cwmed(global, deltas);
    next.shape = global.shape;
    chain.append_model(state.round() + 1, next);
    return next;
}

std::vector<NodeId> elect_committee(const std::map<NodeId, double>& round_scores, const ElectionStrategy& strategy,
                                    std::span<const NodeId> prev_members) {
    require(strategy.committee_size >= 1, ErrorCode::InvalidArgument, "committee_size must be positive");
    std::vector<std::pair<NodeId, double>> candidates;
    for (const auto& [id, score] : round_scores) {
        if (std::find(prev_members.begin(), prev_members.end(), id) == prev_members.end()) {
            candidates.emplace_back(id, score);
        }
    }
    require(candidates.size() >= strategy.committee_size, ErrorCode::ElectionFailure,
            std::to_string(candidates.size()) + " candidates for " + std::to_string(strategy.committee_size) +
                " seats");

    std::vector<NodeId> elected;
    elected.reserve(strategy.committee_size);
    if (strategy.variant == ElectionStrategy::Variant::ByScore) {
        std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
            return a.second != b.second ? a.second > b.second : a.first < b.first;
        });
        for (std::size_t i = 0; i < strategy.committee_size; ++i) {
            elected.push_back(candidates[i].first);
        }
    } else {
        Rng rng(derive_seed(strategy.seed, 0xe1ec7));
        for (std::size_t i : rng.sample_without_replacement(candidates.size(), strategy.committee_size)) {
            elected.push_back(candidates[i].first);
        }
    }
    std::sort(elected.begin(), elected.end());
    return elected;
}

}  // namespace bflc
