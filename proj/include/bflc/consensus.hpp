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

// Committee consensus: the committee scores each submitted update on its own
// members' local data, packs qualified updates onto the chain, aggregates once
// k are packed, and the next committee is elected from this round's accepted
// uploaders.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "bflc/chain.hpp"
#include "bflc/learning.hpp"
#include "bflc/types.hpp"

namespace bflc {

struct QualificationPolicy {
    enum class Mode { AbsoluteThreshold, RelativeToGlobal, Combined };

    Mode mode = Mode::RelativeToGlobal;
    double theta = 0.5;
    double rho = 0.95;

    static QualificationPolicy absolute(double theta) { return {Mode::AbsoluteThreshold, theta, 0.95}; }
    static QualificationPolicy relative(double rho) { return {Mode::RelativeToGlobal, 0.5, rho}; }
    static QualificationPolicy combined(double theta, double rho) { return {Mode::Combined, theta, rho}; }

    void validate() const;
};

/// AbsoluteThreshold: median_score >= theta. RelativeToGlobal: median_score >=
/// rho * global_score. Combined requires both, which keeps a floor in the
/// first rounds where the global model is still near chance. All inclusive.
bool qualify(double median_score, const QualificationPolicy& policy, double global_score);

struct UpdateScore {
    std::vector<double> member_scores;
    double median_score = 0.0;
};

/// Member i scores evaluate(global + delta, *member_data[i]).
UpdateScore score_update(std::span<const Dataset* const> member_data, const ParamVector& global,
                         const ParamVector& delta);

struct CommitteeMember {
    NodeId id;
    const Dataset* data = nullptr;
};

/// Replaces a member's truthful score. Arguments: member position, member id,
/// truthful score. Used to model colluding committee members.
using ScoreTransform = std::function<double(std::size_t, NodeId, double)>;

struct ScoredSubmission {
    NodeId uploader;
    ParamVector delta;
    std::vector<double> member_scores;
    double median_score = 0.0;
    std::optional<std::uint64_t> chain_index;  // set when accepted
};

enum class Aggregator { Mean, CwMed };

struct SubmitOutcome {
    enum class Status { Accepted, Rejected, RoundClosed };

    Status status = Status::RoundClosed;
    std::optional<std::uint64_t> index;
    double median_score = 0.0;
};

class CommitteeState {
public:
    CommitteeState(std::vector<CommitteeMember> members, std::uint64_t round, QualificationPolicy policy);

    [[nodiscard]] std::span<const CommitteeMember> members() const { return members_; }
    [[nodiscard]] std::vector<NodeId> member_ids() const;
    [[nodiscard]] std::size_t size() const { return members_.size(); }
    [[nodiscard]] bool is_member(NodeId id) const;
    [[nodiscard]] std::uint64_t round() const { return round_; }
    [[nodiscard]] const QualificationPolicy& policy() const { return policy_; }

    /// Accepted (on-chain) submissions, in acceptance order.
    [[nodiscard]] std::span<const ScoredSubmission> pending() const { return pending_; }
    /// Scored but unqualified submissions; never written to the chain.
    [[nodiscard]] std::span<const ScoredSubmission> rejected() const { return rejected_; }
    /// Member evaluations of submitted updates so far (submissions x members).
    [[nodiscard]] std::uint64_t validations() const { return validations_; }

    /// Committee-median accuracy of `global`, computed once per round.
    double global_score(const ParamVector& global);

private:
    std::vector<CommitteeMember> members_;
    std::uint64_t round_;
    QualificationPolicy policy_;
    std::vector<ScoredSubmission> pending_;
    std::vector<ScoredSubmission> rejected_;
    std::uint64_t validations_ = 0;
    std::optional<double> global_score_;

    friend SubmitOutcome submit_update(CommitteeState&, Chain&, NodeId, ParamVector, const ScoreTransform&);
};

/// Score `delta` against the committee and pack it onto `chain` if it
/// qualifies. Throws forbidden for committee members and duplicate-submission
/// for an uploader already accepted this round.
SubmitOutcome submit_update(CommitteeState& state, Chain& chain, NodeId uploader, ParamVector delta,
                            const ScoreTransform& transform);
inline SubmitOutcome submit_update(CommitteeState& state, Chain& chain, NodeId uploader, ParamVector delta) {
    return submit_update(state, chain, uploader, std::move(delta), ScoreTransform{});
}

/// Aggregate the round's k on-chain updates into the next global model and
/// append its model block. Throws round-incomplete if fewer than k are packed.
ParamVector finalize_round(const CommitteeState& state, Chain& chain, Aggregator aggregator);

struct ElectionStrategy {
    enum class Variant { Random, ByScore };

    Variant variant = Variant::ByScore;
    std::size_t committee_size = 1;
    std::uint64_t seed = 0;
};

/// Next committee, sorted by id, disjoint from prev_members. ByScore takes the
/// top scores with ties to the lower id; Random samples uniformly.
std::vector<NodeId> elect_committee(const std::map<NodeId, double>& round_scores, const ElectionStrategy& strategy,
                                    std::span<const NodeId> prev_members);

}  // namespace bflc
