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

// Experiment orchestration: data preparation and non-IID partitioning, the
// per-round committee-consensus lifecycle, the basic-FL / CwMed / stand-alone
// baselines, and metric and cost accounting.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "bflc/adversary.hpp"
#include "bflc/chain.hpp"
#include "bflc/community.hpp"
#include "bflc/consensus.hpp"
#include "bflc/learning.hpp"

namespace bflc {

struct PartitionScheme {
    enum class Kind { Dirichlet, Shards };

    Kind kind = Kind::Dirichlet;
    double alpha = 0.5;
    std::size_t shards_per_node = 2;
};

/// Split `data` into `n_nodes` disjoint datasets whose union is `data`. Every
/// node receives at least one row.
std::vector<Dataset> partition_data(const Dataset& data, std::size_t n_nodes, const PartitionScheme& scheme,
                                    std::uint64_t seed);

struct DataConfig {
    std::optional<std::filesystem::path> csv_path;  // synthetic when empty
    std::size_t n_samples = 20000;
    std::size_t features = 32;
    std::size_t classes = 10;
    double class_separation = 3.0;
    double test_fraction = 0.2;
};

enum class Framework { Bflc, BasicFl, CwMed, StandAlone };
std::string_view to_string(Framework f);

enum class SigmaMode {
    Absolute,     // attack.noise_sigma is the noise standard deviation
    HonestScale,  // noise_sigma multiplies the median |coordinate| of honest genesis deltas
};

enum class GenesisCommittee { Random, Honest, Explicit };

struct ExperimentConfig {
    std::size_t n_nodes = 200;
    double active_fraction = 0.1;
    double committee_fraction = 0.4;
    std::size_t rounds = 50;
    std::size_t k_updates_per_round = 0;  // 0: same as the committee size
    ElectionStrategy::Variant election = ElectionStrategy::Variant::ByScore;
    QualificationPolicy qualification;
    Aggregator aggregator = Aggregator::Mean;
    AttackConfig attack;
    SigmaMode sigma_mode = SigmaMode::Absolute;
    DataConfig data;
    PartitionScheme partition;
    TrainConfig train{2, 0.1, 16, 0};
    std::int64_t reward_pool = 100;
    std::int64_t permission_fee = 10;
    std::int64_t treasury = 1'000'000;
    GenesisCommittee genesis = GenesisCommittee::Random;
    std::vector<NodeId> genesis_members;  // used with Explicit
    std::size_t max_round_retries = 5;
    std::vector<Framework> frameworks{Framework::Bflc};
    std::uint64_t seed = 1;

    /// Throws invalid-argument on out-of-range fields.
    void validate() const;

    [[nodiscard]] std::size_t active_count() const;
    [[nodiscard]] std::size_t committee_size() const;
    [[nodiscard]] std::size_t trainer_count() const { return active_count() - committee_size(); }
    [[nodiscard]] std::size_t updates_per_round() const;
};

/// Nearest odd integer to x (ties at even integers round up), at least 1.
std::size_t nearest_odd(double x);

/// Parse the JSON config document. Errors carry "line N:" prefixes.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct RoundCostReport {
    std::uint64_t training_nodes = 0;  // P
    std::uint64_t committee_size = 0;  // Q
    std::uint64_t validations = 0;
    std::uint64_t broadcast_equiv = 0;  // (P+Q)^2

    static RoundCostReport make(std::uint64_t p, std::uint64_t q, std::uint64_t validations) {
        return {p, q, validations, (p + q) * (p + q)};
    }
};

struct MetricsRow {
    std::uint64_t round = 0;
    double accuracy = 0.0;
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;
    std::uint64_t poisoned_accepted = 0;
    std::vector<NodeId> committee;
    RoundCostReport cost;
    std::uint64_t attempts = 1;
};

std::string metrics_csv(const std::vector<MetricsRow>& rows);

/// Train/test split, per-node partitions and the malicious set, shared by
/// every framework of one experiment.
struct ExperimentData {
    Dataset train;
    Dataset test;
    std::vector<Dataset> nodes;
    std::set<NodeId> malicious;
    ModelSpec model;
    double noise_sigma = 0.0;  // resolved standard deviation
};

ExperimentData prepare_data(const ExperimentConfig& cfg);

/// One committee-consensus run. Each run_round() executes a full round:
/// sample active nodes, train, submit in ascending id order, aggregate, elect,
/// reward. A round with fewer than k qualified updates is rolled back and
/// re-sampled up to max_round_retries times, then throws experiment-failure.
class BflcSimulation {
public:
    BflcSimulation(const ExperimentConfig& cfg, const ExperimentData& data);

    MetricsRow run_round();

    [[nodiscard]] const Chain& chain() const { return chain_; }
    [[nodiscard]] const Community& community() const { return community_; }
    [[nodiscard]] const std::vector<NodeId>& committee() const { return committee_; }
    [[nodiscard]] std::uint64_t round() const { return chain_.current_round(); }

private:
    const ExperimentConfig& cfg_;
    const ExperimentData& data_;
    Chain chain_;
    Community community_;
    std::vector<NodeId> committee_;
};

/// Basic FL (mean of all sampled updates), CwMed (coordinate-wise median) and
/// stand-alone (centralized epochs on the union of node data).
std::vector<MetricsRow> run_baseline(Framework framework, const ExperimentConfig& cfg, const ExperimentData& data);

struct ExperimentResult {
    std::map<Framework, std::vector<MetricsRow>> metrics;
    std::optional<Chain> chain;
    std::optional<Community> community;

    [[nodiscard]] double final_accuracy(Framework f) const;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// metrics_<framework>.csv per framework, chain_bflc.jsonl and ledger.csv.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace bflc
