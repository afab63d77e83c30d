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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "bflc/error.hpp"
#include "bflc/harness.hpp"

using bflc::ExperimentConfig;
using bflc::Framework;
using bflc::NodeId;

namespace {

ExperimentConfig small_config(std::uint64_t seed = 1) {
    ExperimentConfig cfg;
    cfg.n_nodes = 40;
    cfg.active_fraction = 0.5;       // 20 active
    cfg.committee_fraction = 0.2;    // Q = 5, P = 15
    cfg.k_updates_per_round = 6;
    cfg.rounds = 6;
    cfg.data.n_samples = 3000;
    cfg.data.features = 8;
    cfg.data.classes = 4;
    cfg.qualification = bflc::QualificationPolicy::absolute(0.05);
    cfg.train = bflc::TrainConfig{1, 0.1, 16, 0.0, 0};
    cfg.seed = seed;
    return cfg;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += std::abs(a[i] - b[i]);
    }
    return 0.5 * s;
}

std::vector<double> class_share(const bflc::Dataset& d) {
    std::vector<double> share(d.classes, 0.0);
    for (int y : d.labels) {
        share[static_cast<std::size_t>(y)] += 1.0 / static_cast<double>(d.size());
    }
    return share;
}

std::multiset<std::vector<double>> rows_of(const bflc::Dataset& d) {
    std::multiset<std::vector<double>> out;
    for (std::size_t i = 0; i < d.size(); ++i) {
        auto r = d.row(i);
        std::vector<double> v(r.begin(), r.end());
        v.push_back(d.labels[i]);
        out.insert(std::move(v));
    }
    return out;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Harness, NearestOdd) {
    EXPECT_EQ(bflc::nearest_odd(0.2), 1u);
    EXPECT_EQ(bflc::nearest_odd(2.0), 3u);
    EXPECT_EQ(bflc::nearest_odd(2.9), 3u);
    EXPECT_EQ(bflc::nearest_odd(4.0), 5u);
    EXPECT_EQ(bflc::nearest_odd(5.9), 5u);
    EXPECT_EQ(bflc::nearest_odd(8.0), 9u);
    EXPECT_EQ(bflc::nearest_odd(9.0), 9u);
}

TEST(Harness, DerivedCounts) {
    ExperimentConfig cfg;
    cfg.n_nodes = 200;
    cfg.active_fraction = 0.1;
    cfg.committee_fraction = 0.4;
    EXPECT_EQ(cfg.active_count(), 20u);
    EXPECT_EQ(cfg.committee_size(), 9u);
    EXPECT_EQ(cfg.trainer_count(), 11u);
    EXPECT_EQ(cfg.updates_per_round(), 9u);
    cfg.committee_fraction = 0.2;
    EXPECT_EQ(cfg.committee_size(), 5u);
}

TEST(Harness, CostReportArithmetic) {
    const auto r = bflc::RoundCostReport::make(8, 2, 16);
    EXPECT_EQ(r.broadcast_equiv, 100u);
    EXPECT_LE(r.validations, 8u * 2u);
}

TEST(Harness, PartitionSingleNodeIsWholeDataset) {
    const auto data = bflc::generate_synthetic(1, 200, 3, 4, 1.0);
    for (auto kind : {bflc::PartitionScheme::Kind::Dirichlet, bflc::PartitionScheme::Kind::Shards}) {
        const auto parts = bflc::partition_data(data, 1, {kind, 0.5, 2}, 3);
        ASSERT_EQ(parts.size(), 1u);
        EXPECT_EQ(rows_of(parts[0]), rows_of(data));
    }
}

TEST(Harness, PartitionErrors) {
    const auto data = bflc::generate_synthetic(1, 20, 3, 2, 1.0);
    EXPECT_THROW((void)bflc::partition_data(data, 21, {}, 1), bflc::Error);
    EXPECT_THROW((void)bflc::partition_data(data, 0, {}, 1), bflc::Error);
}

TEST(HarnessProperty, PartitionsDisjointCoverAndDeterministic) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const auto data = bflc::generate_synthetic(seed, 500 + 50 * seed, 3, 5, 1.0);
        for (auto kind : {bflc::PartitionScheme::Kind::Dirichlet, bflc::PartitionScheme::Kind::Shards}) {
            const bflc::PartitionScheme scheme{kind, 0.3, 2};
            const auto parts = bflc::partition_data(data, 7 * seed, scheme, seed);
            ASSERT_EQ(parts.size(), 7 * seed);
            std::multiset<std::vector<double>> all;
            for (const auto& p : parts) {
                ASSERT_FALSE(p.empty());
                const auto r = rows_of(p);
                all.insert(r.begin(), r.end());
            }
            EXPECT_EQ(all, rows_of(data));
            const auto again = bflc::partition_data(data, 7 * seed, scheme, seed);
            for (std::size_t i = 0; i < parts.size(); ++i) {
                EXPECT_EQ(parts[i].labels, again[i].labels);
                EXPECT_EQ(parts[i].x, again[i].x);
            }
        }
    }
}

TEST(HarnessProperty, LargeAlphaApproachesGlobalProportions) {
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto data = bflc::generate_synthetic(seed, 20000, 2, 5, 1.0);
        const auto global = class_share(data);
        const auto parts = bflc::partition_data(data, 10, {bflc::PartitionScheme::Kind::Dirichlet, 1000.0, 2}, seed);
        for (const auto& p : parts) {
            EXPECT_LT(total_variation(class_share(p), global), 0.1);
        }
    }
}

TEST(HarnessProperty, SmallAlphaIsSkewed) {
    const auto data = bflc::generate_synthetic(4, 20000, 2, 5, 1.0);
    const auto parts = bflc::partition_data(data, 10, {bflc::PartitionScheme::Kind::Dirichlet, 0.1, 2}, 4);
    double mean_tv = 0.0;
    for (const auto& p : parts) {
        mean_tv += total_variation(class_share(p), class_share(data)) / 10.0;
    }
    EXPECT_GT(mean_tv, 0.3);
}

TEST(Harness, ShardsLimitLabelsPerNode) {
    const auto data = bflc::generate_synthetic(5, 1000, 2, 10, 1.0);
    const auto parts = bflc::partition_data(data, 5, {bflc::PartitionScheme::Kind::Shards, 0.5, 2}, 5);
    // 10 shards of 100 rows over 10 balanced classes: each shard holds one label.
    for (const auto& p : parts) {
        EXPECT_LE(std::set<int>(p.labels.begin(), p.labels.end()).size(), 2u);
        EXPECT_EQ(p.size(), 200u);
    }
}

TEST(Harness, PrepareDataSplitsAndAssignsMalicious) {
    auto cfg = small_config();
    cfg.attack.malicious_fraction = 0.25;
    const auto data = bflc::prepare_data(cfg);
    EXPECT_EQ(data.test.size(), 600u);
    EXPECT_EQ(data.train.size(), 2400u);
    EXPECT_EQ(data.nodes.size(), 40u);
    EXPECT_EQ(data.malicious.size(), 10u);
    std::size_t rows = 0;
    for (const auto& n : data.nodes) {
        rows += n.size();
    }
    EXPECT_EQ(rows, data.train.size());
    EXPECT_EQ(data.malicious, bflc::prepare_data(cfg).malicious);
}

TEST(Harness, RoundLifecycleAndInvariants) {
    const auto cfg = small_config();
    const auto data = bflc::prepare_data(cfg);
    bflc::BflcSimulation sim(cfg, data);
    const std::uint64_t k = cfg.updates_per_round();
    std::vector<NodeId> previous = sim.committee();
    for (std::uint64_t t = 0; t < cfg.rounds; ++t) {
        const auto before = sim.chain().size();
        const auto row = sim.run_round();
        ASSERT_EQ(sim.chain().size(), before + k + 1);
        ASSERT_TRUE(sim.chain().verify());
        EXPECT_EQ(row.round, t);
        EXPECT_EQ(row.accepted, k);
        EXPECT_EQ(row.poisoned_accepted, 0u);
        EXPECT_EQ(row.committee, previous);
        EXPECT_EQ(row.cost.validations, (row.accepted + row.rejected) * row.cost.committee_size);
        EXPECT_LE(row.cost.validations, row.cost.training_nodes * row.cost.committee_size);
        EXPECT_EQ(row.cost.broadcast_equiv,
                  (row.cost.training_nodes + row.cost.committee_size) *
                      (row.cost.training_nodes + row.cost.committee_size));
        EXPECT_GE(row.accuracy, 0.0);
        EXPECT_LE(row.accuracy, 1.0);

        for (const auto& u : sim.chain().updates_of_round(t)) {
            EXPECT_FALSE(std::binary_search(previous.begin(), previous.end(), u.uploader)) << u.uploader;
        }
        const auto& next = sim.committee();
        EXPECT_EQ(next.size(), cfg.committee_size());
        for (NodeId id : next) {
            EXPECT_FALSE(std::binary_search(previous.begin(), previous.end(), id));
        }
        previous = next;
    }
    EXPECT_EQ(sim.chain().latest_model().first, cfg.rounds);
}

TEST(Harness, RewardsConserveTokens) {
    const auto cfg = small_config();
    const auto data = bflc::prepare_data(cfg);
    bflc::BflcSimulation sim(cfg, data);
    const auto total = sim.community().total_tokens();
    const auto treasury = sim.community().treasury();
    for (std::size_t r = 0; r < 3; ++r) {
        (void)sim.run_round();
    }
    EXPECT_EQ(sim.community().total_tokens(), total);
    EXPECT_EQ(sim.community().treasury(), treasury - 3 * cfg.reward_pool);
}

TEST(Harness, UnreachableQualificationFailsAfterRetries) {
    auto cfg = small_config();
    cfg.qualification = bflc::QualificationPolicy::absolute(1.0);
    cfg.max_round_retries = 2;
    const auto data = bflc::prepare_data(cfg);
    bflc::BflcSimulation sim(cfg, data);
    try {
        (void)sim.run_round();
        FAIL() << "expected experiment failure";
    } catch (const bflc::Error& e) {
        EXPECT_EQ(e.code(), bflc::ErrorCode::ExperimentFailure);
    }
    // Rolled back: nothing of the aborted round remains.
    EXPECT_EQ(sim.chain().size(), 1u);
    EXPECT_TRUE(sim.chain().verify());
}

TEST(Harness, HonestGenesisExcludesMalicious) {
    auto cfg = small_config();
    cfg.attack.malicious_fraction = 0.4;
    cfg.genesis = bflc::GenesisCommittee::Honest;
    const auto data = bflc::prepare_data(cfg);
    bflc::BflcSimulation sim(cfg, data);
    for (NodeId id : sim.committee()) {
        EXPECT_FALSE(data.malicious.contains(id));
    }
}

TEST(Harness, ExperimentDeterministicAndComplete) {
    auto cfg = small_config(7);
    cfg.frameworks = {Framework::Bflc, Framework::BasicFl, Framework::CwMed, Framework::StandAlone};
    const auto a = bflc::run_experiment(cfg);
    const auto b = bflc::run_experiment(cfg);
    for (Framework f : cfg.frameworks) {
        ASSERT_EQ(a.metrics.at(f).size(), cfg.rounds);
        EXPECT_EQ(bflc::metrics_csv(a.metrics.at(f)), bflc::metrics_csv(b.metrics.at(f))) << to_string(f);
    }
    ASSERT_TRUE(a.chain.has_value());
    EXPECT_TRUE(a.chain->verify());
    EXPECT_GT(a.final_accuracy(Framework::StandAlone), 0.5);
    EXPECT_THROW((void)bflc::ExperimentResult{}.final_accuracy(Framework::Bflc), bflc::Error);

    auto other = cfg;
    other.seed = 8;
    EXPECT_NE(bflc::metrics_csv(bflc::run_experiment(other).metrics.at(Framework::Bflc)),
              bflc::metrics_csv(a.metrics.at(Framework::Bflc)));
}

TEST(Harness, WriteOutputs) {
    auto cfg = small_config(3);
    cfg.rounds = 2;
    cfg.frameworks = {Framework::Bflc, Framework::BasicFl};
    const auto result = bflc::run_experiment(cfg);
    const auto dir = std::filesystem::temp_directory_path() / "bflc_harness_test";
    std::filesystem::remove_all(dir);
    bflc::write_outputs(result, dir);
    for (const char* name : {"metrics_bflc.csv", "metrics_basic_fl.csv", "chain_bflc.jsonl", "ledger.csv"}) {
        EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
    }
    const auto csv = slurp(dir / "metrics_bflc.csv");
    EXPECT_EQ(csv.rfind("round,accuracy,accepted,rejected,poisoned_accepted,", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
    std::filesystem::remove_all(dir);
}

TEST(Harness, ConfigValidation) {
    auto cfg = small_config();
    cfg.committee_fraction = 1.0;
    EXPECT_THROW(cfg.validate(), bflc::Error);
    cfg = small_config();
    cfg.rounds = 0;
    EXPECT_THROW(cfg.validate(), bflc::Error);
    cfg = small_config();
    cfg.active_fraction = 0.0;
    EXPECT_THROW(cfg.validate(), bflc::Error);
    EXPECT_NO_THROW(small_config().validate());
}
