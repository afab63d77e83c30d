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

#include "bflc/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "bflc/chain_io.hpp"
#include "bflc/error.hpp"
#include "bflc/random.hpp"

namespace bflc {

namespace {

// Stream tags for derive_seed(); every random decision has its own stream so
// frameworks that share a decision (which nodes train, what they compute)
// stay aligned.
enum Stream : std::uint64_t {
    kData = 1,
    kSplit,
    kPartition,
    kMalicious,
    kGenesisModel,
    kGenesisCommittee,
    kTrain,
    kPoison,
    kCollusion,
    kBflcSample,
    kBaselineSample,
    kElection,
    kStandAlone,
};

std::size_t floor_fraction(std::size_t n, double fraction) {
    const double x = static_cast<double>(n) * fraction;
    return static_cast<std::size_t>(std::floor(x + 1e-9 * std::max(1.0, x)));
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

TrainConfig train_config_for(const ExperimentConfig& cfg, NodeId node, std::uint64_t round) {
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.seed, kTrain, node.value, round);
    return tc;
}

/// A node's submitted delta: honest local training, then poisoning if malicious.
ParamVector node_delta(const ExperimentConfig& cfg, const ExperimentData& data, const ParamVector& global,
                       NodeId node, std::uint64_t round) {
    ParamVector delta = local_train(global, data.nodes[node.value], train_config_for(cfg, node, round));
    if (data.malicious.contains(node)) {
        delta = poison_delta(delta, data.noise_sigma, derive_seed(cfg.seed, kPoison, node.value, round));
    }
    return delta;
}

ParamVector genesis_model(const ExperimentConfig& cfg, const ExperimentData& data) {
    return init_model(derive_seed(cfg.seed, kGenesisModel), data.model);
}

}  // namespace

std::string_view to_string(Framework f) {
    switch (f) {
        case Framework::Bflc: return "bflc";
        case Framework::BasicFl: return "basic_fl";
        case Framework::CwMed: return "cwmed";
        case Framework::StandAlone: return "standalone";
    }
    return "unknown";
}

std::size_t nearest_odd(double x) {
    if (!(x > 1.0)) {
        return 1;
    }
    return 2 * static_cast<std::size_t>(std::floor(x / 2.0)) + 1;
}

std::size_t ExperimentConfig::active_count() const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(active_fraction * static_cast<double>(n_nodes))));
}

std::size_t ExperimentConfig::committee_size() const {
    return nearest_odd(committee_fraction * static_cast<double>(active_count()));
}

std::size_t ExperimentConfig::updates_per_round() const {
    return k_updates_per_round != 0 ? k_updates_per_round : committee_size();
}

void ExperimentConfig::validate() const {
    auto bad = [](const std::string& why) { fail(ErrorCode::InvalidArgument, why); };
    if (n_nodes < 2) bad("n_nodes must be at least 2");
    if (!(active_fraction > 0.0 && active_fraction <= 1.0)) bad("active_fraction must lie in (0,1]");
    if (!(committee_fraction > 0.0 && committee_fraction <= 1.0)) bad("committee_fraction must lie in (0,1]");
    if (rounds < 1) bad("rounds must be at least 1");
    if (train.epochs < 1 || train.batch_size < 1) bad("train.epochs and train.batch_size must be positive");
    if (!(train.learning_rate > 0.0)) bad("train.learning_rate must be positive");
    if (!(train.weight_decay >= 0.0) || !std::isfinite(train.weight_decay)) bad("train.weight_decay must be non-negative");
    if (reward_pool < 0 || permission_fee < 0 || treasury < 0) bad("token amounts must be non-negative");
    if (frameworks.empty()) bad("frameworks must name at least one framework");
    qualification.validate();
    attack.validate();
    if (data.test_fraction <= 0.0 || data.test_fraction >= 1.0) bad("data.test_fraction must lie in (0,1)");
    if (partition.kind == PartitionScheme::Kind::Dirichlet && !(partition.alpha > 0.0)) bad("partition.alpha must be positive");
    const bool bflc = std::find(frameworks.begin(), frameworks.end(), Framework::Bflc) != frameworks.end();
    if (bflc) {
        if (committee_size() >= active_count()) {
            bad("committee of " + std::to_string(committee_size()) + " leaves no trainers among " +
                std::to_string(active_count()) + " active nodes");
        }
        if (updates_per_round() > trainer_count()) {
            bad("k_updates_per_round " + std::to_string(updates_per_round()) + " exceeds the " +
                std::to_string(trainer_count()) + " training nodes per round");
        }
        if (genesis == GenesisCommittee::Explicit) {
            if (genesis_members.empty()) bad("explicit genesis committee is empty");
            for (NodeId id : genesis_members) {
                if (id.value >= n_nodes) bad("genesis committee member " + std::to_string(id.value) + " out of range");
            }
        }
    }
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
    std::string out =
        "round,accuracy,accepted,rejected,poisoned_accepted,committee,training_nodes,committee_size,validations,"
        "broadcast_equiv,attempts\n";
    for (const auto& r : rows) {
        std::string committee;
        for (std::size_t i = 0; i < r.committee.size(); ++i) {
            committee += (i ? ";" : "") + std::to_string(r.committee[i].value);
        }
        out += std::to_string(r.round) + "," + format_double(r.accuracy) + "," + std::to_string(r.accepted) + "," +
               std::to_string(r.rejected) + "," + std::to_string(r.poisoned_accepted) + "," + committee + "," +
               std::to_string(r.cost.training_nodes) + "," + std::to_string(r.cost.committee_size) + "," +
               std::to_string(r.cost.validations) + "," + std::to_string(r.cost.broadcast_equiv) + "," +
               std::to_string(r.attempts) + "\n";
    }
    return out;
}

ExperimentData prepare_data(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentData out;
    Dataset full = cfg.data.csv_path
                       ? load_csv(*cfg.data.csv_path)
                       : generate_synthetic(derive_seed(cfg.seed, kData), cfg.data.n_samples, cfg.data.features,
                                            cfg.data.classes, cfg.data.class_separation);
    std::vector<std::size_t> order(full.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(cfg.seed, kSplit));
    rng.shuffle(order);
    const auto n_test = std::max<std::size_t>(1, floor_fraction(full.size(), cfg.data.test_fraction));
    require(n_test < full.size(), ErrorCode::InvalidArgument, "test split leaves no training data");
    std::vector<std::size_t> test_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    std::vector<std::size_t> train_rows(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(train_rows.begin(), train_rows.end());
    out.test = full.subset(test_rows);
    out.train = full.subset(train_rows);
    out.model = {full.features, full.classes};
    out.nodes = partition_data(out.train, cfg.n_nodes, cfg.partition, derive_seed(cfg.seed, kPartition));

    std::vector<std::uint64_t> ids(cfg.n_nodes);
    std::iota(ids.begin(), ids.end(), std::uint64_t{0});
    Rng mal_rng(derive_seed(cfg.seed, kMalicious));
    mal_rng.shuffle(ids);
    const auto n_malicious = floor_fraction(cfg.n_nodes, cfg.attack.malicious_fraction);
    for (std::size_t i = 0; i < n_malicious; ++i) {
        out.malicious.insert(NodeId{ids[i]});
    }

    out.noise_sigma = cfg.attack.noise_sigma;
    if (cfg.sigma_mode == SigmaMode::HonestScale && n_malicious > 0) {
        // Median |coordinate| over honest nodes' first-round deltas.
        const ParamVector global = genesis_model(cfg, out);
        std::vector<double> magnitudes;
        for (std::uint64_t n = 0; n < cfg.n_nodes; ++n) {
            if (out.malicious.contains(NodeId{n})) {
                continue;
            }
            const auto delta = local_train(global, out.nodes[n], train_config_for(cfg, NodeId{n}, 0));
            for (double v : delta.values) {
                magnitudes.push_back(std::abs(v));
            }
        }
        require(!magnitudes.empty(), ErrorCode::InvalidArgument, "no honest nodes to calibrate noise scale");
        out.noise_sigma = cfg.attack.noise_sigma * median(std::move(magnitudes));
    }
    return out;
}

BflcSimulation::BflcSimulation(const ExperimentConfig& cfg, const ExperimentData& data)
    : cfg_(cfg),
      data_(data),
      chain_(cfg.updates_per_round(), genesis_model(cfg, data)),
      community_({NodeId{0}}, cfg.permission_fee, cfg.treasury) {
    for (std::uint64_t n = 1; n < cfg.n_nodes; ++n) {
        community_.deposit(NodeId{n}, cfg.permission_fee);
        community_.join(NodeId{n}, cfg.permission_fee, 0);
    }

    const std::size_t q = cfg.committee_size();
    if (cfg.genesis == GenesisCommittee::Explicit) {
        committee_ = cfg.genesis_members;
    } else {
        std::vector<NodeId> pool;
        for (std::uint64_t n = 0; n < cfg.n_nodes; ++n) {
            if (cfg.genesis == GenesisCommittee::Random || !data.malicious.contains(NodeId{n})) {
                pool.push_back(NodeId{n});
            }
        }
        require(pool.size() >= q, ErrorCode::InvalidArgument, "not enough nodes for the genesis committee");
        Rng rng(derive_seed(cfg.seed, kGenesisCommittee));
        for (std::size_t i : rng.sample_without_replacement(pool.size(), q)) {
            committee_.push_back(pool[i]);
        }
    }
    std::sort(committee_.begin(), committee_.end());
    committee_.erase(std::unique(committee_.begin(), committee_.end()), committee_.end());
}

MetricsRow BflcSimulation::run_round() {
    const std::uint64_t t = chain_.current_round();
    const std::size_t k = chain_.k();
    const std::size_t n_trainers = cfg_.trainer_count();
    const ParamVector global = chain_.latest_model().second;

    std::vector<CommitteeMember> members;
    bool colluders = false;
    for (NodeId id : committee_) {
        members.push_back({id, &data_.nodes[id.value]});
        colluders = colluders || data_.malicious.contains(id);
    }

    // Training candidates: community members outside the committee.
    std::vector<NodeId> pool;
    for (NodeId id : community_.members()) {
        if (!std::binary_search(committee_.begin(), committee_.end(), id)) {
            pool.push_back(id);
        }
    }
    require(pool.size() >= n_trainers, ErrorCode::ExperimentFailure, "not enough nodes to sample trainers");

    // Colluding members report high scores for malicious updates.
    auto transform_for = [&](NodeId uploader) -> ScoreTransform {
        if (!cfg_.attack.collusion || !colluders) {
            return {};
        }
        const bool malicious_update = data_.malicious.contains(uploader);
        return [this, t, uploader, malicious_update](std::size_t, NodeId member, double honest) {
            if (!data_.malicious.contains(member)) {
                return honest;
            }
            const auto seed = derive_seed(cfg_.seed, kCollusion, t, uploader.value * 1'000'003ULL + member.value);
            return collusion_score(malicious_update, honest, seed, cfg_.attack.suppress_honest);
        };
    };

    for (std::size_t attempt = 0; attempt <= cfg_.max_round_retries; ++attempt) {
        Rng rng(derive_seed(cfg_.seed, kBflcSample, t, attempt));
        std::vector<NodeId> trainers;
        for (std::size_t i : rng.sample_without_replacement(pool.size(), n_trainers)) {
            trainers.push_back(pool[i]);
        }
        std::sort(trainers.begin(), trainers.end());

        CommitteeState state(members, t, cfg_.qualification);
        for (NodeId uploader : trainers) {
            if (chain_.pending_updates() == k) {
                break;
            }
            submit_update(state, chain_, uploader, node_delta(cfg_, data_, global, uploader, t),
                          transform_for(uploader));
        }
        if (chain_.pending_updates() < k) {
            chain_.rollback(t);
            continue;
        }

        const ParamVector next = finalize_round(state, chain_, cfg_.aggregator);

        std::map<NodeId, double> accepted_scores;
        std::uint64_t poisoned = 0;
        for (const auto& sub : state.pending()) {
            accepted_scores[sub.uploader] = sub.median_score;
            poisoned += data_.malicious.contains(sub.uploader) ? 1 : 0;
        }

        ElectionStrategy strategy{cfg_.election, cfg_.committee_size(), derive_seed(cfg_.seed, kElection, t)};
        std::vector<NodeId> elected;
        try {
            elected = elect_committee(accepted_scores, strategy, committee_);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ElectionFailure) {
                throw;
            }
            // Widen to every scored submitter of the round, then to the
            // trainers that never got to submit (scored 0, so they rank last).
            std::map<NodeId, double> widened = accepted_scores;
            for (const auto& sub : state.rejected()) {
                widened.try_emplace(sub.uploader, sub.median_score);
            }
            for (NodeId id : trainers) {
                widened.try_emplace(id, 0.0);
            }
            try {
                elected = elect_committee(widened, strategy, committee_);
            } catch (const Error& again) {
                fail(ErrorCode::ExperimentFailure, std::string("round ") + std::to_string(t) + ": " + again.what());
            }
        }
        community_.distribute_rewards(accepted_scores, cfg_.reward_pool);

        MetricsRow row;
        row.round = t;
        row.accuracy = evaluate(next, data_.test);
        row.accepted = state.pending().size();
        row.rejected = state.rejected().size();
        row.poisoned_accepted = poisoned;
        row.committee = committee_;
        row.cost = RoundCostReport::make(n_trainers, committee_.size(), state.validations());
        row.attempts = attempt + 1;
        committee_ = std::move(elected);
        return row;
    }
    fail(ErrorCode::ExperimentFailure, "round " + std::to_string(t) + ": fewer than k=" + std::to_string(k) +
                                           " qualified updates after " + std::to_string(cfg_.max_round_retries + 1) +
                                           " attempts");
}

std::vector<MetricsRow> run_baseline(Framework framework, const ExperimentConfig& cfg, const ExperimentData& data) {
    require(framework != Framework::Bflc, ErrorCode::InvalidArgument, "bflc is not a baseline");
    std::vector<MetricsRow> rows;
    ParamVector global = genesis_model(cfg, data);
    const std::size_t active = cfg.active_count();
    for (std::uint64_t t = 0; t < cfg.rounds; ++t) {
        MetricsRow row;
        row.round = t;
        if (framework == Framework::StandAlone) {
            TrainConfig tc = cfg.train;
            tc.seed = derive_seed(cfg.seed, kStandAlone, t);
            global = global + local_train(global, data.train, tc);
            row.cost = RoundCostReport::make(0, 0, 0);
        } else {
            Rng rng(derive_seed(cfg.seed, kBaselineSample, t));
            std::vector<NodeId> sampled;
            for (std::size_t i : rng.sample_without_replacement(cfg.n_nodes, active)) {
                sampled.push_back(NodeId{i});
            }
            std::sort(sampled.begin(), sampled.end());
            std::vector<ParamVector> deltas;
            deltas.reserve(sampled.size());
            for (NodeId id : sampled) {
                deltas.push_back(node_delta(cfg, data, global, id, t));
                row.poisoned_accepted += data.malicious.contains(id) ? 1 : 0;
            }
            const ParamShape shape = global.shape;
            global = framework == Framework::BasicFl ? aggregate_mean(global, deltas) : aggregate_cwmed(global, deltas);
            global.shape = shape;
            row.accepted = deltas.size();
            row.cost = RoundCostReport::make(deltas.size(), 0, 0);
        }
        row.accuracy = evaluate(global, data.test);
        rows.push_back(std::move(row));
    }
    return rows;
}

double ExperimentResult::final_accuracy(Framework f) const {
    const auto it = metrics.find(f);
    require(it != metrics.end() && !it->second.empty(), ErrorCode::NotFound,
            std::string("no metrics for ") + std::string(to_string(f)));
    return it->second.back().accuracy;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    const ExperimentData data = prepare_data(cfg);
    ExperimentResult result;
    for (Framework f : cfg.frameworks) {
        if (result.metrics.contains(f)) {
            continue;
        }
        if (f == Framework::Bflc) {
            BflcSimulation sim(cfg, data);
            std::vector<MetricsRow> rows;
            for (std::size_t r = 0; r < cfg.rounds; ++r) {
                rows.push_back(sim.run_round());
            }
            result.metrics[f] = std::move(rows);
            result.chain = sim.chain();
            result.community = sim.community();
        } else {
            result.metrics[f] = run_baseline(f, cfg, data);
        }
    }
    return result;
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto write = [&](const std::string& name, const std::string& body) {
        std::ofstream out(dir / name, std::ios::binary);
        require(static_cast<bool>(out), ErrorCode::InvalidArgument, "cannot write " + (dir / name).string());
        out << body;
    };
    for (const auto& [f, rows] : result.metrics) {
        write("metrics_" + std::string(to_string(f)) + ".csv", metrics_csv(rows));
    }
    if (result.chain) {
        save_chain(*result.chain, dir / "chain_bflc.jsonl");
    }
    if (result.community) {
        std::ostringstream ledger;
        result.community->write_ledger_csv(ledger);
        write("ledger.csv", ledger.str());
    }
}

}  // namespace bflc
