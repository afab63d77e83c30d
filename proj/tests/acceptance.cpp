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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bflc/adversary.hpp"
#include "bflc/chain.hpp"
#include "bflc/consensus.hpp"
#include "bflc/error.hpp"
#include "bflc/harness.hpp"
#include "bflc/learning.hpp"
#include "bflc/random.hpp"
#include "chain_fixtures.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using bflc::Framework;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int digits = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

const std::vector<std::uint64_t> kSeeds{1, 2, 3};

// Rows of every BFLC round simulated below, for the cost check.
std::vector<bflc::MetricsRow> g_bflc_rows;

// ---------------------------------------------------------------------------

Outcome attack_exactness() {
    double worst = 0.0;
    std::size_t cases = 0;
    for (std::uint64_t a = 1; a <= 60; ++a) {
        for (int pi = 1; pi <= 10; ++pi) {
            for (int qi = 0; qi <= 10; ++qi) {
                const bflc::AttackAnalysisQuery q{a, pi / 10.0, qi / 10.0};
                if (q.committee_seats() == 0) {
                    continue;
                }
                const double exact =
                    oracle::to_double(oracle::majority_probability(a, q.malicious_nodes(), q.committee_seats()));
                worst = std::max(worst, std::abs(bflc::attack_success_prob(q) - exact));
                ++cases;
            }
        }
    }
    const double eleven = bflc::attack_success_prob({10, 0.4, 0.5});
    const bool ok = worst < 1e-12 && std::abs(eleven - 11.0 / 42.0) < 1e-12;
    return {ok, std::to_string(cases) + " cases, max abs error " + fmt(worst * 1e12, 3) + "e-12, A=10 p=0.4 q=0.5 -> " +
                    bflc::format_probability(eleven)};
}

Outcome figure3_shape() {
    bool ok = true;
    std::string detail;
    for (int pi = 1; pi <= 5; ++pi) {
        const double p = pi / 10.0;
        const double lo = bflc::attack_success_prob({1000, p, 0.4});
        const double hi = bflc::attack_success_prob({1000, p, 0.6});
        ok = ok && lo < 0.02 && hi > 0.95;
        detail += "p=" + fmt(p, 1) + ": q0.4=" + bflc::format_probability(lo) + " q0.6=" +
                  bflc::format_probability(hi) + (pi < 5 ? "; " : "");
    }
    return {ok, detail};
}

// Returns an empty string when every invariant holds, else the first violation.
std::string check_chain_run(bflc::Rng& rng, std::size_t& exhaustive_runs) {
    const std::uint64_t k = 1 + rng.below(8);
    const std::uint64_t rounds = rng.below(31);
    const std::uint64_t partial = rng.below(k);
    const std::uint64_t dim = 1 + rng.below(4);
    const bflc::Chain chain = fixtures::scripted_chain(rng.next_u64(), k, rounds, partial, dim);
    const std::string tag = "k=" + std::to_string(k) + " rounds=" + std::to_string(rounds) + ": ";

    if (!chain.verify()) return tag + "fresh chain fails verification";
    if (chain.size() != rounds * (k + 1) + 1 + partial) return tag + "wrong length";
    for (std::uint64_t i = 0; i < chain.size(); ++i) {
        const auto& h = bflc::header_of(chain.block(i));
        if (h.index != i) return tag + "stored index mismatch";
        const bool model_slot = i % (k + 1) == 0;
        if ((h.kind == bflc::BlockKind::Model) != model_slot) return tag + "block kind in wrong slot";
        if (h.round != i / (k + 1)) return tag + "round/index formula violated";
        const bflc::Digest prev = i == 0 ? bflc::Digest{} : bflc::header_of(chain.block(i - 1)).digest();
        if (h.prev_digest != prev) return tag + "hash link broken";
    }

    // Rollback to every reachable round.
    for (std::uint64_t t = 0; t <= rounds; ++t) {
        bflc::Chain back = chain;
        back.rollback(t);
        if (back.size() != t * (k + 1) + 1 || back.latest_model().first != t || !back.verify()) {
            return tag + "rollback to " + std::to_string(t) + " broken";
        }
    }

    // Prune keeps headers, the latest model and the open round; pruned rounds are gone.
    const std::uint64_t keep = rng.below(rounds + 1);
    bflc::Chain pruned = chain;
    pruned.prune(keep);
    if (!pruned.verify()) return tag + "pruned chain fails verification";
    if (!(pruned.latest_model().second == chain.latest_model().second)) return tag + "prune lost the latest model";
    for (std::uint64_t i = 0; i < chain.size(); ++i) {
        if (bflc::header_of(pruned.block(i)).digest() != bflc::header_of(chain.block(i)).digest()) {
            return tag + "prune changed a header";
        }
    }
    if (pruned.updates_of_round(rounds).size() != partial) return tag + "prune dropped open-round updates";
    for (std::uint64_t t = 0; t < keep; ++t) {
        try {
            (void)pruned.updates_of_round(t);
            return tag + "pruned round still readable";
        } catch (const bflc::Error& e) {
            if (e.code() != bflc::ErrorCode::PrunedUnavailable) return tag + "wrong error for pruned round";
        }
    }

    // Single-byte tampering: every mutation must be caught at the mutated block.
    std::string failure;
    auto check = [&](const bflc::Chain& tampered, std::uint64_t i) {
        if (!failure.empty()) return;
        const auto v = tampered.verify();
        if (v.valid || !v.first_bad_index || *v.first_bad_index != i) {
            failure = tag + "tamper in block " + std::to_string(i) + " not pinned";
        }
    };
    // Every byte of small chains; a random sample of bytes on large ones.
    if (chain.size() <= 40) {
        ++exhaustive_runs;
        fixtures::for_each_byte_tamper(chain, 0xff, check);
    } else {
        for (int s = 0; s < 40 && failure.empty(); ++s) {
            auto blocks = fixtures::copy_blocks(chain);
            const std::uint64_t i = rng.below(blocks.size());
            auto ranges = fixtures::byte_ranges(blocks[i]);
            auto& [ptr, len] = ranges[rng.below(ranges.size())];
            ptr[rng.below(len)] ^= static_cast<unsigned char>(1 + rng.below(255));
            check(fixtures::rebuild(chain, std::move(blocks)), i);
        }
    }
    return failure;
}

Outcome chain_properties() {
    bflc::Rng rng(20240);
    std::size_t exhaustive = 0;
    for (int run = 0; run < 200; ++run) {
        const std::string err = check_chain_run(rng, exhaustive);
        if (!err.empty()) {
            return {false, "run " + std::to_string(run) + ": " + err};
        }
    }
    return {true, "200 scripted runs, " + std::to_string(exhaustive) +
                      " tampered at every byte, the rest at 40 sampled bytes"};
}

bflc::Dataset random_dataset(bflc::Rng& rng, std::size_t n, std::size_t d, std::size_t c) {
    bflc::Dataset data;
    data.features = d;
    data.classes = c;
    for (std::size_t i = 0; i < n * d; ++i) data.x.push_back(2.0 * rng.normal());
    for (std::size_t i = 0; i < n; ++i) data.labels.push_back(static_cast<int>(rng.below(c)));
    return data;
}

Outcome learning_numerics() {
    bflc::Rng rng(404);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t d = 1 + rng.below(6), c = 2 + rng.below(4), n = 1 + rng.below(20);
        const auto data = random_dataset(rng, n, d, c);
        bflc::ParamVector model = bflc::ParamVector::zeros(bflc::ModelSpec{d, c}.shape());
        for (auto& v : model.values) v = rng.normal();
        std::vector<std::size_t> rows(n);
        for (std::size_t i = 0; i < n; ++i) rows[i] = i;
        const auto g = bflc::cross_entropy_gradient(model, data, rows);
        const auto num = oracle::numeric_gradient(model, data);
        for (std::size_t i = 0; i < num.size(); ++i) {
            const double denom = std::max({std::abs(g[i]), std::abs(num[i]), 1e-10});
            worst = std::max(worst, std::abs(g[i] - num[i]) / denom);
        }
    }
    std::size_t median_mismatch = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t count = 1 + rng.below(9), dim = 1 + rng.below(12);
        std::vector<bflc::ParamVector> deltas;
        for (std::size_t i = 0; i < count; ++i) {
            std::vector<double> v(dim);
            for (auto& x : v) x = rng.normal();
            deltas.emplace_back(std::move(v));
        }
        const bflc::ParamVector zero(std::vector<double>(dim, 0.0));
        const auto got = bflc::aggregate_cwmed(zero, deltas);
        for (std::size_t j = 0; j < dim; ++j) {
            std::vector<double> column;
            for (const auto& dl : deltas) column.push_back(dl[j]);
            median_mismatch += got[j] == oracle::sorted_median(column) ? 0 : 1;
        }
    }
    return {worst < 1e-5 && median_mismatch == 0,
            "max gradient rel error " + fmt(worst * 1e9, 3) + "e-9 over 50 instances, cwmed mismatches " +
                std::to_string(median_mismatch) + " over 100 sets"};
}

// ---------------------------------------------------------------------------

bflc::ExperimentConfig table1_config(double active, std::uint64_t seed) {
    bflc::ExperimentConfig cfg;
    cfg.n_nodes = 200;
    cfg.active_fraction = active;
    cfg.committee_fraction = 0.4;
    cfg.rounds = 50;
    cfg.data.n_samples = 20000;
    cfg.data.features = 32;
    cfg.data.classes = 10;
    cfg.data.class_separation = 3.0;
    cfg.partition = {bflc::PartitionScheme::Kind::Dirichlet, 0.5, 2};
    cfg.train = bflc::TrainConfig{2, 0.05, 16, 0.0, 0};
    cfg.qualification = bflc::QualificationPolicy::relative(0.8);
    cfg.k_updates_per_round = (cfg.trainer_count() + 3) / 4;
    cfg.frameworks = {Framework::Bflc, Framework::BasicFl, Framework::StandAlone};
    cfg.seed = seed;
    return cfg;
}

bflc::ExperimentConfig figure4_config(double malicious, std::uint64_t seed) {
    bflc::ExperimentConfig cfg;
    cfg.n_nodes = 200;
    cfg.active_fraction = 0.1;
    cfg.committee_fraction = 0.2;  // Q = 5, P = 15
    cfg.k_updates_per_round = 8;
    cfg.rounds = 50;
    cfg.data.n_samples = 20000;
    cfg.data.features = 32;
    cfg.data.classes = 10;
    cfg.data.class_separation = 3.0;
    cfg.partition = {bflc::PartitionScheme::Kind::Dirichlet, 5.0, 2};
    cfg.train = bflc::TrainConfig{5, 0.3, 16, 0.2, 0};
    cfg.qualification = bflc::QualificationPolicy::absolute(0.4);
    cfg.attack.malicious_fraction = malicious;
    cfg.attack.noise_sigma = 10.0;
    cfg.attack.collusion = true;
    cfg.sigma_mode = bflc::SigmaMode::HonestScale;
    cfg.frameworks = {Framework::Bflc, Framework::BasicFl, Framework::CwMed};
    cfg.seed = seed;
    return cfg;
}

std::map<Framework, double> mean_final(const std::function<bflc::ExperimentConfig(std::uint64_t)>& make) {
    std::map<Framework, double> mean;
    for (std::uint64_t seed : kSeeds) {
        const auto cfg = make(seed);
        const auto result = bflc::run_experiment(cfg);
        for (const auto& [f, rows] : result.metrics) {
            mean[f] += rows.back().accuracy / static_cast<double>(kSeeds.size());
        }
        if (result.metrics.contains(Framework::Bflc)) {
            const auto& rows = result.metrics.at(Framework::Bflc);
            g_bflc_rows.insert(g_bflc_rows.end(), rows.begin(), rows.end());
        }
    }
    return mean;
}

Outcome honest_replication() {
    bool ok = true;
    std::string detail;
    for (int a = 1; a <= 5; ++a) {
        const double active = a / 10.0;
        const auto m = mean_final([&](std::uint64_t s) { return table1_config(active, s); });
        const double bflc = m.at(Framework::Bflc), basic = m.at(Framework::BasicFl), alone = m.at(Framework::StandAlone);
        const bool row_ok = std::abs(bflc - basic) <= 0.03 && alone > bflc && alone > basic;
        ok = ok && row_ok;
        detail += std::to_string(a * 10) + "%: bflc " + fmt(bflc) + " basic " + fmt(basic) + " alone " + fmt(alone) +
                  (row_ok ? "" : " (x)") + (a < 5 ? "; " : "");
    }
    return {ok, detail};
}

Outcome attack_replication() {
    const auto honest = mean_final([](std::uint64_t s) { return figure4_config(0.0, s); });
    bool ok = true;
    std::string detail = "honest bflc " + fmt(honest.at(Framework::Bflc)) + " basic " +
                         fmt(honest.at(Framework::BasicFl)) + " cwmed " + fmt(honest.at(Framework::CwMed));
    for (double mal : {0.3, 0.4}) {
        const auto m = mean_final([&](std::uint64_t s) { return figure4_config(mal, s); });
        auto drop = [&](Framework f) { return honest.at(f) - m.at(f); };
        const bool order = drop(Framework::Bflc) <= drop(Framework::CwMed) && drop(Framework::CwMed) <= drop(Framework::BasicFl);
        bool margin = true;
        if (mal == 0.3) {
            margin = m.at(Framework::Bflc) - m.at(Framework::BasicFl) >= 0.10;
        }
        ok = ok && order && margin;
        detail += "; " + fmt(mal * 100, 0) + "% malicious: bflc " + fmt(m.at(Framework::Bflc)) + " basic " +
                  fmt(m.at(Framework::BasicFl)) + " cwmed " + fmt(m.at(Framework::CwMed)) + ", drops " +
                  fmt(drop(Framework::Bflc)) + "/" + fmt(drop(Framework::CwMed)) + "/" + fmt(drop(Framework::BasicFl)) +
                  (order && margin ? "" : " (x)");
    }
    return {ok, detail};
}

Outcome honest_majority_lemma() {
    std::uint64_t poisoned = 0, rounds = 0;
    for (double mal : {0.3, 0.4}) {
        for (std::uint64_t seed : kSeeds) {
            auto cfg = figure4_config(mal, seed);
            cfg.genesis = bflc::GenesisCommittee::Honest;
            cfg.election = bflc::ElectionStrategy::Variant::ByScore;
            cfg.frameworks = {Framework::Bflc};
            const auto result = bflc::run_experiment(cfg);
            for (const auto& row : result.metrics.at(Framework::Bflc)) {
                poisoned += row.poisoned_accepted;
                ++rounds;
            }
            g_bflc_rows.insert(g_bflc_rows.end(), result.metrics.at(Framework::Bflc).begin(),
                               result.metrics.at(Framework::Bflc).end());
        }
    }
    return {poisoned == 0 && rounds == 2 * kSeeds.size() * 50,
            std::to_string(poisoned) + " poisoned updates accepted over " + std::to_string(rounds) +
                " rounds (30% and 40% malicious, 3 seeds each)"};
}

Outcome cost_accounting() {
    std::size_t bad = 0;
    for (const auto& r : g_bflc_rows) {
        const auto pq = r.cost.training_nodes + r.cost.committee_size;
        if (r.cost.validations > r.cost.training_nodes * r.cost.committee_size || r.cost.broadcast_equiv != pq * pq) {
            ++bad;
        }
    }

    // A real 2-member committee scoring 8 submissions.
    bflc::Rng rng(88);
    std::vector<bflc::Dataset> member_data{random_dataset(rng, 20, 3, 2), random_dataset(rng, 20, 3, 2)};
    std::vector<bflc::CommitteeMember> members{{bflc::NodeId{100}, &member_data[0]}, {bflc::NodeId{101}, &member_data[1]}};
    const auto shape = bflc::ModelSpec{3, 2}.shape();
    bflc::Chain chain(8, bflc::ParamVector::zeros(shape));
    bflc::CommitteeState state(members, 0, bflc::QualificationPolicy::absolute(1e-9));
    for (std::uint64_t n = 1; n <= 8; ++n) {
        (void)bflc::submit_update(state, chain, bflc::NodeId{n}, bflc::ParamVector::zeros(shape));
    }
    const auto report = bflc::RoundCostReport::make(8, 2, state.validations());
    const bool example = report.validations == 16 && report.broadcast_equiv == 100;
    return {bad == 0 && example && !g_bflc_rows.empty(),
            std::to_string(g_bflc_rows.size()) + " simulated rounds checked, " + std::to_string(bad) +
                " violations; P=8 Q=2 gives " + std::to_string(report.validations) + " vs " +
                std::to_string(report.broadcast_equiv)};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(BFLC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const auto dir = fs::temp_directory_path() / "bflc_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "exp.json") << R"({
  "n_nodes": 200, "active_fraction": 0.1, "committee_fraction": 0.2, "rounds": 20,
  "k_updates_per_round": 8,
  "qualification": {"mode": "absolute", "theta": 0.4},
  "data": {"n_samples": 20000, "features": 32, "classes": 10, "class_separation": 3.0},
  "partition": {"scheme": "dirichlet", "alpha": 5.0},
  "train": {"epochs": 5, "learning_rate": 0.3, "weight_decay": 0.2, "batch_size": 16},
  "attack": {"malicious_fraction": 0.3, "noise_sigma": 10, "sigma_mode": "honest_scale", "collusion": true},
  "frameworks": ["bflc", "basic_fl", "cwmed", "standalone"], "seed": 9
})";
    const std::string base = "run --config " + (dir / "exp.json").string() + " --out ";
    const int a = run_cli(base + (dir / "a").string());
    const int b = run_cli(base + (dir / "b").string());
    if (a != 0 || b != 0) {
        return {false, "cli exit codes " + std::to_string(a) + ", " + std::to_string(b)};
    }
    std::size_t files = 0, differ = 0;
    for (const auto& entry : fs::directory_iterator(dir / "a")) {
        ++files;
        const auto other = dir / "b" / entry.path().filename();
        differ += fs::exists(other) && slurp(entry.path()) == slurp(other) ? 0 : 1;
    }
    fs::remove_all(dir);
    return {files >= 6 && differ == 0,
            std::to_string(files) + " output files compared, " + std::to_string(differ) + " differ"};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double budget_seconds;  // 0: no stated limit
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "attack-probability exactness", 1, attack_exactness},
        {2, "committee-capture curve shape", 5, figure3_shape},
        {3, "chain layout property suite", 10, chain_properties},
        {4, "learning numerics", 10, learning_numerics},
        {5, "honest-run accuracy ordering", 600, honest_replication},
        {6, "poisoning resistance", 900, attack_replication},
        {7, "honest-majority committee admits no poison", 0, honest_majority_lemma},
        {8, "cost accounting", 0, cost_accounting},
        {9, "byte-identical reruns", 0, determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = c.budget_seconds == 0 || secs < c.budget_seconds;
        const bool pass = out.pass && in_time;
        failed += pass ? 0 : 1;
        std::cout << "criterion " << c.id << ": " << (pass ? "PASS" : "FAIL") << "  " << c.name << " [" << fmt(secs, 2)
                  << " s" << (in_time ? "" : ", over budget") << "] " << out.detail << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
