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

// bflc: run committee-consensus federated learning experiments, compute
// committee-capture probabilities, and verify or prune chain files.
//
// Exit codes: 0 ok, 1 usage or parse error, 2 experiment failure or a chain
// that fails verification.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "bflc/adversary.hpp"
#include "bflc/chain_io.hpp"
#include "bflc/error.hpp"
#include "bflc/harness.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kFailure = 2;

std::vector<double> default_grid() {
    std::vector<double> g;
    for (int i = 1; i <= 99; ++i) {
        g.push_back(i / 100.0);
    }
    return g;
}

int cmd_run(const std::filesystem::path& config, const std::filesystem::path& out) {
    const bflc::ExperimentConfig cfg = bflc::load_config(config);
    const auto result = bflc::run_experiment(cfg);
    bflc::write_outputs(result, out);
    for (const auto& [f, rows] : result.metrics) {
        std::cout << bflc::to_string(f) << " final accuracy " << rows.back().accuracy << "\n";
    }
    return kOk;
}

int cmd_verify(const std::filesystem::path& path, std::optional<std::uint64_t> k) {
    const bflc::Chain chain = bflc::load_chain(path, k);
    const auto result = chain.verify();
    if (result.valid) {
        std::cout << "valid: " << chain.size() << " blocks, round " << chain.current_round() << ", pruned before round "
                  << chain.pruned_before() << "\n";
        return kOk;
    }
    std::cout << "invalid: first bad index " << *result.first_bad_index << " (" << result.reason << ")\n";
    return kFailure;
}

int cmd_prune(const std::filesystem::path& path, std::uint64_t keep_from, std::optional<std::uint64_t> k,
              const std::optional<std::filesystem::path>& out) {
    bflc::Chain chain = bflc::load_chain(path, k);
    if (const auto v = chain.verify(); !v.valid) {
        std::cerr << "refusing to prune an invalid chain: first bad index " << *v.first_bad_index << " (" << v.reason
                  << ")\n";
        return kFailure;
    }
    chain.prune(keep_from);
    bflc::save_chain(chain, out.value_or(path));
    std::cout << "pruned before round " << chain.pruned_before() << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Committee-consensus federated learning simulator"};
    app.require_subcommand(1);

    std::filesystem::path config_path;
    std::filesystem::path out_dir = "out";
    auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
    run->add_option("--config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--out", out_dir, "Output directory for metrics, chain and ledger")->capture_default_str();

    std::uint64_t nodes = 0;
    double p = 0.0;
    double q = 0.0;
    auto* attack = app.add_subcommand("attack-prob", "Exact probability that malicious nodes hold a committee majority");
    attack->add_option("--nodes", nodes, "Participating nodes A")->required()->check(CLI::PositiveNumber);
    attack->add_option("--committee-frac", p, "Committee fraction p")->required()->check(CLI::Range(0.0, 1.0));
    attack->add_option("--malicious-frac", q, "Malicious fraction q")->required()->check(CLI::Range(0.0, 1.0));

    std::uint64_t sweep_nodes = 1000;
    std::vector<double> p_grid = default_grid();
    std::vector<double> q_grid = default_grid();
    std::optional<std::filesystem::path> sweep_out;
    auto* sweep = app.add_subcommand("sweep", "Attack-success probability over a (p, q) grid as CSV");
    sweep->add_option("--nodes", sweep_nodes, "Participating nodes A")->capture_default_str()->check(CLI::PositiveNumber);
    sweep->add_option("--p", p_grid, "Committee fractions, comma separated (default 0.01..0.99)")
        ->delimiter(',')
        ->check(CLI::Range(0.0, 1.0));
    sweep->add_option("--q", q_grid, "Malicious fractions, comma separated (default 0.01..0.99)")
        ->delimiter(',')
        ->check(CLI::Range(0.0, 1.0));
    sweep->add_option("--out", sweep_out, "Write CSV here instead of stdout");

    std::filesystem::path chain_path;
    std::optional<std::uint64_t> chain_k;
    auto* verify = app.add_subcommand("verify", "Check hash links, payload digests and block layout of a chain file");
    verify->add_option("--chain", chain_path, "Chain file (JSON lines)")->required();
    verify->add_option("--k", chain_k, "Updates per round, when the file cannot imply it");

    std::uint64_t keep_from = 0;
    std::optional<std::filesystem::path> prune_out;
    auto* prune = app.add_subcommand("prune", "Drop payloads of blocks before a round, keeping headers");
    prune->add_option("--chain", chain_path, "Chain file (JSON lines)")->required();
    prune->add_option("--keep-from", keep_from, "First round whose payloads are kept")->required();
    prune->add_option("--k", chain_k, "Updates per round, when the file cannot imply it");
    prune->add_option("--out", prune_out, "Write the pruned chain here (default: overwrite --chain)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (*run) {
            return cmd_run(config_path, out_dir);
        }
        if (*attack) {
            std::cout << bflc::format_probability(bflc::attack_success_prob({nodes, p, q})) << "\n";
            return kOk;
        }
        if (*sweep) {
            const auto csv = bflc::sweep_to_csv(bflc::sweep_success_prob(sweep_nodes, p_grid, q_grid));
            if (sweep_out) {
                std::ofstream out(*sweep_out, std::ios::binary);
                if (!out) {
                    std::cerr << "cannot write " << sweep_out->string() << "\n";
                    return kUsage;
                }
                out << csv;
            } else {
                std::cout << csv;
            }
            return kOk;
        }
        if (*verify) {
            return cmd_verify(chain_path, chain_k);
        }
        if (*prune) {
            return cmd_prune(chain_path, keep_from, chain_k, prune_out);
        }
    } catch (const bflc::Error& e) {
        std::cerr << e.what() << "\n";
        return e.code() == bflc::ErrorCode::ExperimentFailure ? kFailure : kUsage;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
