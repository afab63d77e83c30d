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

// Malicious-node behaviour for the simulator and the exact committee-capture
// probability used to analyse it.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bflc/param_vector.hpp"

namespace bflc {

struct AttackConfig {
    double malicious_fraction = 0.0;
    double noise_sigma = 1.0;
    bool collusion = true;
    /// Colluding members also score honest updates 0.
    bool suppress_honest = false;
    std::uint64_t seed = 0;

    void validate() const;
};

/// delta + iid N(0, sigma^2) per coordinate.
ParamVector poison_delta(const ParamVector& delta, double sigma, std::uint64_t seed);

/// Score a colluding committee member reports: Uniform[0.90, 1.00] for a
/// malicious update, otherwise the truthful score (0 with suppress_honest).
double collusion_score(bool is_malicious_update, double honest_score, std::uint64_t seed,
                       bool suppress_honest = false);

struct AttackAnalysisQuery {
    std::uint64_t nodes = 0;       // A, participating nodes
    double committee_fraction = 0;  // p
    double malicious_fraction = 0;  // q

    /// M = floor(A p)
    [[nodiscard]] std::uint64_t committee_seats() const;
    /// K = floor(A q)
    [[nodiscard]] std::uint64_t malicious_nodes() const;
};

/// P[X >= floor(M/2) + 1] for X ~ Hypergeometric(A, K, M): the chance that a
/// uniformly drawn committee of M seats from A nodes, K of them malicious, has
/// a strict malicious majority. Throws invalid-argument when M == 0.
double attack_success_prob(const AttackAnalysisQuery& query);

/// ln C(n, r) via lgamma.
double log_binomial(std::uint64_t n, std::uint64_t r);

struct SweepPoint {
    double p = 0.0;
    double q = 0.0;
    double probability = 0.0;
};

/// Row-major over p then q.
std::vector<SweepPoint> sweep_success_prob(std::uint64_t nodes, std::span<const double> p_grid,
                                           std::span<const double> q_grid);

/// Header "p,q,probability", probabilities to 12 significant digits.
std::string sweep_to_csv(std::span<const SweepPoint> points);

/// %.12g formatting shared by the sweep CSV and the CLI.
std::string format_probability(double value);

}  // namespace bflc
