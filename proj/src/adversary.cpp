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

#include "bflc/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "bflc/error.hpp"
#include "bflc/random.hpp"

namespace bflc {

namespace {

/// floor(n * fraction), tolerant of products that land a few ulps under an
/// integer (0.57 * 100 == 56.99999999999999).
std::uint64_t floor_product(std::uint64_t n, double fraction) {
    const double x = static_cast<double>(n) * fraction;
    return static_cast<std::uint64_t>(std::floor(x + 1e-9 * std::max(1.0, x)));
}

}  // namespace

void AttackConfig::validate() const {
    require(malicious_fraction >= 0.0 && malicious_fraction <= 1.0, ErrorCode::InvalidArgument,
            "malicious_fraction must lie in [0,1]");
    require(noise_sigma >= 0.0 && std::isfinite(noise_sigma), ErrorCode::InvalidArgument,
            "noise_sigma must be finite and non-negative");
}

ParamVector poison_delta(const ParamVector& delta, double sigma, std::uint64_t seed) {
    require(sigma >= 0.0 && std::isfinite(sigma), ErrorCode::InvalidArgument, "sigma must be non-negative");
    ParamVector out = delta;
    if (sigma == 0.0) {
        return out;
    }
    Rng rng(derive_seed(seed, 0x901507));
    for (auto& v : out.values) {
        v += sigma * rng.normal();
    }
    return out;
}

double collusion_score(bool is_malicious_update, double honest_score, std::uint64_t seed, bool suppress_honest) {
    if (is_malicious_update) {
        Rng rng(derive_seed(seed, 0xc011));
        return rng.uniform(0.90, 1.00);
    }
    return suppress_honest ? 0.0 : honest_score;
}

std::uint64_t AttackAnalysisQuery::committee_seats() const { return floor_product(nodes, committee_fraction); }

std::uint64_t AttackAnalysisQuery::malicious_nodes() const { return floor_product(nodes, malicious_fraction); }

double log_binomial(std::uint64_t n, std::uint64_t r) {
    if (r > n) {
        return -INFINITY;
    }
    const auto nd = static_cast<double>(n);
    const auto rd = static_cast<double>(r);
    return std::lgamma(nd + 1.0) - std::lgamma(rd + 1.0) - std::lgamma(nd - rd + 1.0);
}

double attack_success_prob(const AttackAnalysisQuery& query) {
    require(query.nodes >= 1, ErrorCode::InvalidArgument, "need at least one node");
    require(query.committee_fraction > 0.0 && query.committee_fraction <= 1.0, ErrorCode::InvalidArgument,
            "committee fraction must lie in (0,1]");
    require(query.malicious_fraction >= 0.0 && query.malicious_fraction <= 1.0, ErrorCode::InvalidArgument,
            "malicious fraction must lie in [0,1]");
    const std::uint64_t a = query.nodes;
    const std::uint64_t m = query.committee_seats();
    const std::uint64_t k = query.malicious_nodes();
    require(m >= 1, ErrorCode::InvalidArgument, "floor(A*p) is zero: no committee seats");
    require(m <= a && k <= a, ErrorCode::InvalidArgument, "fractions exceed the population");

    const std::uint64_t need = m / 2 + 1;
    const std::uint64_t hi = std::min(k, m);
    if (need > hi) {
        return 0.0;
    }
    // Support of X is [max(0, M-(A-K)), min(K, M)].
    const std::uint64_t lo_support = m > a - k ? m - (a - k) : 0;
    if (need <= lo_support) {
        return 1.0;
    }
    // Normalise by the summed support rather than C(A, M): the lgamma error in
    // the normaliser then cancels, and the smaller tail is never found by
    // subtracting something close to 1.
    std::vector<double> logs;
    logs.reserve(hi - lo_support + 1);
    for (std::uint64_t x = lo_support; x <= hi; ++x) {
        logs.push_back(log_binomial(k, x) + log_binomial(a - k, m - x));
    }
    const double peak = *std::max_element(logs.begin(), logs.end());
    double lower = 0.0, upper = 0.0;
    for (std::uint64_t x = lo_support; x <= hi; ++x) {
        (x < need ? lower : upper) += std::exp(logs[x - lo_support] - peak);
    }
    const double total = lower + upper;
    const double p = upper <= lower ? upper / total : 1.0 - lower / total;
    return std::clamp(p, 0.0, 1.0);
}

std::vector<SweepPoint> sweep_success_prob(std::uint64_t nodes, std::span<const double> p_grid,
                                           std::span<const double> q_grid) {
    require(!p_grid.empty() && !q_grid.empty(), ErrorCode::InvalidArgument, "sweep grids must be nonempty");
    std::vector<SweepPoint> out;
    out.reserve(p_grid.size() * q_grid.size());
    for (double p : p_grid) {
        for (double q : q_grid) {
            out.push_back({p, q, attack_success_prob({nodes, p, q})});
        }
    }
    return out;
}

std::string format_probability(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

std::string sweep_to_csv(std::span<const SweepPoint> points) {
    std::string out = "p,q,probability\n";
    for (const auto& pt : points) {
        out += format_probability(pt.p) + "," + format_probability(pt.q) + "," + format_probability(pt.probability) + "\n";
    }
    return out;
}

}  // namespace bflc
