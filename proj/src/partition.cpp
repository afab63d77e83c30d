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

#include <algorithm>
#include <numeric>

#include "bflc/error.hpp"
#include "bflc/harness.hpp"
#include "bflc/random.hpp"

namespace bflc {

namespace {

/// Split `total` into integer counts proportional to `weights` by largest
/// remainder; ties in the remainder go to the lower position.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights) {
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::size_t> counts(weights.size(), 0);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t used = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double exact = sum > 0.0 ? static_cast<double>(total) * weights[i] / sum
                                       : static_cast<double>(total) / static_cast<double>(weights.size());
        counts[i] = static_cast<std::size_t>(exact);
        used += counts[i];
        remainders.emplace_back(exact - static_cast<double>(counts[i]), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t j = 0; used < total; ++j, ++used) {
        ++counts[remainders[j % remainders.size()].second];
    }
    return counts;
}

/// Move single rows from the largest partitions into empty ones.
void fill_empty(std::vector<std::vector<std::size_t>>& parts) {
    for (auto& part : parts) {
        if (!part.empty()) {
            continue;
        }
        auto donor = std::max_element(parts.begin(), parts.end(),
                                      [](const auto& a, const auto& b) { return a.size() < b.size(); });
        part.push_back(donor->back());
        donor->pop_back();
    }
}

}  // namespace

std::vector<Dataset> partition_data(const Dataset& data, std::size_t n_nodes, const PartitionScheme& scheme,
                                    std::uint64_t seed) {
    require(n_nodes >= 1, ErrorCode::InvalidArgument, "need at least one node");
    require(!data.empty(), ErrorCode::InvalidArgument, "dataset is empty");
    require(n_nodes <= data.size(), ErrorCode::InvalidArgument,
            std::to_string(n_nodes) + " nodes but only " + std::to_string(data.size()) + " samples");
    data.validate();

    std::vector<std::vector<std::size_t>> parts(n_nodes);
    Rng rng(derive_seed(seed, 0x9a27));

    if (scheme.kind == PartitionScheme::Kind::Dirichlet) {
        require(scheme.alpha > 0.0, ErrorCode::InvalidArgument, "Dirichlet alpha must be positive");
        std::vector<std::vector<double>> proportions(n_nodes);
        for (auto& p : proportions) {
            p = rng.dirichlet(scheme.alpha, data.classes);
        }
        std::vector<std::vector<std::size_t>> by_class(data.classes);
        for (std::size_t i = 0; i < data.size(); ++i) {
            by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);
        }
        for (std::size_t c = 0; c < data.classes; ++c) {
            auto& rows = by_class[c];
            rng.shuffle(rows);
            std::vector<double> weights(n_nodes);
            for (std::size_t n = 0; n < n_nodes; ++n) {
                weights[n] = proportions[n][c];
            }
            const auto counts = apportion(rows.size(), weights);
            std::size_t offset = 0;
            for (std::size_t n = 0; n < n_nodes; ++n) {
                parts[n].insert(parts[n].end(), rows.begin() + static_cast<std::ptrdiff_t>(offset),
                                rows.begin() + static_cast<std::ptrdiff_t>(offset + counts[n]));
                offset += counts[n];
            }
        }
    } else {
        require(scheme.shards_per_node >= 1, ErrorCode::InvalidArgument, "shards_per_node must be positive");
        std::vector<std::size_t> order(data.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return data.labels[a] < data.labels[b]; });
        const std::size_t n_shards = n_nodes * scheme.shards_per_node;
        std::vector<std::size_t> shard_ids(n_shards);
        std::iota(shard_ids.begin(), shard_ids.end(), std::size_t{0});
        rng.shuffle(shard_ids);
        for (std::size_t j = 0; j < n_shards; ++j) {
            const std::size_t shard = shard_ids[j];
            const std::size_t begin = shard * data.size() / n_shards;
            const std::size_t end = (shard + 1) * data.size() / n_shards;
            auto& part = parts[j / scheme.shards_per_node];
            part.insert(part.end(), order.begin() + static_cast<std::ptrdiff_t>(begin),
                        order.begin() + static_cast<std::ptrdiff_t>(end));
        }
    }

    fill_empty(parts);
    std::vector<Dataset> out;
    out.reserve(n_nodes);
    for (auto& part : parts) {
        std::sort(part.begin(), part.end());
        out.push_back(data.subset(part));
    }
    return out;
}

}  // namespace bflc
