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

// Desk-scale learning substrate: multinomial logistic regression with bias
// trained by mini-batch gradient descent, and the aggregation rules.
//
// Parameter layout for d features and C classes: C*d row-major weights
// (row c scores class c) followed by C biases.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "bflc/param_vector.hpp"

namespace bflc {

struct Dataset {
    std::size_t features = 0;
    std::size_t classes = 0;
    std::vector<double> x;  // n * features, row-major
    std::vector<int> labels;

    [[nodiscard]] std::size_t size() const { return labels.size(); }
    [[nodiscard]] bool empty() const { return labels.empty(); }
    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return std::span<const double>(x).subspan(i * features, features);
    }

    /// Rows `indices` in the given order.
    [[nodiscard]] Dataset subset(std::span<const std::size_t> indices) const;

    /// Throws invalid-argument unless every label is in [0, classes) and x is n*features.
    void validate() const;
};

struct ModelSpec {
    std::size_t features = 0;
    std::size_t classes = 0;

    [[nodiscard]] ParamShape shape() const { return ParamShape{{classes * features, classes}}; }
    [[nodiscard]] std::size_t parameter_count() const { return classes * features + classes; }
};

struct TrainConfig {
    std::size_t epochs = 1;
    double learning_rate = 0.1;
    std::size_t batch_size = 32;
    /// L2 penalty on the weight block (biases are not decayed).
    double weight_decay = 0.0;
    std::uint64_t seed = 0;
};

/// Initial weights ~ N(0, init_scale^2), biases zero. Deterministic in seed.
inline constexpr double kInitScale = 0.01;
ParamVector init_model(std::uint64_t seed, const ModelSpec& spec, double init_scale = kInitScale);

/// Mean softmax cross-entropy of `model` over `data`.
double cross_entropy(const ParamVector& model, const Dataset& data);

/// Gradient of cross_entropy() with respect to the parameters, over `rows`.
ParamVector cross_entropy_gradient(const ParamVector& model, const Dataset& data,
                                   std::span<const std::size_t> rows);

/// Train a copy of `global` on `data` and return (trained - global).
ParamVector local_train(const ParamVector& global, const Dataset& data, const TrainConfig& cfg);

/// Fraction of rows whose argmax class (lowest index on ties) equals the label.
double evaluate(const ParamVector& model, const Dataset& data);

/// global + mean(deltas), uniform weights.
ParamVector aggregate_mean(const ParamVector& global, std::span<const ParamVector> deltas);

/// global + coordinate-wise median(deltas); even counts average the middle pair.
ParamVector aggregate_cwmed(const ParamVector& global, std::span<const ParamVector> deltas);

/// Median of a list of reals; even counts average the middle pair.
double median(std::vector<double> values);

/// Gaussian class clusters: class means are `class_separation` times a random
/// unit-variance direction, samples add N(0, I). Labels are balanced.
Dataset generate_synthetic(std::uint64_t seed, std::size_t n_samples, std::size_t features, std::size_t classes,
                           double class_separation);

/// CSV with header f0..f{d-1},label. `classes` of 0 means max label + 1.
Dataset load_csv(std::istream& in, std::size_t classes = 0);
Dataset load_csv(const std::filesystem::path& path, std::size_t classes = 0);

}  // namespace bflc
