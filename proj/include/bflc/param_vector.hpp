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

#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace bflc {

/// Extents of the tensors packed into a ParamVector, in storage order. A
/// softmax model with d features and C classes is {C*d, C}: weights then bias.
struct ParamShape {
    std::vector<std::size_t> tensors;

    static ParamShape flat(std::size_t n) { return ParamShape{{n}}; }

    [[nodiscard]] std::size_t size() const {
        return std::accumulate(tensors.begin(), tensors.end(), std::size_t{0});
    }
    [[nodiscard]] bool empty() const { return size() == 0; }

    friend bool operator==(const ParamShape&, const ParamShape&) = default;
};

/// Flat real-valued model parameters: a global model or an update delta.
/// Invariants: all values finite, shape.size() == values.size().
struct ParamVector {
    std::vector<double> values;
    ParamShape shape;

    ParamVector() = default;
    explicit ParamVector(std::vector<double> v) : values(std::move(v)), shape(ParamShape::flat(values.size())) {}
    ParamVector(std::vector<double> v, ParamShape s) : values(std::move(v)), shape(std::move(s)) {}

    static ParamVector zeros(const ParamShape& s) { return ParamVector(std::vector<double>(s.size(), 0.0), s); }

    [[nodiscard]] std::size_t size() const { return values.size(); }
    [[nodiscard]] bool empty() const { return values.empty(); }
    [[nodiscard]] std::span<const double> view() const { return values; }
    [[nodiscard]] std::span<double> view() { return values; }

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    /// Shape-consistent and every value finite.
    [[nodiscard]] bool valid() const;

    /// Equality is over values only; shape is descriptive.
    friend bool operator==(const ParamVector& a, const ParamVector& b) { return a.values == b.values; }
};

ParamVector operator+(const ParamVector& a, const ParamVector& b);
ParamVector operator-(const ParamVector& a, const ParamVector& b);

}  // namespace bflc
