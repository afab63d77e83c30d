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

#include "bflc/param_vector.hpp"

#include <algorithm>
#include <cmath>

#include "bflc/error.hpp"
#include "bflc/kernels.hpp"

namespace bflc {

bool ParamVector::valid() const {
    return shape.size() == values.size() &&
           std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

ParamVector operator+(const ParamVector& a, const ParamVector& b) {
    require(a.size() == b.size(), ErrorCode::InvalidArgument, "parameter length mismatch");
    ParamVector out(std::vector<double>(a.size()), a.shape);
    kernels::add(a.view(), b.view(), out.view());
    return out;
}

ParamVector operator-(const ParamVector& a, const ParamVector& b) {
    require(a.size() == b.size(), ErrorCode::InvalidArgument, "parameter length mismatch");
    ParamVector out(std::vector<double>(a.size()), a.shape);
    kernels::subtract(a.view(), b.view(), out.view());
    return out;
}

}  // namespace bflc
