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

// Dense double-precision vector kernels with a scalar reference path and an
// AVX2 path chosen at runtime.
//
// Elementwise kernels (axpy, scale, subtract, add) are bit-identical across
// paths: the AVX2 path uses separate multiply and add, never FMA. dot() is a
// reduction and the AVX2 path sums in four lanes, so it agrees with the scalar
// path to rounding only.

#include <cstddef>
#include <span>
#include <string_view>

namespace bflc::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
    double (*dot)(const double* a, const double* b, std::size_t n);
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    void (*scale)(double alpha, double* x, std::size_t n);
    void (*subtract)(const double* a, const double* b, double* out, std::size_t n);
    void (*add)(const double* a, const double* b, double* out, std::size_t n);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
void subtract(const double* a, const double* b, double* out, std::size_t n);
void add(const double* a, const double* b, double* out, std::size_t n);
}  // namespace scalar

namespace avx2 {
/// False when the library was built without the AVX2 translation unit.
bool compiled() noexcept;
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
void subtract(const double* a, const double* b, double* out, std::size_t n);
void add(const double* a, const double* b, double* out, std::size_t n);
}  // namespace avx2

/// True if this CPU and build can run `isa`.
bool supported(Isa isa) noexcept;

/// Best supported ISA, unless the BFLC_SIMD environment variable is "scalar".
Isa detect();

const KernelTable& table(Isa isa);

/// ISA used by the span wrappers below. Initialized from detect().
Isa active();

/// Switch the dispatch target (tests use this to pin a path). Throws
/// invalid-argument if `isa` is not supported.
void set_active(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void scale(double alpha, std::span<double> x);
void subtract(std::span<const double> a, std::span<const double> b, std::span<double> out);
void add(std::span<const double> a, std::span<const double> b, std::span<double> out);

}  // namespace bflc::kernels
