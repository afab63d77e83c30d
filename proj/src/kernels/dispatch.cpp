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

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <string>

#include "bflc/error.hpp"
#include "bflc/kernels.hpp"

namespace bflc::kernels {

namespace {

constexpr KernelTable kScalar{scalar::dot, scalar::axpy, scalar::scale, scalar::subtract, scalar::add};
constexpr KernelTable kAvx2{avx2::dot, avx2::axpy, avx2::scale, avx2::subtract, avx2::add};

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

std::atomic<Isa>& active_slot() {
    static std::atomic<Isa> slot{detect()};
    return slot;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
    return isa == Isa::Avx2 ? "avx2" : "scalar";
}

bool supported(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return true;
        case Isa::Avx2: return avx2::compiled() && cpu_has_avx2();
    }
    return false;
}

Isa detect() {
    if (const char* env = std::getenv("BFLC_SIMD"); env != nullptr && std::string(env) == "scalar") {
        return Isa::Scalar;
    }
    return supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

const KernelTable& table(Isa isa) {
    return isa == Isa::Avx2 ? kAvx2 : kScalar;
}

Isa active() { return active_slot().load(std::memory_order_relaxed); }

void set_active(Isa isa) {
    require(supported(isa), ErrorCode::InvalidArgument,
            "kernel ISA " + std::string(to_string(isa)) + " not supported here");
    active_slot().store(isa, std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    return table(active()).dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    table(active()).axpy(alpha, x.data(), y.data(), x.size());
}

void scale(double alpha, std::span<double> x) { table(active()).scale(alpha, x.data(), x.size()); }

void subtract(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    assert(a.size() == b.size() && a.size() == out.size());
    table(active()).subtract(a.data(), b.data(), out.data(), a.size());
}

void add(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    assert(a.size() == b.size() && a.size() == out.size());
    table(active()).add(a.data(), b.data(), out.data(), a.size());
}

}  // namespace bflc::kernels
