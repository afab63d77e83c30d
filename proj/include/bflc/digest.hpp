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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bflc {

/// 256-bit SHA-256 digest.
struct Digest {
    std::array<std::uint8_t, 32> bytes{};

    static Digest zero() { return Digest{}; }
    [[nodiscard]] bool is_zero() const;
    [[nodiscard]] std::string hex() const;
    static std::optional<Digest> from_hex(std::string_view hex);

    friend bool operator==(const Digest&, const Digest&) = default;
};

Digest sha256(std::span<const std::uint8_t> data);

/// Little-endian canonical byte writer used for every digest input.
class CanonicalWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u64(std::uint64_t v);
    void f64(double v);
    void f64s(std::span<const double> vs);
    void digest(const Digest& d);

    [[nodiscard]] std::span<const std::uint8_t> bytes() const { return buf_; }
    [[nodiscard]] Digest finish() const { return sha256(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

}  // namespace bflc
