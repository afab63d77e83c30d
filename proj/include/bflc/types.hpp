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

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>

namespace bflc {

/// Opaque node identifier; doubles as the uploader address on chain.
struct NodeId {
    std::uint64_t value = 0;

    constexpr NodeId() = default;
    constexpr explicit NodeId(std::uint64_t v) : value(v) {}

    friend constexpr auto operator<=>(const NodeId&, const NodeId&) = default;
    friend std::ostream& operator<<(std::ostream& os, NodeId id) { return os << id.value; }
};

}  // namespace bflc

template <>
struct std::hash<bflc::NodeId> {
    std::size_t operator()(bflc::NodeId id) const noexcept { return std::hash<std::uint64_t>{}(id.value); }
};
