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

// JSON-lines chain persistence: one block per line,
//   {"index":..,"round":..,"kind":"model"|"update","prev_digest":"<hex>",
//    "payload_digest":"<hex>","payload":{"model":[..]} | {"delta":[..],"uploader":..,"score":..} | null}
// A null payload marks a pruned block. Digests are over the canonical binary
// form, never the JSON text.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "bflc/chain.hpp"

namespace bflc {

std::string to_jsonl(const Chain& chain);

/// Parse a chain file. k is inferred from the first model block past genesis;
/// for a chain still in round 0 pass `k` explicitly, otherwise the smallest k
/// consistent with the blocks present is used. Throws parse-error.
Chain from_jsonl(std::string_view text, std::optional<std::uint64_t> k = std::nullopt);

void save_chain(const Chain& chain, const std::filesystem::path& path);
Chain load_chain(const std::filesystem::path& path, std::optional<std::uint64_t> k = std::nullopt);

}  // namespace bflc
