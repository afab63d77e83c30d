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

#include "bflc/chain_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "bflc/error.hpp"

namespace bflc {

using nlohmann::json;

namespace {

json header_json(const BlockHeader& h) {
    json j;
    j["index"] = h.index;
    j["round"] = h.round;
    j["kind"] = h.kind == BlockKind::Model ? "model" : "update";
    j["prev_digest"] = h.prev_digest.hex();
    j["payload_digest"] = h.payload_digest.hex();
    return j;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& why) {
    fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + why);
}

Digest parse_digest(const json& j, const char* key, std::size_t line) {
    if (!j.contains(key) || !j[key].is_string()) {
        parse_fail(line, std::string("missing ") + key);
    }
    auto d = Digest::from_hex(j[key].get<std::string>());
    if (!d) {
        parse_fail(line, std::string("malformed ") + key);
    }
    return *d;
}

std::uint64_t parse_u64(const json& j, const char* key, std::size_t line) {
    if (!j.contains(key) || !j[key].is_number_unsigned()) {
        parse_fail(line, std::string("missing or negative ") + key);
    }
    return j[key].get<std::uint64_t>();
}

std::vector<double> parse_values(const json& j, const char* key, std::size_t line) {
    if (!j.contains(key) || !j[key].is_array()) {
        parse_fail(line, std::string("payload missing ") + key);
    }
    std::vector<double> out;
    out.reserve(j[key].size());
    for (const auto& v : j[key]) {
        if (!v.is_number()) {
            parse_fail(line, std::string("non-numeric entry in ") + key);
        }
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

std::string to_jsonl(const Chain& chain) {
    std::string out;
    for (const Block& block : chain.blocks()) {
        json j = header_json(header_of(block));
        if (const auto* m = std::get_if<ModelBlock>(&block)) {
            j["payload"] = {{"model", m->model.values}};
        } else if (const auto* u = std::get_if<UpdateBlock>(&block)) {
            j["payload"] = {{"delta", u->delta.values}, {"uploader", u->uploader.value}, {"score", u->score}};
        } else {
            j["payload"] = nullptr;
        }
        out += j.dump();
        out += '\n';
    }
    return out;
}

Chain from_jsonl(std::string_view text, std::optional<std::uint64_t> k) {
    std::vector<Block> blocks;
    std::optional<std::uint64_t> inferred_k;
    std::optional<std::uint64_t> first_payload_index;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            parse_fail(line_no, e.what());
        }
        if (!j.is_object()) {
            parse_fail(line_no, "block is not a JSON object");
        }
        BlockHeader h;
        h.index = parse_u64(j, "index", line_no);
        h.round = parse_u64(j, "round", line_no);
        const std::string kind = j.value("kind", "");
        if (kind == "model") {
            h.kind = BlockKind::Model;
        } else if (kind == "update") {
            h.kind = BlockKind::Update;
        } else {
            parse_fail(line_no, "kind must be \"model\" or \"update\"");
        }
        h.prev_digest = parse_digest(j, "prev_digest", line_no);
        h.payload_digest = parse_digest(j, "payload_digest", line_no);

        if (h.kind == BlockKind::Model && h.round > 0 && h.index % h.round == 0 && !inferred_k) {
            const auto stride = h.index / h.round;
            if (stride >= 2) {
                inferred_k = stride - 1;
            }
        }

        if (!j.contains("payload")) {
            parse_fail(line_no, "missing payload");
        }
        const json& p = j["payload"];
        if (p.is_null()) {
            blocks.push_back(PrunedBlock{h});
            continue;
        }
        if (!p.is_object()) {
            parse_fail(line_no, "payload must be an object or null");
        }
        if (!first_payload_index) {
            first_payload_index = blocks.size();
        }
        if (h.kind == BlockKind::Model) {
            blocks.push_back(ModelBlock{h, ParamVector(parse_values(p, "model", line_no))});
        } else {
            if (!p.contains("uploader") || !p["uploader"].is_number_unsigned()) {
                parse_fail(line_no, "update payload missing uploader");
            }
            if (!p.contains("score") || !p["score"].is_number()) {
                parse_fail(line_no, "update payload missing score");
            }
            blocks.push_back(UpdateBlock{h, ParamVector(parse_values(p, "delta", line_no)),
                                         NodeId{p["uploader"].get<std::uint64_t>()}, p["score"].get<double>()});
        }
    }
    if (blocks.empty()) {
        fail(ErrorCode::ParseError, "chain file has no blocks");
    }
    if (k && inferred_k && *k != *inferred_k) {
        fail(ErrorCode::ParseError, "given k=" + std::to_string(*k) + " but layout implies k=" +
                                        std::to_string(*inferred_k));
    }
    const std::uint64_t chain_k =
        k ? *k : inferred_k ? *inferred_k : std::max<std::uint64_t>(1, blocks.size() - 1);
    if (chain_k == 0) {
        fail(ErrorCode::ParseError, "k must be positive");
    }
    // Pruned blocks form a prefix; what remains starts at a model block.
    const std::uint64_t pruned_before = first_payload_index ? *first_payload_index / (chain_k + 1) : 0;
    return Chain::from_blocks(chain_k, std::move(blocks), pruned_before);
}

void save_chain(const Chain& chain, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::InvalidArgument, "cannot open " + path.string() + " for writing");
    out << to_jsonl(chain);
}

Chain load_chain(const std::filesystem::path& path, std::optional<std::uint64_t> k) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::ParseError, "cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_jsonl(ss.str(), k);
}

}  // namespace bflc
