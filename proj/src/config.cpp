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
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "bflc/error.hpp"
#include "bflc/harness.hpp"

namespace bflc {

namespace {

using nlohmann::json;

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

/// Walks the document and reports errors with the line of the offending key.
class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    [[noreturn]] void error(const std::string& key, const std::string& why) const {
        const auto pos = text_.find("\"" + key + "\"");
        const std::size_t line = pos == std::string_view::npos ? 1 : line_of_offset(text_, pos);
        fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + key + ": " + why);
    }

    void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) const {
        if (!obj.is_object()) {
            error(where, "must be an object");
        }
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [key, value] : obj.items()) {
            if (!ok.contains(key)) {
                error(key, "unknown key" + (where.empty() ? std::string() : " in " + where));
            }
        }
    }

    template <class T>
    void number(const json& obj, const char* key, T& out) const {
        if (!obj.contains(key)) return;
        const auto& v = obj[key];
        if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<long long>() < 0)) {
                error(key, std::is_unsigned_v<T> ? "must be a non-negative integer" : "must be an integer");
            }
            out = v.get<T>();
        } else {
            if (!v.is_number()) error(key, "must be a number");
            out = v.get<T>();
        }
    }

    void boolean(const json& obj, const char* key, bool& out) const {
        if (!obj.contains(key)) return;
        if (!obj[key].is_boolean()) error(key, "must be true or false");
        out = obj[key].get<bool>();
    }

    std::string string(const json& obj, const char* key) const {
        if (!obj[key].is_string()) error(key, "must be a string");
        return obj[key].get<std::string>();
    }

private:
    std::string_view text_;
};

Framework parse_framework(const Reader& r, const std::string& name) {
    if (name == "bflc") return Framework::Bflc;
    if (name == "basic_fl") return Framework::BasicFl;
    if (name == "cwmed") return Framework::CwMed;
    if (name == "standalone") return Framework::StandAlone;
    r.error("frameworks", "unknown framework \"" + name + "\" (bflc, basic_fl, cwmed, standalone)");
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        fail(ErrorCode::ParseError, "line " + std::to_string(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)) +
                                        ": malformed JSON (" + e.what() + ")");
    }
    const Reader r(text);
    r.check_keys(doc, "",
                 {"n_nodes", "active_fraction", "committee_fraction", "rounds", "k_updates_per_round", "election",
                  "qualification", "aggregator", "attack", "data", "partition", "train", "reward_pool",
                  "permission_fee", "treasury", "genesis_committee", "max_round_retries", "frameworks", "seed"});

    ExperimentConfig cfg;
    r.number(doc, "n_nodes", cfg.n_nodes);
    r.number(doc, "active_fraction", cfg.active_fraction);
    r.number(doc, "committee_fraction", cfg.committee_fraction);
    r.number(doc, "rounds", cfg.rounds);
    r.number(doc, "k_updates_per_round", cfg.k_updates_per_round);
    r.number(doc, "reward_pool", cfg.reward_pool);
    r.number(doc, "permission_fee", cfg.permission_fee);
    r.number(doc, "treasury", cfg.treasury);
    r.number(doc, "max_round_retries", cfg.max_round_retries);
    r.number(doc, "seed", cfg.seed);

    if (doc.contains("election")) {
        const auto v = r.string(doc, "election");
        if (v == "by_score") cfg.election = ElectionStrategy::Variant::ByScore;
        else if (v == "random") cfg.election = ElectionStrategy::Variant::Random;
        else r.error("election", "must be \"by_score\" or \"random\"");
    }
    if (doc.contains("aggregator")) {
        const auto v = r.string(doc, "aggregator");
        if (v == "mean") cfg.aggregator = Aggregator::Mean;
        else if (v == "cwmed") cfg.aggregator = Aggregator::CwMed;
        else r.error("aggregator", "must be \"mean\" or \"cwmed\"");
    }
    if (doc.contains("qualification")) {
        const auto& q = doc["qualification"];
        r.check_keys(q, "qualification", {"mode", "theta", "rho"});
        if (q.contains("mode")) {
            const auto v = r.string(q, "mode");
            if (v == "absolute") cfg.qualification.mode = QualificationPolicy::Mode::AbsoluteThreshold;
            else if (v == "relative") cfg.qualification.mode = QualificationPolicy::Mode::RelativeToGlobal;
            else if (v == "combined") cfg.qualification.mode = QualificationPolicy::Mode::Combined;
            else r.error("mode", "must be \"absolute\", \"relative\" or \"combined\"");
        }
        r.number(q, "theta", cfg.qualification.theta);
        r.number(q, "rho", cfg.qualification.rho);
    }
    if (doc.contains("attack")) {
        const auto& a = doc["attack"];
        r.check_keys(a, "attack", {"malicious_fraction", "noise_sigma", "sigma_mode", "collusion", "suppress_honest"});
        r.number(a, "malicious_fraction", cfg.attack.malicious_fraction);
        r.number(a, "noise_sigma", cfg.attack.noise_sigma);
        r.boolean(a, "collusion", cfg.attack.collusion);
        r.boolean(a, "suppress_honest", cfg.attack.suppress_honest);
        if (a.contains("sigma_mode")) {
            const auto v = r.string(a, "sigma_mode");
            if (v == "absolute") cfg.sigma_mode = SigmaMode::Absolute;
            else if (v == "honest_scale") cfg.sigma_mode = SigmaMode::HonestScale;
            else r.error("sigma_mode", "must be \"absolute\" or \"honest_scale\"");
        }
    }
    if (doc.contains("data")) {
        const auto& d = doc["data"];
        r.check_keys(d, "data", {"csv", "n_samples", "features", "classes", "class_separation", "test_fraction"});
        if (d.contains("csv")) cfg.data.csv_path = r.string(d, "csv");
        r.number(d, "n_samples", cfg.data.n_samples);
        r.number(d, "features", cfg.data.features);
        r.number(d, "classes", cfg.data.classes);
        r.number(d, "class_separation", cfg.data.class_separation);
        r.number(d, "test_fraction", cfg.data.test_fraction);
    }
    if (doc.contains("partition")) {
        const auto& p = doc["partition"];
        r.check_keys(p, "partition", {"scheme", "alpha", "shards_per_node"});
        if (p.contains("scheme")) {
            const auto v = r.string(p, "scheme");
            if (v == "dirichlet") cfg.partition.kind = PartitionScheme::Kind::Dirichlet;
            else if (v == "shards") cfg.partition.kind = PartitionScheme::Kind::Shards;
            else r.error("scheme", "must be \"dirichlet\" or \"shards\"");
        }
        r.number(p, "alpha", cfg.partition.alpha);
        r.number(p, "shards_per_node", cfg.partition.shards_per_node);
    }
    if (doc.contains("train")) {
        const auto& t = doc["train"];
        r.check_keys(t, "train", {"epochs", "learning_rate", "batch_size", "weight_decay"});
        r.number(t, "epochs", cfg.train.epochs);
        r.number(t, "learning_rate", cfg.train.learning_rate);
        r.number(t, "batch_size", cfg.train.batch_size);
        r.number(t, "weight_decay", cfg.train.weight_decay);
    }
    if (doc.contains("genesis_committee")) {
        const auto& g = doc["genesis_committee"];
        if (g.is_string()) {
            const auto v = g.get<std::string>();
            if (v == "random") cfg.genesis = GenesisCommittee::Random;
            else if (v == "honest") cfg.genesis = GenesisCommittee::Honest;
            else r.error("genesis_committee", "must be \"random\", \"honest\" or a list of node ids");
        } else if (g.is_array()) {
            cfg.genesis = GenesisCommittee::Explicit;
            for (const auto& id : g) {
                if (!id.is_number_unsigned()) r.error("genesis_committee", "node ids must be non-negative integers");
                cfg.genesis_members.push_back(NodeId{id.get<std::uint64_t>()});
            }
        } else {
            r.error("genesis_committee", "must be \"random\", \"honest\" or a list of node ids");
        }
    }
    if (doc.contains("frameworks")) {
        const auto& f = doc["frameworks"];
        if (!f.is_array()) r.error("frameworks", "must be a list");
        cfg.frameworks.clear();
        for (const auto& name : f) {
            if (!name.is_string()) r.error("frameworks", "entries must be strings");
            cfg.frameworks.push_back(parse_framework(r, name.get<std::string>()));
        }
    }

    try {
        cfg.validate();
    } catch (const Error& e) {
        // Point at the first key the message names, if any.
        const std::string what = e.what();
        for (const auto& [key, value] : doc.items()) {
            if (what.find(key) != std::string::npos) {
                r.error(key, what);
            }
        }
        fail(ErrorCode::ParseError, "line 1: " + what);
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::ParseError, "cannot open config " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    ExperimentConfig cfg = parse_config(ss.str());
    if (cfg.data.csv_path && cfg.data.csv_path->is_relative()) {
        cfg.data.csv_path = path.parent_path() / *cfg.data.csv_path;
    }
    return cfg;
}

}  // namespace bflc
