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

#include "bflc/learning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "bflc/error.hpp"
#include "bflc/kernels.hpp"
#include "bflc/random.hpp"

namespace bflc {

namespace {

struct ModelView {
    std::size_t d;
    std::size_t c;
    std::span<const double> weights;
    std::span<const double> bias;
};

ModelView view_of(const ParamVector& model, const Dataset& data) {
    require(data.features > 0 && data.classes > 0, ErrorCode::InvalidArgument, "dataset has no shape");
    const std::size_t d = data.features;
    const std::size_t c = data.classes;
    require(model.size() == c * d + c, ErrorCode::InvalidArgument,
            "model has " + std::to_string(model.size()) + " parameters, dataset needs " +
                std::to_string(c * d + c));
    return {d, c, model.view().subspan(0, c * d), model.view().subspan(c * d, c)};
}

void logits(const ModelView& m, std::span<const double> row, std::span<double> out) {
    for (std::size_t k = 0; k < m.c; ++k) {
        out[k] = kernels::dot(m.weights.subspan(k * m.d, m.d), row) + m.bias[k];
    }
}

/// In-place softmax; returns log-sum-exp.
double softmax(std::span<double> z) {
    const double top = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (auto& v : z) {
        v = std::exp(v - top);
        total += v;
    }
    for (auto& v : z) {
        v /= total;
    }
    return top + std::log(total);
}

/// Adds the summed (not averaged) gradient over `rows` into `grad`.
void accumulate_gradient(const ModelView& m, const Dataset& data, std::span<const std::size_t> rows,
                         std::span<double> grad, std::vector<double>& scratch) {
    scratch.resize(m.c);
    auto grad_w = grad.subspan(0, m.c * m.d);
    auto grad_b = grad.subspan(m.c * m.d, m.c);
    for (std::size_t r : rows) {
        const auto row = data.row(r);
        logits(m, row, scratch);
        softmax(scratch);
        scratch[static_cast<std::size_t>(data.labels[r])] -= 1.0;
        for (std::size_t k = 0; k < m.c; ++k) {
            kernels::axpy(scratch[k], row, grad_w.subspan(k * m.d, m.d));
            grad_b[k] += scratch[k];
        }
    }
}

void check_deltas(const ParamVector& global, std::span<const ParamVector> deltas) {
    require(!deltas.empty(), ErrorCode::InvalidArgument, "no deltas to aggregate");
    for (const auto& d : deltas) {
        require(d.size() == global.size(), ErrorCode::InvalidArgument, "delta length differs from global model");
    }
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.features = features;
    out.classes = classes;
    out.x.reserve(indices.size() * features);
    out.labels.reserve(indices.size());
    for (std::size_t i : indices) {
        const auto r = row(i);
        out.x.insert(out.x.end(), r.begin(), r.end());
        out.labels.push_back(labels[i]);
    }
    return out;
}

void Dataset::validate() const {
    require(features > 0, ErrorCode::InvalidArgument, "dataset has zero features");
    require(x.size() == labels.size() * features, ErrorCode::InvalidArgument, "feature matrix size mismatch");
    for (int y : labels) {
        require(y >= 0 && static_cast<std::size_t>(y) < classes, ErrorCode::InvalidArgument,
                "label " + std::to_string(y) + " outside [0, " + std::to_string(classes) + ")");
    }
}

ParamVector init_model(std::uint64_t seed, const ModelSpec& spec, double init_scale) {
    require(spec.features > 0 && spec.classes > 0, ErrorCode::InvalidArgument, "model shape is empty");
    ParamVector out = ParamVector::zeros(spec.shape());
    Rng rng(derive_seed(seed, 0x1417));
    for (std::size_t i = 0; i < spec.classes * spec.features; ++i) {
        out[i] = init_scale * rng.normal();
    }
    return out;
}

double cross_entropy(const ParamVector& model, const Dataset& data) {
    require(!data.empty(), ErrorCode::InvalidArgument, "empty dataset");
    data.validate();
    const auto m = view_of(model, data);
    std::vector<double> z(m.c);
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        logits(m, data.row(i), z);
        const double label_logit = z[static_cast<std::size_t>(data.labels[i])];
        total += softmax(z) - label_logit;
    }
    return total / static_cast<double>(data.size());
}

ParamVector cross_entropy_gradient(const ParamVector& model, const Dataset& data,
                                   std::span<const std::size_t> rows) {
    require(!rows.empty(), ErrorCode::InvalidArgument, "no rows");
    data.validate();
    const auto m = view_of(model, data);
    ParamVector grad = ParamVector::zeros(model.shape);
    std::vector<double> scratch;
    accumulate_gradient(m, data, rows, grad.view(), scratch);
    kernels::scale(1.0 / static_cast<double>(rows.size()), grad.view());
    return grad;
}

ParamVector local_train(const ParamVector& global, const Dataset& data, const TrainConfig& cfg) {
    require(!data.empty(), ErrorCode::InvalidArgument, "empty dataset");
    require(cfg.batch_size > 0, ErrorCode::InvalidArgument, "batch_size must be positive");
    require(cfg.learning_rate >= 0.0 && std::isfinite(cfg.learning_rate), ErrorCode::InvalidArgument,
            "learning_rate must be finite and non-negative");
    require(cfg.weight_decay >= 0.0 && std::isfinite(cfg.weight_decay), ErrorCode::InvalidArgument,
            "weight_decay must be finite and non-negative");
    data.validate();
    view_of(global, data);

    ParamVector model = global;
    ParamVector grad = ParamVector::zeros(global.shape);
    std::vector<double> scratch;
    std::vector<std::size_t> order(data.size());
    Rng rng(derive_seed(cfg.seed, 0x7a11));
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const auto count = std::min(cfg.batch_size, order.size() - start);
            const auto rows = std::span<const std::size_t>(order).subspan(start, count);
            std::fill(grad.values.begin(), grad.values.end(), 0.0);
            accumulate_gradient(view_of(model, data), data, rows, grad.view(), scratch);
            if (cfg.weight_decay > 0.0) {
                kernels::scale(1.0 - cfg.learning_rate * cfg.weight_decay,
                               std::span<double>(model.values).first(data.features * data.classes));
            }
            kernels::axpy(-cfg.learning_rate / static_cast<double>(count), grad.view(), model.view());
        }
    }
    return model - global;
}

double evaluate(const ParamVector& model, const Dataset& data) {
    require(!data.empty(), ErrorCode::InvalidArgument, "empty dataset");
    const auto m = view_of(model, data);
    std::vector<double> z(m.c);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        logits(m, data.row(i), z);
        // max_element returns the first maximum: ties go to the lowest class.
        const auto predicted = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
        correct += predicted == data.labels[i] ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

ParamVector aggregate_mean(const ParamVector& global, std::span<const ParamVector> deltas) {
    check_deltas(global, deltas);
    ParamVector sum = ParamVector::zeros(global.shape);
    for (const auto& d : deltas) {
        kernels::axpy(1.0, d.view(), sum.view());
    }
    ParamVector out = global;
    kernels::axpy(1.0 / static_cast<double>(deltas.size()), sum.view(), out.view());
    return out;
}

double median(std::vector<double> values) {
    require(!values.empty(), ErrorCode::InvalidArgument, "median of nothing");
    const auto n = values.size();
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(values.begin(), mid, values.end());
    if (n % 2 == 1) {
        return *mid;
    }
    const double upper = *mid;
    const double lower = *std::max_element(values.begin(), mid);
    return 0.5 * (lower + upper);
}

ParamVector aggregate_cwmed(const ParamVector& global, std::span<const ParamVector> deltas) {
    check_deltas(global, deltas);
    ParamVector out = global;
    std::vector<double> column(deltas.size());
    for (std::size_t j = 0; j < global.size(); ++j) {
        for (std::size_t i = 0; i < deltas.size(); ++i) {
            column[i] = deltas[i][j];
        }
        out[j] += median(column);
    }
    return out;
}

Dataset generate_synthetic(std::uint64_t seed, std::size_t n_samples, std::size_t features, std::size_t classes,
                           double class_separation) {
    require(classes >= 2, ErrorCode::InvalidArgument, "need at least 2 classes");
    require(features >= 1, ErrorCode::InvalidArgument, "need at least 1 feature");
    require(n_samples >= classes, ErrorCode::InvalidArgument, "need at least one sample per class");
    require(class_separation >= 0.0, ErrorCode::InvalidArgument, "class_separation must be non-negative");

    Rng rng(derive_seed(seed, 0x5e17));
    std::vector<double> means(classes * features);
    const double unit = 1.0 / std::sqrt(static_cast<double>(features));
    for (auto& v : means) {
        v = class_separation * unit * rng.normal();
    }

    std::vector<int> labels(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        labels[i] = static_cast<int>(i % classes);
    }
    rng.shuffle(labels);

    Dataset out;
    out.features = features;
    out.classes = classes;
    out.labels = std::move(labels);
    out.x.resize(n_samples * features);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const auto y = static_cast<std::size_t>(out.labels[i]);
        for (std::size_t j = 0; j < features; ++j) {
            out.x[i * features + j] = means[y * features + j] + rng.normal();
        }
    }
    return out;
}

Dataset load_csv(std::istream& in, std::size_t classes) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::ParseError, "CSV is empty");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
            header.push_back(cell);
        }
    }
    require(header.size() >= 2 && header.back() == "label", ErrorCode::ParseError,
            "CSV header must be f0..f{d-1},label");
    const std::size_t d = header.size() - 1;
    for (std::size_t j = 0; j < d; ++j) {
        require(header[j] == "f" + std::to_string(j), ErrorCode::ParseError,
                "CSV header column " + std::to_string(j) + " must be f" + std::to_string(j));
    }

    Dataset out;
    out.features = d;
    int max_label = -1;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            const auto where = "CSV line " + std::to_string(line_no) + " column " + std::to_string(col);
            if (col < d) {
                std::size_t used = 0;
                double v = 0.0;
                try {
                    v = std::stod(cell, &used);
                } catch (const std::exception&) {
                    fail(ErrorCode::ParseError, where + ": not a number");
                }
                while (used < cell.size() && (cell[used] == ' ' || cell[used] == '\r')) ++used;
                require(used == cell.size(), ErrorCode::ParseError, where + ": not a number");
                require(std::isfinite(v), ErrorCode::ParseError, where + ": not finite");
                out.x.push_back(v);
            } else if (col == d) {
                std::size_t used = 0;
                long long y = -1;
                try {
                    y = std::stoll(cell, &used);
                } catch (const std::exception&) {
                    fail(ErrorCode::ParseError, where + ": label is not an integer");
                }
                while (used < cell.size() && (cell[used] == ' ' || cell[used] == '\r')) ++used;
                require(used == cell.size() && y >= 0 && y <= 1'000'000, ErrorCode::ParseError,
                        where + ": label is not a non-negative integer");
                out.labels.push_back(static_cast<int>(y));
                max_label = std::max(max_label, static_cast<int>(y));
            }
            ++col;
        }
        require(col == d + 1, ErrorCode::ParseError,
                "CSV line " + std::to_string(line_no) + ": expected " + std::to_string(d + 1) + " columns");
    }
    out.classes = classes != 0 ? classes : static_cast<std::size_t>(max_label + 1);
    require(!out.empty(), ErrorCode::ParseError, "CSV has no rows");
    out.validate();
    return out;
}

Dataset load_csv(const std::filesystem::path& path, std::size_t classes) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::ParseError, "cannot open " + path.string());
    return load_csv(in, classes);
}

}  // namespace bflc
