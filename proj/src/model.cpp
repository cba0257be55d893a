#include "shapfed/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace shapfed {
namespace {

struct Layout {
    std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0, total = 0;
    // For Logistic the "last layer" aliases (w1, b1).
    std::size_t last_w = 0, last_b = 0;
    int last_in = 0;  // fan-in of the last layer (= P)
};

Layout layout_of(const ModelSpec& spec) {
    Layout l;
    const std::size_t d = static_cast<std::size_t>(spec.input_dim);
    const std::size_t m = static_cast<std::size_t>(spec.num_classes);
    if (spec.kind == ModelKind::Logistic) {
        l.w1 = 0;
        l.b1 = m * d;
        l.total = m * d + m;
        l.last_w = l.w1;
        l.last_b = l.b1;
        l.last_in = spec.input_dim;
    } else {
        const std::size_t h = static_cast<std::size_t>(spec.hidden_dim);
        l.w1 = 0;
        l.b1 = h * d;
        l.w2 = l.b1 + h;
        l.b2 = l.w2 + m * h;
        l.total = l.b2 + m;
        l.last_w = l.w2;
        l.last_b = l.b2;
        l.last_in = spec.hidden_dim;
    }
    return l;
}

void check_params(const ParamVector& params, const ModelSpec& spec) {
    spec.validate();
    if (params.size() != spec.param_count()) {
        throw ShapeError("parameter vector has length " + std::to_string(params.size()) +
                         ", spec requires " + std::to_string(spec.param_count()));
    }
}

}  // namespace

int ModelSpec::feature_dim() const {
    return kind == ModelKind::Logistic ? input_dim : hidden_dim;
}

std::size_t ModelSpec::param_count() const {
    return layout_of(*this).total;
}

void ModelSpec::validate() const {
    if (input_dim < 1) throw ConfigError("model input_dim must be >= 1");
    if (num_classes < 2) throw ConfigError("model num_classes must be >= 2");
    if (kind == ModelKind::Mlp && hidden_dim < 1) {
        throw ConfigError("mlp hidden_dim must be >= 1");
    }
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    const Layout l = layout_of(spec);
    ParamVector p(l.total, 0.0);
    std::mt19937_64 rng(seed);
    auto fill_uniform = [&rng](double* w, std::size_t count, int fan_in) {
        const double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-s, s);
        for (std::size_t i = 0; i < count; ++i) w[i] = dist(rng);
    };
    const std::size_t d = static_cast<std::size_t>(spec.input_dim);
    const std::size_t m = static_cast<std::size_t>(spec.num_classes);
    if (spec.kind == ModelKind::Logistic) {
        fill_uniform(p.data() + l.w1, m * d, spec.input_dim);
    } else {
        const std::size_t h = static_cast<std::size_t>(spec.hidden_dim);
        fill_uniform(p.data() + l.w1, h * d, spec.input_dim);
        fill_uniform(p.data() + l.w2, m * h, spec.hidden_dim);
    }
    return p;
}

std::vector<double> forward(const ParamVector& params, const ModelSpec& spec,
                            const double* features, int count) {
    check_params(params, spec);
    if (count < 1) throw ShapeError("forward requires at least one row");
    const Layout l = layout_of(spec);
    const int d = spec.input_dim;
    const int m = spec.num_classes;
    std::vector<double> logits(static_cast<std::size_t>(count) * m, 0.0);

    if (spec.kind == ModelKind::Logistic) {
        const double* w = params.data() + l.w1;
        const double* bias = params.data() + l.b1;
        for (int b = 0; b < count; ++b) {
            const double* x = features + static_cast<std::size_t>(b) * d;
            double* out = logits.data() + static_cast<std::size_t>(b) * m;
            for (int j = 0; j < m; ++j) {
                const double* wj = w + static_cast<std::size_t>(j) * d;
                double s = bias[j];
                for (int k = 0; k < d; ++k) s += wj[k] * x[k];
                out[j] = s;
            }
        }
        return logits;
    }

    const int h = spec.hidden_dim;
    const double* w1 = params.data() + l.w1;
    const double* b1 = params.data() + l.b1;
    const double* w2 = params.data() + l.w2;
    const double* b2 = params.data() + l.b2;
    std::vector<double> act(static_cast<std::size_t>(h), 0.0);
    for (int b = 0; b < count; ++b) {
        const double* x = features + static_cast<std::size_t>(b) * d;
        for (int i = 0; i < h; ++i) {
            const double* wi = w1 + static_cast<std::size_t>(i) * d;
            double s = b1[i];
            for (int k = 0; k < d; ++k) s += wi[k] * x[k];
            act[i] = s > 0.0 ? s : 0.0;
        }
        double* out = logits.data() + static_cast<std::size_t>(b) * m;
        for (int j = 0; j < m; ++j) {
            const double* wj = w2 + static_cast<std::size_t>(j) * h;
            double s = b2[j];
            for (int i = 0; i < h; ++i) s += wj[i] * act[i];
            out[j] = s;
        }
    }
    return logits;
}

LossGrad loss_and_grad(const ParamVector& params, const ModelSpec& spec, const Batch& batch) {
    check_params(params, spec);
    if (batch.size() < 1) throw InputError("empty batch");
    if (batch.dim != spec.input_dim) {
        throw ShapeError("batch dim " + std::to_string(batch.dim) + " != model input_dim " +
                         std::to_string(spec.input_dim));
    }
    const int count = batch.size();
    const int m = spec.num_classes;
    for (int b = 0; b < count; ++b) {
        if (batch.labels[b] < 0 || batch.labels[b] >= m) {
            throw InputError("label " + std::to_string(batch.labels[b]) + " out of range [0, " +
                             std::to_string(m) + ") at batch row " + std::to_string(b));
        }
    }

    const Layout l = layout_of(spec);
    const int d = spec.input_dim;
    LossGrad out;
    out.grad.assign(params.size(), 0.0);

    // Forward with cached hidden activations for the Mlp backward pass.
    std::vector<double> probs;
    std::vector<double> act;  // count x h, post-ReLU
    if (spec.kind == ModelKind::Logistic) {
        probs = forward(params, spec, batch.features.data(), count);
    } else {
        const int h = spec.hidden_dim;
        const double* w1 = params.data() + l.w1;
        const double* b1 = params.data() + l.b1;
        const double* w2 = params.data() + l.w2;
        const double* b2 = params.data() + l.b2;
        act.assign(static_cast<std::size_t>(count) * h, 0.0);
        probs.assign(static_cast<std::size_t>(count) * m, 0.0);
        for (int b = 0; b < count; ++b) {
            const double* x = batch.features.data() + static_cast<std::size_t>(b) * d;
            double* ab = act.data() + static_cast<std::size_t>(b) * h;
            for (int i = 0; i < h; ++i) {
                const double* wi = w1 + static_cast<std::size_t>(i) * d;
                double s = b1[i];
                for (int k = 0; k < d; ++k) s += wi[k] * x[k];
                ab[i] = s > 0.0 ? s : 0.0;
            }
            double* pb = probs.data() + static_cast<std::size_t>(b) * m;
            for (int j = 0; j < m; ++j) {
                const double* wj = w2 + static_cast<std::size_t>(j) * h;
                double s = b2[j];
                for (int i = 0; i < h; ++i) s += wj[i] * ab[i];
                pb[j] = s;
            }
        }
    }

    // Stable softmax + mean cross-entropy.
    double loss_sum = 0.0;
    for (int b = 0; b < count; ++b) {
        double* row = probs.data() + static_cast<std::size_t>(b) * m;
        double mx = row[0];
        for (int j = 1; j < m; ++j) mx = std::max(mx, row[j]);
        double denom = 0.0;
        for (int j = 0; j < m; ++j) {
            row[j] = std::exp(row[j] - mx);
            denom += row[j];
        }
        const double inv = 1.0 / denom;
        for (int j = 0; j < m; ++j) row[j] *= inv;
        loss_sum += -std::log(row[batch.labels[b]]);
    }
    out.loss = loss_sum / count;

    // dL/dlogit[b][j] = (p - onehot) / count
    const double invn = 1.0 / count;
    if (spec.kind == ModelKind::Logistic) {
        double* gw = out.grad.data() + l.w1;
        double* gb = out.grad.data() + l.b1;
        for (int b = 0; b < count; ++b) {
            const double* x = batch.features.data() + static_cast<std::size_t>(b) * d;
            const double* pb = probs.data() + static_cast<std::size_t>(b) * m;
            for (int j = 0; j < m; ++j) {
                const double delta = (pb[j] - (batch.labels[b] == j ? 1.0 : 0.0)) * invn;
                gb[j] += delta;
                double* gwj = gw + static_cast<std::size_t>(j) * d;
                for (int k = 0; k < d; ++k) gwj[k] += delta * x[k];
            }
        }
        return out;
    }

    const int h = spec.hidden_dim;
    const double* w2 = params.data() + l.w2;
    double* gw1 = out.grad.data() + l.w1;
    double* gb1 = out.grad.data() + l.b1;
    double* gw2 = out.grad.data() + l.w2;
    double* gb2 = out.grad.data() + l.b2;
    std::vector<double> dact(static_cast<std::size_t>(h), 0.0);
    for (int b = 0; b < count; ++b) {
        const double* x = batch.features.data() + static_cast<std::size_t>(b) * d;
        const double* ab = act.data() + static_cast<std::size_t>(b) * h;
        const double* pb = probs.data() + static_cast<std::size_t>(b) * m;
        std::fill(dact.begin(), dact.end(), 0.0);
        for (int j = 0; j < m; ++j) {
            const double delta = (pb[j] - (batch.labels[b] == j ? 1.0 : 0.0)) * invn;
            gb2[j] += delta;
            double* gwj = gw2 + static_cast<std::size_t>(j) * h;
            const double* wj = w2 + static_cast<std::size_t>(j) * h;
            for (int i = 0; i < h; ++i) {
                gwj[i] += delta * ab[i];
                dact[i] += delta * wj[i];
            }
        }
        for (int i = 0; i < h; ++i) {
            if (ab[i] <= 0.0) continue;  // ReLU gate
            gb1[i] += dact[i];
            double* gwi = gw1 + static_cast<std::size_t>(i) * d;
            for (int k = 0; k < d; ++k) gwi[k] += dact[i] * x[k];
        }
    }
    return out;
}

ParamVector sgd_step(const ParamVector& params, const ParamVector& grad, double eta) {
    if (params.size() != grad.size()) {
        throw ShapeError("sgd_step: params and grad lengths differ");
    }
    ParamVector next(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) next[i] = params[i] - eta * grad[i];
    return next;
}

LastLayerMatrix extract_last_layer(const ParamVector& params, const ModelSpec& spec) {
    check_params(params, spec);
    const Layout l = layout_of(spec);
    const int m = spec.num_classes;
    const int p = l.last_in;
    LastLayerMatrix out;
    out.columns.resize(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        const double* wj = params.data() + l.last_w + static_cast<std::size_t>(j) * p;
        out.columns[j].assign(wj, wj + p);
    }
    return out;
}

ParamVector write_back_last_layer(const ParamVector& params, const ModelSpec& spec,
                                  const LastLayerMatrix& matrix) {
    check_params(params, spec);
    const Layout l = layout_of(spec);
    const int m = spec.num_classes;
    const int p = l.last_in;
    if (matrix.num_classes() != static_cast<std::size_t>(m) ||
        matrix.rows() != static_cast<std::size_t>(p)) {
        throw ShapeError("last-layer matrix shape does not match model spec");
    }
    ParamVector out = params;
    for (int j = 0; j < m; ++j) {
        std::copy(matrix.columns[j].begin(), matrix.columns[j].end(),
                  out.begin() + static_cast<std::ptrdiff_t>(l.last_w + static_cast<std::size_t>(j) * p));
    }
    return out;
}

}  // namespace shapfed
