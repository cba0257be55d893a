#include "shapfed/metrics.hpp"

#include <cmath>

namespace shapfed {

EvalReport evaluate(const ParamVector& params, const ModelSpec& spec, const Dataset& data) {
    if (data.size() < 1) throw InputError("evaluate requires a nonempty dataset");
    if (data.dim != spec.input_dim) {
        throw ShapeError("dataset dim does not match model input_dim");
    }
    const int m = spec.num_classes;
    const auto logits = forward(params, spec, data.features.data(), data.size());

    std::vector<long long> total(static_cast<std::size_t>(m), 0);
    std::vector<long long> correct(static_cast<std::size_t>(m), 0);
    for (int i = 0; i < data.size(); ++i) {
        const double* row = logits.data() + static_cast<std::size_t>(i) * m;
        int pred = 0;
        for (int j = 1; j < m; ++j) {
            if (row[j] > row[pred]) pred = j;
        }
        const int label = data.labels[i];
        total[label] += 1;
        if (pred == label) correct[label] += 1;
    }

    EvalReport report;
    report.n_eval = data.size();
    report.per_class_acc.assign(static_cast<std::size_t>(m), 0.0);
    double sum = 0.0;
    int present = 0;
    for (int j = 0; j < m; ++j) {
        if (total[j] > 0) {
            report.per_class_acc[j] = static_cast<double>(correct[j]) / static_cast<double>(total[j]);
            sum += report.per_class_acc[j];
            ++present;
        }
    }
    report.balanced_acc = present > 0 ? sum / present : 0.0;
    return report;
}

PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ShapeError("pearson: input lengths differ");
    if (x.size() < 2) throw InputError("pearson requires at least two points");
    const int n = static_cast<int>(x.size());
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    PearsonResult res;
    if (sxx / (n - 1) <= 1e-15 || syy / (n - 1) <= 1e-15) {
        res.degenerate = true;
        return res;
    }
    res.r = sxy / std::sqrt(sxx * syy);
    if (res.r > 1.0) res.r = 1.0;
    if (res.r < -1.0) res.r = -1.0;
    return res;
}

}  // namespace shapfed
