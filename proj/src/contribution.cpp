#include "shapfed/contribution.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "shapfed/metrics.hpp"

namespace shapfed {

double cosine(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size()) throw ShapeError("cosine: vector lengths differ");
    double uu = 0.0, vv = 0.0, uv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        uu += u[i] * u[i];
        vv += v[i] * v[i];
        uv += u[i] * v[i];
    }
    const double nu = std::sqrt(uu);
    const double nv = std::sqrt(vv);
    if (nu <= 1e-12 || nv <= 1e-12) return 0.0;
    return std::clamp(uv / (nu * nv), -1.0, 1.0);
}

ContributionMatrix cssv(const std::vector<LastLayerMatrix>& updates,
                        const LastLayerMatrix& aggregate) {
    const std::size_t m = aggregate.num_classes();
    const std::size_t p = aggregate.rows();
    ContributionMatrix out;
    out.values.reserve(updates.size());
    for (const auto& upd : updates) {
        if (upd.num_classes() != m || upd.rows() != p) {
            throw ShapeError("cssv: last-layer matrices disagree on shape");
        }
        std::vector<double> row(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            row[j] = cosine(upd.columns[j], aggregate.columns[j]);
        }
        out.values.push_back(std::move(row));
    }
    return out;
}

ImportanceWeights importance(const ContributionMatrix& gamma) {
    const std::size_t n = gamma.participants();
    const std::size_t m = gamma.classes();
    ImportanceWeights w;
    w.raw.assign(n, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += (1.0 + gamma.values[i][j]) / 2.0;
        w.raw[i] = m > 0 ? s / static_cast<double>(m) : 0.0;
        total += w.raw[i];
    }
    w.normalized.assign(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
    if (total > 1e-12) {
        for (std::size_t i = 0; i < n; ++i) w.normalized[i] = w.raw[i] / total;
    }
    return w;
}

EmaState ema_update(const EmaState& state, const ContributionMatrix& fresh) {
    EmaState next = state;
    if (state.empty()) {
        next.smoothed = fresh;
        next.round_count = 1;
        return next;
    }
    if (fresh.participants() != state.smoothed.participants() ||
        fresh.classes() != state.smoothed.classes()) {
        throw StateError("ema_update: contribution matrix changed shape mid-run");
    }
    for (std::size_t i = 0; i < fresh.participants(); ++i) {
        for (std::size_t j = 0; j < fresh.classes(); ++j) {
            next.smoothed.values[i][j] =
                state.mu * state.smoothed.values[i][j] + (1.0 - state.mu) * fresh.values[i][j];
        }
    }
    next.round_count = state.round_count + 1;
    return next;
}

std::vector<double> cgsv(const std::vector<ParamVector>& updates, const ParamVector& aggregate) {
    std::vector<double> out;
    out.reserve(updates.size());
    for (const auto& upd : updates) {
        if (upd.size() != aggregate.size()) {
            throw ShapeError("cgsv: update layout does not match aggregate");
        }
        out.push_back(cosine(upd, aggregate));
    }
    return out;
}

ShapleyResult exact_shapley(
    int n, const std::function<std::vector<double>(const std::vector<int>&)>& utility) {
    if (n < 1) throw ConfigError("exact_shapley requires n >= 1");
    if (n > 16) throw ConfigError("exact_shapley capped at n = 16 (2^n utility calls)");

    const std::uint32_t full = (1u << n) - 1u;
    std::vector<std::vector<double>> value(static_cast<std::size_t>(full) + 1);

    // Evaluate every nonempty subset once, ascending mask order.
    std::size_t m = 0;
    std::vector<int> members;
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
        members.clear();
        for (int i = 0; i < n; ++i) {
            if (mask & (1u << i)) members.push_back(i);
        }
        value[mask] = utility(members);
        if (mask == 1) {
            m = value[mask].size();
            if (m == 0) throw InputError("utility returned an empty vector");
        } else if (value[mask].size() != m) {
            throw InputError("utility returned inconsistent vector lengths");
        }
    }

    // weight[s] = s! (n - 1 - s)! / n!
    std::vector<double> weight(static_cast<std::size_t>(n), 0.0);
    std::vector<double> fact(static_cast<std::size_t>(n) + 1, 1.0);
    for (int k = 1; k <= n; ++k) fact[k] = fact[k - 1] * k;
    for (int s = 0; s < n; ++s) weight[s] = fact[s] * fact[n - 1 - s] / fact[n];

    ShapleyResult result;
    result.utility_calls = static_cast<long long>(full);
    result.per_class.assign(static_cast<std::size_t>(n), std::vector<double>(m, 0.0));
    for (int i = 0; i < n; ++i) {
        const std::uint32_t bit = 1u << i;
        for (std::uint32_t mask = 0; mask <= full; ++mask) {
            if (mask & bit) continue;
            const double w = weight[static_cast<std::size_t>(std::popcount(mask))];
            const auto& with = value[mask | bit];
            for (std::size_t j = 0; j < m; ++j) {
                const double without = mask == 0 ? 0.0 : value[mask][j];
                result.per_class[i][j] += w * (with[j] - without);
            }
        }
    }
    return result;
}

std::vector<double> utility_classwise_accuracy(const std::vector<ParamVector>& member_updates,
                                               const ParamVector& base, const ModelSpec& spec,
                                               const Dataset& valset) {
    if (member_updates.empty()) throw InputError("coalition utility requires a nonempty subset");
    ParamVector model = base;
    const double inv = 1.0 / static_cast<double>(member_updates.size());
    for (const auto& upd : member_updates) {
        if (upd.size() != base.size()) {
            throw ShapeError("coalition member layout does not match base");
        }
    }
    for (std::size_t k = 0; k < model.size(); ++k) {
        double s = 0.0;
        for (const auto& upd : member_updates) s += upd[k];
        model[k] = base[k] + s * inv;
    }
    return evaluate(model, spec, valset).per_class_acc;
}

}  // namespace shapfed
