#pragma once

#include <functional>
#include <vector>

#include "shapfed/data.hpp"
#include "shapfed/model.hpp"

namespace shapfed {

// n x M matrix of class-specific contribution scores, entries in [-1, 1].
struct ContributionMatrix {
    std::vector<std::vector<double>> values;

    std::size_t participants() const { return values.size(); }
    std::size_t classes() const { return values.empty() ? 0 : values.front().size(); }
};

// Raw per-participant scores in [0, 1] and their simplex normalization.
struct ImportanceWeights {
    std::vector<double> raw;
    std::vector<double> normalized;
};

// Momentum-smoothed contribution matrix across rounds. Empty until the
// first update, which stores the fresh matrix verbatim; later rounds blend
// mu * old + (1 - mu) * fresh elementwise.
struct EmaState {
    double mu = 0.9;
    int round_count = 0;
    ContributionMatrix smoothed;

    bool empty() const { return round_count == 0; }
};

EmaState ema_update(const EmaState& state, const ContributionMatrix& fresh);

// u.v / (|u||v|), clamped to [-1, 1]; defined as 0 when either norm <= 1e-12.
double cosine(const std::vector<double>& u, const std::vector<double>& v);

// Class-specific scores: entry (i, j) is the cosine between column j of
// participant i's last-layer update and column j of the aggregate update.
ContributionMatrix cssv(const std::vector<LastLayerMatrix>& updates,
                        const LastLayerMatrix& aggregate);

// raw_i = mean_j (1 + G[i][j]) / 2, normalized onto the simplex. A
// degenerate total (<= 1e-12) falls back to uniform weights.
ImportanceWeights importance(const ContributionMatrix& gamma);

// Baseline: one cosine per participant over the entire flattened update.
std::vector<double> cgsv(const std::vector<ParamVector>& updates, const ParamVector& aggregate);

struct ShapleyResult {
    std::vector<std::vector<double>> per_class;  // n x M
    long long utility_calls = 0;                 // 2^n - 1 for the exact oracle
};

// Exact Shapley values phi_i = sum over subsets S of N\{i} of
// |S|!(n-|S|-1)!/n! * (v(S u {i}) - v(S)), computed per class. The utility
// receives the subset as sorted participant indices and is evaluated once
// per nonempty subset (memoized); v(empty) is the zero vector. n capped at
// 16. Summation order over subsets is fixed (ascending bitmask), so results
// are bit-reproducible.
ShapleyResult exact_shapley(
    int n, const std::function<std::vector<double>(const std::vector<int>&)>& utility);

// Coalition utility for the oracle: per-class accuracy on valset of the
// model base + mean(member_updates). Classes absent from the valset score 0.
std::vector<double> utility_classwise_accuracy(const std::vector<ParamVector>& member_updates,
                                               const ParamVector& base, const ModelSpec& spec,
                                               const Dataset& valset);

}  // namespace shapfed
