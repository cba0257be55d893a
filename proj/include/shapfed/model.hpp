#pragma once

#include <cstdint>
#include <vector>

#include "shapfed/common.hpp"

namespace shapfed {

enum class ModelKind { Logistic, Mlp };

// Architecture descriptor for the two supported classifier families:
// multinomial logistic regression and a one-hidden-layer ReLU MLP.
struct ModelSpec {
    ModelKind kind = ModelKind::Logistic;
    int input_dim = 0;
    int hidden_dim = 0;  // Mlp only
    int num_classes = 0;

    // Embedding dimension feeding the final linear layer: input_dim for
    // Logistic, hidden_dim for Mlp.
    int feature_dim() const;
    std::size_t param_count() const;
    void validate() const;  // throws ConfigError
};

// Flat parameter storage. Layout (row-major, class-major rows):
//   Logistic: W[M x d], b[M]
//   Mlp:      W1[H x d], b1[H], W2[M x H], b2[M]
using ParamVector = std::vector<double>;

// The M weight columns of the final linear layer; column j (length P) feeds
// the class-j logit. Bias excluded.
struct LastLayerMatrix {
    std::vector<std::vector<double>> columns;

    std::size_t num_classes() const { return columns.size(); }
    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

struct Batch {
    std::vector<double> features;  // count x dim, row-major
    std::vector<int> labels;
    int dim = 0;

    int size() const { return static_cast<int>(labels.size()); }
};

struct LossGrad {
    double loss = 0.0;
    ParamVector grad;
};

// Weights drawn uniformly from (-1/sqrt(fan_in), 1/sqrt(fan_in)), biases
// zero. Deterministic per seed.
ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);

// Returns count x M logits, row-major. features must be count x input_dim.
std::vector<double> forward(const ParamVector& params, const ModelSpec& spec,
                            const double* features, int count);

// Mean softmax cross-entropy over the batch plus its analytic gradient in
// the same layout as params.
LossGrad loss_and_grad(const ParamVector& params, const ModelSpec& spec, const Batch& batch);

ParamVector sgd_step(const ParamVector& params, const ParamVector& grad, double eta);

LastLayerMatrix extract_last_layer(const ParamVector& params, const ModelSpec& spec);

// Inverse of extract_last_layer; leaves every other coordinate untouched.
ParamVector write_back_last_layer(const ParamVector& params, const ModelSpec& spec,
                                  const LastLayerMatrix& matrix);

}  // namespace shapfed
