#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "shapfed/contribution.hpp"
#include "shapfed/data.hpp"
#include "shapfed/metrics.hpp"
#include "shapfed/model.hpp"

namespace shapfed {

enum class StrategyKind {
    FedAvgUniform,
    FedAvgSizeWeighted,
    ShapFedWA,    // contribution-weighted aggregation, global broadcast
    ShapFed,      // weighted aggregation + personalized broadcast
    CgsvWeighted  // full-vector cosine weights, global broadcast
};

struct StrategyConfig {
    StrategyKind kind = StrategyKind::FedAvgUniform;
    double mu = 0.9;     // contribution momentum, [0, 1)
    double eta = 0.01;   // local learning rate
    int local_epochs = 1;
    int batch_size = 32;
    int rounds = 50;
    // Debug knob: aggregate and personalize as if gamma were uniform while
    // still computing/logging contribution state. Lets a ShapFed-WA run be
    // compared bit-for-bit against FedAvg.
    bool force_uniform_weights = false;

    void validate() const;
    bool personalizes() const { return kind == StrategyKind::ShapFed; }
};

struct ClientUpdate {
    int participant_id = 0;
    ParamVector final_params;
    ParamVector delta;  // final_params - received broadcast
    long long sample_count = 0;
};

// Optional adversary: the flagged participant skips training and submits an
// iid Gaussian delta instead.
struct ByzantineSpec {
    int participant = -1;  // < 0 disables
    double sigma = 1.0;
};

// Server-side state carried between communication rounds.
struct RoundState {
    int round = 0;                        // rounds completed so far
    ParamVector global;                   // w_s
    std::vector<ParamVector> last_local;  // w_i after each client's last training
    EmaState ema_cssv;                    // smoothed n x M contribution matrix
    EmaState ema_cgsv;                    // smoothed n x 1 full-vector cosines (CgsvWeighted)
    ImportanceWeights weights;            // operative gamma / gamma~ for the next round
};

struct RoundRecord {
    int t = 0;
    std::vector<double> gamma;
    std::vector<double> gamma_tilde;
    std::vector<std::vector<double>> smoothed_gamma;  // n x M
    double global_balanced_acc = 0.0;
    std::vector<double> participant_balanced_acc;  // local models, pre-aggregation
    std::vector<double> per_class_acc;             // of the new global model
};

struct RunLog {
    std::vector<RoundRecord> rounds;
    std::vector<double> standalone_acc;  // per participant, local-only training
};

struct ExperimentSetup {
    ModelSpec spec;
    std::vector<Dataset> shards;
    Dataset valset;
    StrategyConfig strategy;
    std::uint64_t master_seed = 0;
    ByzantineSpec byzantine{};
    int workers = 1;

    void validate() const;
};

// One round's full output; updates/bases are kept so audits can replay the
// round's cooperative game.
struct RoundOutcome {
    RoundState state;  // state after the round
    RoundRecord record;
    std::vector<ClientUpdate> updates;
    std::vector<double> aggregation_weights;  // weights actually used this round
    ParamVector base_global;                  // w_s before the round
    ParamVector aggregate_delta;              // weighted sum of client deltas
};

// K epochs of mini-batch SGD over a seed-deterministic reshuffle per epoch.
// Pure function of its inputs.
ClientUpdate local_train(const ParamVector& start, const ModelSpec& spec, const Dataset& shard,
                         double eta, int epochs, int batch_size, std::uint64_t seed);

ParamVector aggregate_fedavg(const std::vector<ClientUpdate>& updates, bool size_weighted);
ParamVector aggregate_weighted(const std::vector<ClientUpdate>& updates,
                               const std::vector<double>& normalized_weights);

// w_bar = gamma * global + (1 - gamma) * local, with the gamma = 0 / 1
// endpoints returned exactly.
ParamVector personalize(const ParamVector& global, const ParamVector& local, double gamma_i);

RoundState init_round_state(const ExperimentSetup& setup);

// One communication round: broadcast (global at t = 1, personalized for the
// full ShapFed strategy afterwards), parallel local training, aggregation
// with the previous round's weights, fresh contribution matrix from
// last-layer deltas, momentum update, weight refresh, evaluation.
RoundOutcome run_round(const RoundState& state, const ExperimentSetup& setup);

using RoundObserver = std::function<void(const RoundOutcome&)>;

// Runs strategy.rounds rounds plus the standalone baselines (each
// participant trained alone from the same init with the same total epoch
// budget). Deterministic per master seed, independent of worker count.
RunLog run_experiment(const ExperimentSetup& setup, const RoundObserver& observer = {});

}  // namespace shapfed
