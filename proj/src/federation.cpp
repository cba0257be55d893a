#include "shapfed/federation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace shapfed {
namespace {

constexpr std::uint64_t kInitTag = 0x1a17;
constexpr std::uint64_t kTrainTag = 0x7e41;
constexpr std::uint64_t kByzTag = 0xb1d5;
constexpr std::uint64_t kStandaloneTag = 0x50f0;

std::vector<double> uniform_weights(std::size_t n) {
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

}  // namespace

void StrategyConfig::validate() const {
    if (mu < 0.0 || mu >= 1.0) throw ConfigError("strategy mu must lie in [0, 1)");
    if (eta <= 0.0) throw ConfigError("strategy eta must be > 0");
    if (local_epochs < 1) throw ConfigError("strategy local_epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("strategy batch_size must be >= 1");
    if (rounds < 1) throw ConfigError("strategy rounds must be >= 1");
}

void ExperimentSetup::validate() const {
    spec.validate();
    strategy.validate();
    if (shards.empty()) throw ConfigError("experiment requires at least one shard");
    for (std::size_t i = 0; i < shards.size(); ++i) {
        if (shards[i].size() < 1) {
            throw ConfigError("shard " + std::to_string(i) + " is empty");
        }
        if (shards[i].dim != spec.input_dim) {
            throw ConfigError("shard " + std::to_string(i) + " dim does not match model");
        }
    }
    if (valset.size() < 1) throw ConfigError("experiment requires a nonempty valset");
    if (byzantine.participant >= static_cast<int>(shards.size())) {
        throw ConfigError("byzantine participant index out of range");
    }
}

ClientUpdate local_train(const ParamVector& start, const ModelSpec& spec, const Dataset& shard,
                         double eta, int epochs, int batch_size, std::uint64_t seed) {
    if (shard.size() < 1) throw ConfigError("local_train: empty shard");
    if (shard.dim != spec.input_dim) throw ShapeError("local_train: shard dim mismatch");

    std::mt19937_64 rng(seed);
    ParamVector params = start;
    std::vector<int> order(static_cast<std::size_t>(shard.size()));
    std::iota(order.begin(), order.end(), 0);

    Batch batch;
    batch.dim = shard.dim;
    for (int e = 0; e < epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        for (int startrow = 0; startrow < shard.size(); startrow += batch_size) {
            const int count = std::min(batch_size, shard.size() - startrow);
            batch.features.assign(static_cast<std::size_t>(count) * shard.dim, 0.0);
            batch.labels.assign(static_cast<std::size_t>(count), 0);
            for (int b = 0; b < count; ++b) {
                const int src = order[startrow + b];
                const double* x = shard.features.data() + static_cast<std::size_t>(src) * shard.dim;
                std::copy(x, x + shard.dim,
                          batch.features.begin() + static_cast<std::ptrdiff_t>(b) * shard.dim);
                batch.labels[b] = shard.labels[src];
            }
            const LossGrad lg = loss_and_grad(params, spec, batch);
            params = sgd_step(params, lg.grad, eta);
        }
    }

    ClientUpdate out;
    out.final_params = std::move(params);
    out.delta.resize(start.size());
    for (std::size_t i = 0; i < start.size(); ++i) out.delta[i] = out.final_params[i] - start[i];
    out.sample_count = shard.size();
    return out;
}

ParamVector aggregate_weighted(const std::vector<ClientUpdate>& updates,
                               const std::vector<double>& normalized_weights) {
    if (updates.empty()) throw ShapeError("aggregate: no updates");
    if (normalized_weights.size() != updates.size()) {
        throw ShapeError("aggregate: weight count does not match update count");
    }
    const std::size_t len = updates.front().final_params.size();
    ParamVector out(len, 0.0);
    for (std::size_t i = 0; i < updates.size(); ++i) {
        const auto& p = updates[i].final_params;
        if (p.size() != len) throw ShapeError("aggregate: parameter layouts differ");
        const double w = normalized_weights[i];
        for (std::size_t k = 0; k < len; ++k) out[k] += w * p[k];
    }
    return out;
}

ParamVector aggregate_fedavg(const std::vector<ClientUpdate>& updates, bool size_weighted) {
    if (updates.empty()) throw ShapeError("aggregate: no updates");
    if (!size_weighted) return aggregate_weighted(updates, uniform_weights(updates.size()));
    double total = 0.0;
    for (const auto& u : updates) total += static_cast<double>(u.sample_count);
    if (total <= 0.0) throw InputError("aggregate: sample counts sum to zero");
    std::vector<double> w(updates.size(), 0.0);
    for (std::size_t i = 0; i < updates.size(); ++i) {
        w[i] = static_cast<double>(updates[i].sample_count) / total;
    }
    return aggregate_weighted(updates, w);
}

ParamVector personalize(const ParamVector& global, const ParamVector& local, double gamma_i) {
    if (global.size() != local.size()) throw ShapeError("personalize: layouts differ");
    if (gamma_i < 0.0 || gamma_i > 1.0) {
        throw InputError("personalize: gamma must lie in [0, 1], got " + std::to_string(gamma_i));
    }
    if (gamma_i == 1.0) return global;
    if (gamma_i == 0.0) return local;
    ParamVector out(global.size());
    for (std::size_t k = 0; k < global.size(); ++k) {
        out[k] = gamma_i * global[k] + (1.0 - gamma_i) * local[k];
    }
    return out;
}

RoundState init_round_state(const ExperimentSetup& setup) {
    setup.validate();
    const std::size_t n = setup.shards.size();
    RoundState state;
    state.round = 0;
    state.global = init_params(setup.spec, mix_seed(setup.master_seed, kInitTag));
    state.last_local.assign(n, state.global);
    state.ema_cssv.mu = setup.strategy.mu;
    state.ema_cgsv.mu = setup.strategy.mu;
    state.weights.raw.assign(n, 1.0 / static_cast<double>(n));
    state.weights.normalized = state.weights.raw;
    return state;
}

RoundOutcome run_round(const RoundState& state, const ExperimentSetup& setup) {
    const auto& strat = setup.strategy;
    const int n = static_cast<int>(setup.shards.size());
    const int t = state.round + 1;

    // 1. Broadcast. Round 1 sends the global model to everyone; afterwards
    //    only the full ShapFed strategy personalizes (raw gamma, Eq. 8).
    std::vector<ParamVector> received(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (t > 1 && strat.personalizes() && !strat.force_uniform_weights) {
            received[i] = personalize(state.global, state.last_local[i],
                                      std::clamp(state.weights.raw[i], 0.0, 1.0));
        } else {
            received[i] = state.global;
        }
    }

    // 2. Local training (parallel fan-out; each task is a pure function and
    //    writes only its own slot, so worker count cannot change results).
    std::vector<ClientUpdate> updates(static_cast<std::size_t>(n));
    parallel_for(n, setup.workers, [&](int i) {
        updates[i] = local_train(received[i], setup.spec, setup.shards[i], strat.eta,
                                 strat.local_epochs, strat.batch_size,
                                 mix_seed(setup.master_seed, kTrainTag + static_cast<std::uint64_t>(t),
                                          static_cast<std::uint64_t>(i)));
        updates[i].participant_id = i;
    });

    // Byzantine replacement: no training, just a Gaussian delta.
    if (setup.byzantine.participant >= 0) {
        const int b = setup.byzantine.participant;
        std::mt19937_64 rng(mix_seed(setup.master_seed, kByzTag + static_cast<std::uint64_t>(t),
                                     static_cast<std::uint64_t>(b)));
        std::normal_distribution<double> noise(0.0, setup.byzantine.sigma);
        ClientUpdate& u = updates[b];
        u.delta.assign(received[b].size(), 0.0);
        u.final_params = received[b];
        for (std::size_t k = 0; k < u.delta.size(); ++k) {
            u.delta[k] = noise(rng);
            u.final_params[k] += u.delta[k];
        }
    }

    // 3. Aggregate with this round's operative weights (previous round's
    //    smoothed contributions for the weighted strategies).
    std::vector<double> agg_weights;
    switch (strat.kind) {
        case StrategyKind::FedAvgUniform:
            agg_weights = uniform_weights(updates.size());
            break;
        case StrategyKind::FedAvgSizeWeighted: {
            double total = 0.0;
            for (const auto& u : updates) total += static_cast<double>(u.sample_count);
            agg_weights.resize(updates.size());
            for (std::size_t i = 0; i < updates.size(); ++i) {
                agg_weights[i] = static_cast<double>(updates[i].sample_count) / total;
            }
            break;
        }
        case StrategyKind::ShapFedWA:
        case StrategyKind::ShapFed:
        case StrategyKind::CgsvWeighted:
            agg_weights = strat.force_uniform_weights ? uniform_weights(updates.size())
                                                      : state.weights.normalized;
            break;
    }
    ParamVector next_global = aggregate_weighted(updates, agg_weights);

    // 4. Fresh contribution scores from last-layer deltas against the
    //    aggregate delta built with the same weights.
    ParamVector aggregate_delta(next_global.size(), 0.0);
    for (std::size_t i = 0; i < updates.size(); ++i) {
        const double w = agg_weights[i];
        for (std::size_t k = 0; k < aggregate_delta.size(); ++k) {
            aggregate_delta[k] += w * updates[i].delta[k];
        }
    }
    std::vector<LastLayerMatrix> delta_layers;
    delta_layers.reserve(updates.size());
    for (const auto& u : updates) delta_layers.push_back(extract_last_layer(u.delta, setup.spec));
    const LastLayerMatrix aggregate_layer = extract_last_layer(aggregate_delta, setup.spec);
    const ContributionMatrix fresh = cssv(delta_layers, aggregate_layer);

    // 5./6. Momentum update, then refresh the operative weights for the
    //       next round.
    RoundOutcome outcome;
    outcome.state = state;
    outcome.state.round = t;
    outcome.state.global = next_global;
    for (int i = 0; i < n; ++i) outcome.state.last_local[i] = updates[i].final_params;
    outcome.state.ema_cssv = ema_update(state.ema_cssv, fresh);
    if (strat.kind == StrategyKind::CgsvWeighted) {
        std::vector<ParamVector> deltas;
        deltas.reserve(updates.size());
        for (const auto& u : updates) deltas.push_back(u.delta);
        ContributionMatrix cos_col;
        for (double c : cgsv(deltas, aggregate_delta)) cos_col.values.push_back({c});
        outcome.state.ema_cgsv = ema_update(state.ema_cgsv, cos_col);
        outcome.state.weights = importance(outcome.state.ema_cgsv.smoothed);
    } else {
        outcome.state.weights = importance(outcome.state.ema_cssv.smoothed);
    }

    // 7. Round record.
    RoundRecord rec;
    rec.t = t;
    rec.gamma = outcome.state.weights.raw;
    rec.gamma_tilde = outcome.state.weights.normalized;
    rec.smoothed_gamma = outcome.state.ema_cssv.smoothed.values;
    const EvalReport global_eval = evaluate(next_global, setup.spec, setup.valset);
    rec.global_balanced_acc = global_eval.balanced_acc;
    rec.per_class_acc = global_eval.per_class_acc;
    rec.participant_balanced_acc.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        rec.participant_balanced_acc[i] =
            evaluate(updates[i].final_params, setup.spec, setup.valset).balanced_acc;
    }
    outcome.record = std::move(rec);
    outcome.updates = std::move(updates);
    outcome.aggregation_weights = std::move(agg_weights);
    outcome.base_global = state.global;
    outcome.aggregate_delta = std::move(aggregate_delta);
    return outcome;
}

RunLog run_experiment(const ExperimentSetup& setup, const RoundObserver& observer) {
    setup.validate();
    const int n = static_cast<int>(setup.shards.size());

    RunLog log;
    RoundState state = init_round_state(setup);
    const ParamVector init = state.global;
    for (int t = 1; t <= setup.strategy.rounds; ++t) {
        RoundOutcome outcome = run_round(state, setup);
        log.rounds.push_back(outcome.record);
        state = outcome.state;
        if (observer) observer(outcome);
    }

    // Standalone baselines: same init, same per-epoch budget (T * K epochs
    // of local data only). Feeds the collaborative-fairness correlation.
    log.standalone_acc.assign(static_cast<std::size_t>(n), 0.0);
    const int standalone_epochs = setup.strategy.rounds * setup.strategy.local_epochs;
    parallel_for(n, setup.workers, [&](int i) {
        const ClientUpdate solo =
            local_train(init, setup.spec, setup.shards[i], setup.strategy.eta, standalone_epochs,
                        setup.strategy.batch_size,
                        mix_seed(setup.master_seed, kStandaloneTag, static_cast<std::uint64_t>(i)));
        log.standalone_acc[i] = evaluate(solo.final_params, setup.spec, setup.valset).balanced_acc;
    });
    return log;
}

}  // namespace shapfed
