#include "shapfed/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

namespace fs = std::filesystem;

namespace shapfed {
namespace {

constexpr std::uint64_t kDataTag = 0xda7a;
constexpr std::uint64_t kValTag = 0x5a11;
constexpr std::uint64_t kPartTag = 0x9a47;

Dataset build_dataset(const ExperimentConfig& cfg) {
    if (cfg.source == DataSource::Blobs) {
        return gen_blobs(cfg.model.num_classes, cfg.model.input_dim, cfg.blobs.per_class,
                         cfg.blobs.separation, mix_seed(cfg.seed, kDataTag));
    }
    Dataset data = load_csv(cfg.csv.path, cfg.csv.label_column);
    if (data.dim != cfg.model.input_dim) {
        throw ConfigError(cfg.csv.path + " has " + std::to_string(data.dim) +
                          " feature columns, model.input_dim is " +
                          std::to_string(cfg.model.input_dim));
    }
    if (data.num_classes > cfg.model.num_classes) {
        throw ConfigError(cfg.csv.path + " contains labels up to " +
                          std::to_string(data.num_classes - 1) + ", model.num_classes is " +
                          std::to_string(cfg.model.num_classes));
    }
    data.num_classes = cfg.model.num_classes;
    return data;
}

std::string join_path(const std::string& dir, const std::string& file) {
    return (fs::path(dir) / file).string();
}

ExperimentSetup make_setup(const ExperimentConfig& cfg, const PreparedData& data,
                           const StrategyConfig& strategy, int workers) {
    ExperimentSetup setup;
    setup.spec = cfg.model;
    setup.shards = data.shards;
    setup.valset = data.valset;
    setup.strategy = strategy;
    setup.master_seed = cfg.seed;
    setup.byzantine = cfg.byzantine;
    setup.workers = workers;
    return setup;
}

int argmax(const std::vector<double>& v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

}  // namespace

PreparedData prepare_data(const ExperimentConfig& cfg) {
    const Dataset full = build_dataset(cfg);
    auto [train, val] = stratified_split(full, cfg.valset_fraction, mix_seed(cfg.seed, kValTag));
    PreparedData out;
    out.valset = std::move(val);
    out.shards = partition(train, cfg.partition_spec, cfg.n, mix_seed(cfg.seed, kPartTag));
    return out;
}

void cmd_run(const ExperimentConfig& cfg, int workers) {
    fs::create_directories(cfg.output_dir);
    const PreparedData data = prepare_data(cfg);

    std::vector<FairnessRow> fairness;
    for (const auto& strat : cfg.strategies) {
        const RunLog log = run_experiment(make_setup(cfg, data, strat.config, workers));
        write_metrics_csv(join_path(cfg.output_dir, "metrics_" + strat.name + ".csv"), log);
        write_gamma_json(join_path(cfg.output_dir, "gamma_" + strat.name + ".json"),
                         log.rounds.back().smoothed_gamma);
        FairnessRow row;
        row.strategy = strat.name;
        if (cfg.n >= 2) {
            const PearsonResult pr =
                pearson(log.standalone_acc, log.rounds.back().participant_balanced_acc);
            row.pearson_r = pr.r;
            row.degenerate = pr.degenerate;
        } else {
            row.degenerate = true;
        }
        fairness.push_back(row);
    }
    write_fairness_csv(join_path(cfg.output_dir, "fairness.csv"), fairness);
}

void cmd_shapley_audit(const ExperimentConfig& cfg, int workers) {
    if (cfg.n > 8) {
        throw ConfigError("shapley-audit requires n <= 8 (exact oracle evaluates 2^n - 1 "
                          "coalitions), got n = " + std::to_string(cfg.n));
    }
    fs::create_directories(cfg.output_dir);
    const PreparedData data = prepare_data(cfg);

    // One training trajectory (first configured strategy); the final round's
    // updates define the cooperative game the oracle replays.
    const auto& strat = cfg.strategies.front();
    std::optional<RoundOutcome> last;
    run_experiment(make_setup(cfg, data, strat.config, workers),
                   [&last](const RoundOutcome& outcome) { last = outcome; });

    const int n = cfg.n;
    const int m = cfg.model.num_classes;
    const auto utility = [&](const std::vector<int>& members) {
        std::vector<ParamVector> deltas;
        deltas.reserve(members.size());
        for (int i : members) deltas.push_back(last->updates[i].delta);
        return utility_classwise_accuracy(deltas, last->base_global, cfg.model, data.valset);
    };
    const ShapleyResult exact = exact_shapley(n, utility);

    std::vector<ParamVector> all_deltas;
    all_deltas.reserve(last->updates.size());
    for (const auto& u : last->updates) all_deltas.push_back(u.delta);

    AuditResult audit;
    audit.n = n;
    audit.num_classes = m;
    audit.exact_shapley = exact.per_class;
    audit.cssv = last->state.ema_cssv.smoothed.values;
    audit.cgsv = cgsv(all_deltas, last->aggregate_delta);
    audit.exact_utility_calls = exact.utility_calls;
    audit.approx_utility_calls = n + 1;
    audit.top_cgsv = argmax(audit.cgsv);
    for (int j = 0; j < m; ++j) {
        std::vector<double> exact_col(n), cssv_col(n);
        for (int i = 0; i < n; ++i) {
            exact_col[i] = audit.exact_shapley[i][j];
            cssv_col[i] = audit.cssv[i][j];
        }
        audit.top_exact.push_back(argmax(exact_col));
        audit.top_cssv.push_back(argmax(cssv_col));
        audit.cssv_agreement.push_back(audit.top_exact[j] == audit.top_cssv[j]);
        audit.cgsv_agreement.push_back(audit.top_exact[j] == audit.top_cgsv);
    }
    write_audit_json(join_path(cfg.output_dir, "audit.json"), audit);
}

void cmd_partition_report(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.output_dir);
    const PreparedData data = prepare_data(cfg);
    std::vector<std::vector<long long>> counts;
    counts.reserve(data.shards.size());
    for (const auto& shard : data.shards) counts.push_back(class_histogram(shard));
    write_partition_csv(join_path(cfg.output_dir, "partition.csv"), counts);
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Federated-learning simulator with class-specific Shapley contribution "
                 "assessment, weighted aggregation and personalized broadcast"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;
    int workers = 1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config_path, "experiment config file")->required();
        sub->add_option("--seed", seed_override, "override the config seed");
        sub->add_option("--out", out_override, "override the output directory");
        sub->add_option("--workers", workers, "worker threads for local training")
            ->check(CLI::PositiveNumber);
    };
    CLI::App* run = app.add_subcommand("run", "run every configured strategy and export metrics");
    CLI::App* audit = app.add_subcommand(
        "shapley-audit", "compare CSSV and CGSV against the exact Shapley oracle");
    CLI::App* report =
        app.add_subcommand("partition-report", "export the per-participant class-count table");
    add_common(run);
    add_common(audit);
    add_common(report);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
        if (seed_override) cfg.seed = *seed_override;
        if (out_override) cfg.output_dir = *out_override;
        if (run->parsed()) {
            cmd_run(cfg, workers);
        } else if (audit->parsed()) {
            cmd_shapley_audit(cfg, workers);
        } else {
            cmd_partition_report(cfg);
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace shapfed
