#include "shapfed/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace shapfed {
namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_string(const std::string& text, const std::string& name) {
    KeyValueConfig cfg;
    cfg.name_ = name;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(name + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(name + ":" + std::to_string(line_no) + ": empty key");
        }
        if (cfg.entries_.count(key)) {
            throw ConfigError(name + ":" + std::to_string(line_no) + ": duplicate key '" + key +
                              "' (first set on line " + std::to_string(cfg.entries_[key].line) + ")");
        }
        cfg.entries_[key] = Entry{value, line_no, false};
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

const KeyValueConfig::Entry& KeyValueConfig::require(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        throw ConfigError(name_ + ": missing required key '" + key + "'");
    }
    it->second.consumed = true;
    return it->second;
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

ConfigError KeyValueConfig::error_at(const std::string& key, const std::string& message) const {
    const auto it = entries_.find(key);
    const std::string where =
        it == entries_.end() ? name_ : name_ + ":" + std::to_string(it->second.line);
    return ConfigError(where + ": " + message);
}

std::string KeyValueConfig::get_string(const std::string& key) const { return require(key).value; }

std::string KeyValueConfig::get_string_or(const std::string& key,
                                          const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

long long KeyValueConfig::get_int(const std::string& key) const {
    const auto& e = require(key);
    try {
        std::size_t used = 0;
        const long long v = std::stoll(e.value, &used);
        if (used != e.value.size()) throw std::invalid_argument(e.value);
        return v;
    } catch (const std::exception&) {
        throw error_at(key, "'" + e.value + "' is not an integer");
    }
}

long long KeyValueConfig::get_int_or(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

double KeyValueConfig::get_double(const std::string& key) const {
    const auto& e = require(key);
    try {
        std::size_t used = 0;
        const double v = std::stod(e.value, &used);
        if (used != e.value.size()) throw std::invalid_argument(e.value);
        return v;
    } catch (const std::exception&) {
        throw error_at(key, "'" + e.value + "' is not a number");
    }
}

double KeyValueConfig::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

bool KeyValueConfig::get_bool_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = get_string(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw error_at(key, "'" + v + "' is not a boolean (true/false)");
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key) const {
    return split_list(require(key).value);
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : get_list(key)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw error_at(key, "'" + item + "' is not a number");
        }
    }
    return out;
}

std::vector<int> KeyValueConfig::get_int_list(const std::string& key) const {
    std::vector<int> out;
    for (const auto& item : get_list(key)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw error_at(key, "'" + item + "' is not an integer");
        }
    }
    return out;
}

void KeyValueConfig::finish() const {
    for (const auto& [key, entry] : entries_) {
        if (!entry.consumed) {
            throw ConfigError(name_ + ":" + std::to_string(entry.line) + ": unknown key '" + key +
                              "'");
        }
    }
}

StrategyKind strategy_kind_from_name(const std::string& name) {
    if (name == "fedavg_uniform") return StrategyKind::FedAvgUniform;
    if (name == "fedavg_size") return StrategyKind::FedAvgSizeWeighted;
    if (name == "shapfed_wa") return StrategyKind::ShapFedWA;
    if (name == "shapfed") return StrategyKind::ShapFed;
    if (name == "cgsv") return StrategyKind::CgsvWeighted;
    throw ConfigError("unknown strategy '" + name +
                      "' (expected fedavg_uniform, fedavg_size, shapfed_wa, shapfed or cgsv)");
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValueConfig& kv) {
    ExperimentConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(kv.get_int_or("seed", 0));

    const std::string kind = kv.get_string("model.kind");
    if (kind == "logistic") {
        cfg.model.kind = ModelKind::Logistic;
    } else if (kind == "mlp") {
        cfg.model.kind = ModelKind::Mlp;
    } else {
        throw kv.error_at("model.kind", "'" + kind + "' is not a model kind (logistic or mlp)");
    }
    cfg.model.input_dim = static_cast<int>(kv.get_int("model.input_dim"));
    cfg.model.num_classes = static_cast<int>(kv.get_int("model.num_classes"));
    if (cfg.model.kind == ModelKind::Mlp) {
        cfg.model.hidden_dim = static_cast<int>(kv.get_int("model.hidden_dim"));
    }

    const std::string source = kv.get_string_or("data.source", "blobs");
    if (source == "blobs") {
        cfg.source = DataSource::Blobs;
        cfg.blobs.per_class = static_cast<int>(kv.get_int_or("data.blobs.per_class", 100));
        cfg.blobs.separation = kv.get_double_or("data.blobs.separation", 6.0);
    } else if (source == "csv") {
        cfg.source = DataSource::Csv;
        cfg.csv.path = kv.get_string("data.csv.path");
        cfg.csv.label_column = kv.get_string_or("data.csv.label_column", "label");
    } else {
        throw kv.error_at("data.source", "'" + source + "' is not a data source (blobs or csv)");
    }

    cfg.n = static_cast<int>(kv.get_int("experiment.n"));
    if (cfg.n < 1) throw kv.error_at("experiment.n", "n must be >= 1");
    cfg.valset_fraction = kv.get_double_or("experiment.valset_fraction", 0.2);
    if (cfg.valset_fraction <= 0.0 || cfg.valset_fraction >= 1.0) {
        throw kv.error_at("experiment.valset_fraction", "valset fraction must lie in (0, 1)");
    }
    cfg.output_dir = kv.get_string_or("experiment.output_dir", "out");

    const std::string pkind = kv.get_string_or("partition.kind", "equal");
    if (pkind == "equal") {
        cfg.partition_spec = EqualSplit{};
    } else if (pkind == "imbalanced") {
        ImbalancedSplit imb;
        imb.major_classes = kv.get_int_list("partition.imbalanced.major_classes");
        imb.major_prob = kv.get_double("partition.imbalanced.major_prob");
        cfg.partition_spec = imb;
    } else if (pkind == "class_probability_matrix") {
        ClassProbabilitySplit cpm;
        for (int i = 0; i < cfg.n; ++i) {
            cpm.probs.push_back(kv.get_double_list("partition.probs." + std::to_string(i)));
        }
        cfg.partition_spec = cpm;
    } else if (pkind == "label_skew_exclusive") {
        LabelSkewExclusiveSplit skew;
        skew.exclusive_class = static_cast<int>(kv.get_int("partition.label_skew.class"));
        skew.owner = static_cast<int>(kv.get_int_or("partition.label_skew.owner", 0));
        cfg.partition_spec = skew;
    } else {
        throw kv.error_at("partition.kind", "'" + pkind + "' is not a partition kind");
    }

    // Shared training defaults, overridable per strategy.
    StrategyConfig base;
    base.eta = kv.get_double_or("train.eta", 0.01);
    base.mu = kv.get_double_or("train.mu", 0.9);
    base.local_epochs = static_cast<int>(kv.get_int_or("train.local_epochs", 1));
    base.batch_size = static_cast<int>(kv.get_int_or("train.batch_size", 32));
    base.rounds = static_cast<int>(kv.get_int_or("train.rounds", 50));

    const auto names = kv.get_list("strategies");
    if (names.empty()) throw kv.error_at("strategies", "at least one strategy is required");
    for (const auto& name : names) {
        NamedStrategy s;
        s.name = name;
        s.config = base;
        s.config.kind = strategy_kind_from_name(name);
        const std::string prefix = "strategy." + name + ".";
        s.config.eta = kv.get_double_or(prefix + "eta", s.config.eta);
        s.config.mu = kv.get_double_or(prefix + "mu", s.config.mu);
        s.config.local_epochs =
            static_cast<int>(kv.get_int_or(prefix + "local_epochs", s.config.local_epochs));
        s.config.batch_size =
            static_cast<int>(kv.get_int_or(prefix + "batch_size", s.config.batch_size));
        s.config.rounds = static_cast<int>(kv.get_int_or(prefix + "rounds", s.config.rounds));
        s.config.force_uniform_weights =
            kv.get_bool_or(prefix + "force_uniform_weights", false);
        cfg.strategies.push_back(std::move(s));
    }

    cfg.byzantine.participant = static_cast<int>(kv.get_int_or("byzantine.participant", -1));
    cfg.byzantine.sigma = kv.get_double_or("byzantine.sigma", 1.0);

    kv.finish();
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    return from_kv(KeyValueConfig::parse_file(path));
}

void ExperimentConfig::validate() const {
    model.validate();
    if (strategies.empty()) throw ConfigError("at least one strategy is required");
    for (const auto& s : strategies) s.config.validate();
    if (source == DataSource::Blobs) {
        if (blobs.per_class < 1) throw ConfigError("data.blobs.per_class must be >= 1");
        if (blobs.separation <= 0.0) throw ConfigError("data.blobs.separation must be > 0");
    }
    if (byzantine.participant >= n) {
        throw ConfigError("byzantine.participant out of range for n = " + std::to_string(n));
    }
}

}  // namespace shapfed
