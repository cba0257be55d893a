#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "shapfed/data.hpp"
#include "shapfed/federation.hpp"

namespace shapfed {

// Flat `key = value` file with dotted section names and '#' comments.
// Errors carry "<file>:<line>" anchors. Every key must be consumed by the
// time finish() is called, so typos surface as config errors.
class KeyValueConfig {
public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_string(const std::string& text, const std::string& name);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string_or(const std::string& key, const std::string& fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int_or(const std::string& key, long long fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<int> get_int_list(const std::string& key) const;

    // Throws on the first key that was never read.
    void finish() const;

    const std::string& source_name() const { return name_; }
    ConfigError error_at(const std::string& key, const std::string& message) const;

private:
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool consumed = false;
    };
    std::map<std::string, Entry> entries_;
    std::string name_;

    const Entry& require(const std::string& key) const;
};

enum class DataSource { Blobs, Csv };

struct BlobsParams {
    int per_class = 100;
    double separation = 6.0;
};

struct CsvParams {
    std::string path;
    std::string label_column;
};

struct NamedStrategy {
    std::string name;  // used for output filenames
    StrategyConfig config;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    ModelSpec model;
    DataSource source = DataSource::Blobs;
    BlobsParams blobs;
    CsvParams csv;
    PartitionSpec partition_spec = EqualSplit{};
    int n = 2;
    double valset_fraction = 0.2;
    std::string output_dir = "out";
    std::vector<NamedStrategy> strategies;
    ByzantineSpec byzantine;

    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_kv(const KeyValueConfig& kv);
    void validate() const;
};

StrategyKind strategy_kind_from_name(const std::string& name);

}  // namespace shapfed
