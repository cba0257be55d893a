#pragma once

#include <string>
#include <vector>

#include "shapfed/config.hpp"
#include "shapfed/io.hpp"

namespace shapfed {

struct PreparedData {
    Dataset valset;
    std::vector<Dataset> shards;
};

// Builds the dataset (blobs or CSV), carves a class-stratified valset, and
// partitions the rest. The same config and seed always produce the same
// shards, so strategies within one run stay comparable.
PreparedData prepare_data(const ExperimentConfig& cfg);

// Subcommand bodies. They throw ConfigError / InputError on bad inputs;
// run_cli maps exceptions to exit codes (config error 2, runtime 1).
void cmd_run(const ExperimentConfig& cfg, int workers);
void cmd_shapley_audit(const ExperimentConfig& cfg, int workers);
void cmd_partition_report(const ExperimentConfig& cfg);

int run_cli(int argc, char** argv);

}  // namespace shapfed
