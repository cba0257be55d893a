#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "shapfed/common.hpp"

namespace shapfed {

struct Dataset {
    std::vector<double> features;  // size x dim, row-major
    std::vector<int> labels;
    int dim = 0;
    int num_classes = 0;

    int size() const { return static_cast<int>(labels.size()); }
};

// Partitioning regimes. All of them reduce internally to an n x M matrix of
// per-class allocation fractions (entry (i, j) = share of class j handed to
// participant i).
struct EqualSplit {};

struct ImbalancedSplit {
    std::vector<int> major_classes;
    double major_prob = 0.7;  // share of each major class held by participant 0
};

struct ClassProbabilitySplit {
    std::vector<std::vector<double>> probs;  // n rows x M cols; columns sum to 1
};

struct LabelSkewExclusiveSplit {
    int exclusive_class = 0;
    int owner = 0;  // remaining classes are split equally among everyone
};

using PartitionSpec =
    std::variant<EqualSplit, ImbalancedSplit, ClassProbabilitySplit, LabelSkewExclusiveSplit>;

// M Gaussian clusters with unit covariance. Means sit at the vertices of a
// scaled simplex when d >= M (a planar ring otherwise), random-rotated per
// seed; minimum pairwise mean distance >= separation either way.
Dataset gen_blobs(int num_classes, int dim, int per_class, double separation, std::uint64_t seed);

// Splits `data` into n disjoint shards whose union is the input. Per-class
// counts follow the spec's fractions via largest-remainder apportionment
// (off by at most one sample per class and participant). Shard-internal
// order is shuffled per seed.
std::vector<Dataset> partition(const Dataset& data, const PartitionSpec& spec, int n,
                               std::uint64_t seed);

// CSV with a header row; features are decimal floats, the label column is
// named. num_classes is inferred as max label + 1. Row order preserved.
Dataset load_csv(const std::string& path, const std::string& label_column);
void save_csv(const Dataset& data, const std::string& path, const std::string& label_column);

std::vector<long long> class_histogram(const Dataset& data);

// Class-stratified (train, val) split used to carve a validation set before
// partitioning; every class with >= 2 samples lands in both halves.
std::pair<Dataset, Dataset> stratified_split(const Dataset& data, double val_fraction,
                                             std::uint64_t seed);

}  // namespace shapfed
