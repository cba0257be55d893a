#include "shapfed/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace shapfed {
namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<std::vector<double>> blob_means(int m, int d, double separation, std::mt19937_64& rng) {
    std::vector<std::vector<double>> means(static_cast<std::size_t>(m),
                                           std::vector<double>(static_cast<std::size_t>(d), 0.0));
    if (d >= m) {
        // Scaled standard-basis simplex, centered; every pairwise distance
        // equals separation exactly.
        const double s = separation / std::sqrt(2.0);
        for (int j = 0; j < m; ++j) means[j][j] = s;
        const double shift = s / m;
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) means[j][k] -= shift;
    } else {
        // Low-dimensional fallback: ring in the first two coordinates with
        // adjacent chord length = separation.
        const double r = separation / (2.0 * std::sin(kPi / m));
        for (int j = 0; j < m; ++j) {
            means[j][0] = r * std::cos(2.0 * kPi * j / m);
            means[j][1] = r * std::sin(2.0 * kPi * j / m);
        }
    }

    // Haar-ish random rotation: Gram-Schmidt on a Gaussian matrix.
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::vector<double>> q(static_cast<std::size_t>(d),
                                       std::vector<double>(static_cast<std::size_t>(d), 0.0));
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) q[c][r] = gauss(rng);
        for (int prev = 0; prev < c; ++prev) {
            double dot = 0.0;
            for (int r = 0; r < d; ++r) dot += q[c][r] * q[prev][r];
            for (int r = 0; r < d; ++r) q[c][r] -= dot * q[prev][r];
        }
        double norm = 0.0;
        for (int r = 0; r < d; ++r) norm += q[c][r] * q[c][r];
        norm = std::sqrt(norm);
        for (int r = 0; r < d; ++r) q[c][r] /= norm;
    }
    for (auto& mean : means) {
        std::vector<double> rotated(static_cast<std::size_t>(d), 0.0);
        for (int r = 0; r < d; ++r) {
            double s = 0.0;
            for (int c = 0; c < d; ++c) s += q[c][r] * mean[c];
            rotated[r] = s;
        }
        mean = std::move(rotated);
    }
    return means;
}

// Largest-remainder apportionment of `total` items across fractions.
std::vector<int> apportion(const std::vector<double>& fractions, int total) {
    const int n = static_cast<int>(fractions.size());
    std::vector<int> counts(n, 0);
    std::vector<std::pair<double, int>> remainders;  // (-remainder, index) for stable sort
    int assigned = 0;
    for (int i = 0; i < n; ++i) {
        const double target = fractions[i] * total;
        counts[i] = static_cast<int>(std::floor(target));
        assigned += counts[i];
        remainders.emplace_back(-(target - counts[i]), i);
    }
    std::sort(remainders.begin(), remainders.end());
    for (int k = 0; k < total - assigned; ++k) counts[remainders[k].second] += 1;
    return counts;
}

std::vector<std::vector<double>> fraction_matrix(const PartitionSpec& spec, int n, int m) {
    std::vector<std::vector<double>> fr(static_cast<std::size_t>(n),
                                        std::vector<double>(static_cast<std::size_t>(m), 1.0 / n));
    if (std::holds_alternative<EqualSplit>(spec)) return fr;

    if (const auto* imb = std::get_if<ImbalancedSplit>(&spec)) {
        if (imb->major_prob <= 0.0 || imb->major_prob >= 1.0) {
            throw ConfigError("imbalanced major_prob must lie in (0, 1)");
        }
        if (n < 2) throw ConfigError("imbalanced split requires n >= 2");
        for (int cls : imb->major_classes) {
            if (cls < 0 || cls >= m) {
                throw ConfigError("imbalanced major class " + std::to_string(cls) +
                                  " out of range [0, " + std::to_string(m) + ")");
            }
            fr[0][cls] = imb->major_prob;
            const double rest = (1.0 - imb->major_prob) / (n - 1);
            for (int i = 1; i < n; ++i) fr[i][cls] = rest;
        }
        return fr;
    }

    if (const auto* cpm = std::get_if<ClassProbabilitySplit>(&spec)) {
        if (static_cast<int>(cpm->probs.size()) != n) {
            throw ConfigError("class probability matrix has " +
                              std::to_string(cpm->probs.size()) + " rows, expected n = " +
                              std::to_string(n));
        }
        for (int i = 0; i < n; ++i) {
            if (static_cast<int>(cpm->probs[i].size()) != m) {
                throw ConfigError("class probability row " + std::to_string(i) + " has " +
                                  std::to_string(cpm->probs[i].size()) + " entries, expected M = " +
                                  std::to_string(m));
            }
        }
        for (int j = 0; j < m; ++j) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i) {
                if (cpm->probs[i][j] < 0.0) throw ConfigError("allocation fractions must be >= 0");
                sum += cpm->probs[i][j];
            }
            if (std::abs(sum - 1.0) > 1e-9) {
                throw ConfigError("class " + std::to_string(j) +
                                  " allocation fractions sum to " + std::to_string(sum) +
                                  ", expected 1");
            }
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) fr[i][j] = cpm->probs[i][j];
        return fr;
    }

    const auto& skew = std::get<LabelSkewExclusiveSplit>(spec);
    if (skew.exclusive_class < 0 || skew.exclusive_class >= m) {
        throw ConfigError("label-skew exclusive class out of range");
    }
    if (skew.owner < 0 || skew.owner >= n) {
        throw ConfigError("label-skew owner index out of range");
    }
    for (int i = 0; i < n; ++i) fr[i][skew.exclusive_class] = 0.0;
    fr[skew.owner][skew.exclusive_class] = 1.0;
    return fr;
}

void append_row(Dataset& out, const Dataset& src, int row) {
    const auto* x = src.features.data() + static_cast<std::size_t>(row) * src.dim;
    out.features.insert(out.features.end(), x, x + src.dim);
    out.labels.push_back(src.labels[row]);
}

}  // namespace

Dataset gen_blobs(int num_classes, int dim, int per_class, double separation, std::uint64_t seed) {
    if (num_classes < 2) throw ConfigError("gen_blobs requires num_classes >= 2");
    if (dim < 2) throw ConfigError("gen_blobs requires dim >= 2");
    if (per_class < 1) throw ConfigError("gen_blobs requires per_class >= 1");
    if (separation <= 0.0) throw ConfigError("gen_blobs requires separation > 0");

    std::mt19937_64 rng(mix_seed(seed, 0xb10b5));
    const auto means = blob_means(num_classes, dim, separation, rng);

    Dataset out;
    out.dim = dim;
    out.num_classes = num_classes;
    out.features.reserve(static_cast<std::size_t>(num_classes) * per_class * dim);
    out.labels.reserve(static_cast<std::size_t>(num_classes) * per_class);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int j = 0; j < num_classes; ++j) {
        for (int s = 0; s < per_class; ++s) {
            for (int k = 0; k < dim; ++k) out.features.push_back(means[j][k] + gauss(rng));
            out.labels.push_back(j);
        }
    }
    return out;
}

std::vector<Dataset> partition(const Dataset& data, const PartitionSpec& spec, int n,
                               std::uint64_t seed) {
    if (n < 1) throw ConfigError("partition requires n >= 1");
    if (data.size() < 1) throw InputError("cannot partition an empty dataset");
    const int m = data.num_classes;
    const auto fractions = fraction_matrix(spec, n, m);

    // Bucket sample indices by class; shuffle each bucket deterministically.
    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(m));
    for (int i = 0; i < data.size(); ++i) by_class[data.labels[i]].push_back(i);

    std::vector<std::vector<int>> shard_rows(static_cast<std::size_t>(n));
    for (int j = 0; j < m; ++j) {
        std::mt19937_64 rng(mix_seed(seed, 0xc1a55, static_cast<std::uint64_t>(j)));
        std::shuffle(by_class[j].begin(), by_class[j].end(), rng);
        std::vector<double> col(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) col[i] = fractions[i][j];
        const auto counts = apportion(col, static_cast<int>(by_class[j].size()));
        int cursor = 0;
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < counts[i]; ++k) shard_rows[i].push_back(by_class[j][cursor++]);
        }
    }

    std::vector<Dataset> shards(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::mt19937_64 rng(mix_seed(seed, 0x5a4d, static_cast<std::uint64_t>(i)));
        std::shuffle(shard_rows[i].begin(), shard_rows[i].end(), rng);
        shards[i].dim = data.dim;
        shards[i].num_classes = m;
        shards[i].features.reserve(shard_rows[i].size() * static_cast<std::size_t>(data.dim));
        for (int row : shard_rows[i]) append_row(shards[i], data, row);
    }
    return shards;
}

Dataset load_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw InputError(path + ": empty file");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    int label_idx = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == label_column) label_idx = static_cast<int>(i);
    }
    if (label_idx < 0) throw InputError(path + ": no column named '" + label_column + "'");

    Dataset out;
    out.dim = static_cast<int>(header.size()) - 1;
    if (out.dim < 1) throw InputError(path + ": no feature columns");
    int row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        int col = 0;
        int cells = 0;
        while (std::getline(ss, cell, ',')) {
            const bool is_label = (col == label_idx);
            try {
                std::size_t used = 0;
                if (is_label) {
                    const int v = std::stoi(cell, &used);
                    if (used != cell.size()) throw std::invalid_argument(cell);
                    if (v < 0) throw InputError(path + ": row " + std::to_string(row_no) +
                                                ": negative label");
                    out.labels.push_back(v);
                } else {
                    const double v = std::stod(cell, &used);
                    if (used != cell.size()) throw std::invalid_argument(cell);
                    out.features.push_back(v);
                }
            } catch (const std::invalid_argument&) {
                throw InputError(path + ": row " + std::to_string(row_no) + ": cannot parse '" +
                                 cell + "' as " + (is_label ? "integer label" : "number"));
            } catch (const std::out_of_range&) {
                throw InputError(path + ": row " + std::to_string(row_no) + ": value '" + cell +
                                 "' out of range");
            }
            ++col;
            ++cells;
        }
        if (cells != static_cast<int>(header.size())) {
            throw InputError(path + ": row " + std::to_string(row_no) + ": expected " +
                             std::to_string(header.size()) + " cells, got " + std::to_string(cells));
        }
    }
    if (out.labels.empty()) throw InputError(path + ": no data rows");
    out.num_classes = *std::max_element(out.labels.begin(), out.labels.end()) + 1;
    return out;
}

void save_csv(const Dataset& data, const std::string& path, const std::string& label_column) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path);
    for (int k = 0; k < data.dim; ++k) out << "f" << k << ",";
    out << label_column << "\n";
    for (int i = 0; i < data.size(); ++i) {
        const double* x = data.features.data() + static_cast<std::size_t>(i) * data.dim;
        for (int k = 0; k < data.dim; ++k) out << format_double(x[k]) << ",";
        out << data.labels[i] << "\n";
    }
}

std::vector<long long> class_histogram(const Dataset& data) {
    std::vector<long long> counts(static_cast<std::size_t>(data.num_classes), 0);
    for (int label : data.labels) counts[label] += 1;
    return counts;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& data, double val_fraction,
                                             std::uint64_t seed) {
    if (val_fraction <= 0.0 || val_fraction >= 1.0) {
        throw ConfigError("valset fraction must lie in (0, 1)");
    }
    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(data.num_classes));
    for (int i = 0; i < data.size(); ++i) by_class[data.labels[i]].push_back(i);

    Dataset train, val;
    train.dim = val.dim = data.dim;
    train.num_classes = val.num_classes = data.num_classes;
    for (int j = 0; j < data.num_classes; ++j) {
        auto& rows = by_class[j];
        std::mt19937_64 rng(mix_seed(seed, 0x57a7, static_cast<std::uint64_t>(j)));
        std::shuffle(rows.begin(), rows.end(), rng);
        const int nj = static_cast<int>(rows.size());
        int k = static_cast<int>(std::llround(val_fraction * nj));
        k = std::clamp(k, nj >= 2 ? 1 : 0, nj >= 2 ? nj - 1 : 0);
        for (int i = 0; i < nj; ++i) append_row(i < k ? val : train, data, rows[i]);
    }
    return {std::move(train), std::move(val)};
}

}  // namespace shapfed
