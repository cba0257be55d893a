#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "shapfed/data.hpp"
#include "shapfed/federation.hpp"
#include "shapfed/metrics.hpp"

using namespace shapfed;

namespace {

// Multiset view of a dataset for conservation checks.
std::multiset<std::pair<std::vector<double>, int>> as_multiset(const Dataset& d) {
    std::multiset<std::pair<std::vector<double>, int>> out;
    for (int i = 0; i < d.size(); ++i) {
        const double* x = d.features.data() + static_cast<std::size_t>(i) * d.dim;
        out.emplace(std::vector<double>(x, x + d.dim), d.labels[i]);
    }
    return out;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("gen_blobs counts and determinism") {
    const Dataset d = gen_blobs(2, 2, 50, 6.0, 1);
    CHECK(d.size() == 100);
    CHECK(d.dim == 2);
    const auto hist = class_histogram(d);
    CHECK(hist == std::vector<long long>{50, 50});

    const Dataset again = gen_blobs(2, 2, 50, 6.0, 1);
    CHECK(again.features == d.features);
    CHECK(again.labels == d.labels);

    const Dataset other = gen_blobs(2, 2, 50, 6.0, 2);
    CHECK(other.features != d.features);
}

TEST_CASE("gen_blobs mean separation holds after rotation") {
    for (std::uint64_t seed : {0ULL, 5ULL, 9ULL}) {
        const int m = 4, dim = 4, per = 30;
        const double sep = 7.0;
        const Dataset d = gen_blobs(m, dim, per, sep, seed);
        // class means of the sampled data should sit near the true means;
        // check pairwise distance >= sep - sampling slack
        std::vector<std::vector<double>> mean(m, std::vector<double>(dim, 0.0));
        for (int i = 0; i < d.size(); ++i) {
            for (int k = 0; k < dim; ++k) {
                mean[d.labels[i]][k] += d.features[static_cast<std::size_t>(i) * dim + k] / per;
            }
        }
        for (int a = 0; a < m; ++a) {
            for (int b = a + 1; b < m; ++b) {
                double dist2 = 0.0;
                for (int k = 0; k < dim; ++k) {
                    dist2 += (mean[a][k] - mean[b][k]) * (mean[a][k] - mean[b][k]);
                }
                CHECK(std::sqrt(dist2) > sep - 1.5);
            }
        }
    }
}

TEST_CASE("well separated blobs are learnable") {
    const Dataset d = gen_blobs(2, 2, 100, 10.0, 3);
    ModelSpec spec;
    spec.kind = ModelKind::Logistic;
    spec.input_dim = 2;
    spec.num_classes = 2;
    // 200 SGD steps: batch 25 over 200 samples = 8 steps/epoch, 25 epochs
    const ClientUpdate u = local_train(init_params(spec, 0), spec, d, 0.1, 25, 25, 7);
    CHECK(evaluate(u.final_params, spec, d).balanced_acc > 0.95);
}

TEST_CASE("equal partition of a balanced set divides exactly") {
    const Dataset d = gen_blobs(4, 4, 100, 6.0, 2);
    const auto shards = partition(d, EqualSplit{}, 4, 9);
    REQUIRE(shards.size() == 4);
    for (const auto& s : shards) {
        CHECK(class_histogram(s) == std::vector<long long>{25, 25, 25, 25});
    }
}

TEST_CASE("imbalanced partition gives the major holder its share") {
    const Dataset d = gen_blobs(2, 2, 200, 6.0, 4);
    ImbalancedSplit spec;
    spec.major_classes = {0};
    spec.major_prob = 0.7;
    const auto shards = partition(d, spec, 2, 5);
    const auto h0 = class_histogram(shards[0]);
    CHECK(std::abs(h0[0] - 140) <= 1);  // 70% of 200 class-0 samples
    // minor class split equally
    CHECK(std::abs(h0[1] - 100) <= 1);
}

TEST_CASE("class probability matrix obeys the zero column") {
    const Dataset d = gen_blobs(2, 2, 300, 6.0, 6);
    ClassProbabilitySplit spec;
    spec.probs = {
        {0.4, 0.0}, {0.3, 0.1}, {0.2, 0.2}, {0.1, 0.3}, {0.0, 0.4},
    };
    // second class columns: 0.0+0.1+0.2+0.3+0.4 = 1.0
    const auto shards = partition(d, spec, 5, 7);
    CHECK(class_histogram(shards[4])[0] == 0);
    CHECK(class_histogram(shards[0])[1] == 0);
    CHECK(std::abs(class_histogram(shards[0])[0] - 120) <= 1);
}

TEST_CASE("label skew exclusive ownership") {
    const Dataset d = gen_blobs(3, 3, 90, 6.0, 8);
    LabelSkewExclusiveSplit spec;
    spec.exclusive_class = 0;
    spec.owner = 0;
    const auto shards = partition(d, spec, 3, 11);
    CHECK(class_histogram(shards[0])[0] == 90);
    CHECK(class_histogram(shards[1])[0] == 0);
    CHECK(class_histogram(shards[2])[0] == 0);
    CHECK(class_histogram(shards[1])[1] == 30);
}

TEST_CASE("partition conserves the dataset and respects fractions") {
    const Dataset d = gen_blobs(3, 3, 111, 5.0, 12);  // awkward counts on purpose
    std::vector<PartitionSpec> specs;
    specs.push_back(EqualSplit{});
    specs.push_back(ImbalancedSplit{{0, 2}, 0.65});
    specs.push_back(LabelSkewExclusiveSplit{1, 2});
    ClassProbabilitySplit cpm;
    cpm.probs = {{0.5, 0.25, 0.1}, {0.3, 0.25, 0.2}, {0.2, 0.5, 0.7}};
    specs.push_back(cpm);

    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        for (const auto& spec : specs) {
            const auto shards = partition(d, spec, 3, seed);
            // disjoint union equals the input
            std::multiset<std::pair<std::vector<double>, int>> merged;
            int total = 0;
            for (const auto& s : shards) {
                total += s.size();
                for (auto&& row : as_multiset(s)) merged.insert(row);
            }
            CHECK(total == d.size());
            CHECK(merged == as_multiset(d));
        }
    }
}

TEST_CASE("fraction fidelity within one sample") {
    const Dataset d = gen_blobs(4, 4, 123, 5.0, 13);
    ClassProbabilitySplit cpm;
    cpm.probs = {{0.37, 0.1, 0.25, 0.4},
                 {0.13, 0.2, 0.25, 0.3},
                 {0.29, 0.3, 0.25, 0.2},
                 {0.21, 0.4, 0.25, 0.1}};
    const auto shards = partition(d, cpm, 4, 21);
    const auto full_hist = class_histogram(d);
    for (int i = 0; i < 4; ++i) {
        const auto h = class_histogram(shards[i]);
        for (int j = 0; j < 4; ++j) {
            CHECK(std::abs(h[j] - cpm.probs[i][j] * full_hist[j]) <= 1.0);
        }
    }
}

TEST_CASE("partition determinism") {
    const Dataset d = gen_blobs(3, 3, 60, 6.0, 14);
    const auto a = partition(d, EqualSplit{}, 3, 77);
    const auto b = partition(d, EqualSplit{}, 3, 77);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].features == b[i].features);
        CHECK(a[i].labels == b[i].labels);
    }
}

TEST_CASE("partition spec mismatch is a config error") {
    const Dataset d = gen_blobs(2, 2, 10, 6.0, 1);
    ClassProbabilitySplit bad_rows;
    bad_rows.probs = {{0.5, 0.5}};  // one row for n = 2
    CHECK_THROWS_AS(partition(d, bad_rows, 2, 0), ConfigError);

    ClassProbabilitySplit bad_sum;
    bad_sum.probs = {{0.5, 0.5}, {0.4, 0.5}};
    CHECK_THROWS_AS(partition(d, bad_sum, 2, 0), ConfigError);

    ImbalancedSplit bad_prob;
    bad_prob.major_classes = {0};
    bad_prob.major_prob = 1.0;
    CHECK_THROWS_AS(partition(d, bad_prob, 2, 0), ConfigError);
}

TEST_CASE("csv load basics") {
    const std::string path = temp_path("shapfed_test_basic.csv");
    {
        std::ofstream out(path);
        out << "f0,f1,label\n1.5,2.0,0\n-0.25,1e-3,1\n3,4,0\n";
    }
    const Dataset d = load_csv(path, "label");
    CHECK(d.size() == 3);
    CHECK(d.num_classes == 2);
    CHECK(d.dim == 2);
    CHECK(d.features[0] == 1.5);
    CHECK(d.labels == std::vector<int>{0, 1, 0});
    std::remove(path.c_str());
}

TEST_CASE("csv parse failure names the offending row") {
    const std::string path = temp_path("shapfed_test_bad.csv");
    {
        std::ofstream out(path);
        out << "f0,label\n1.0,0\npotato,1\n";
    }
    try {
        load_csv(path, "label");
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
    std::remove(path.c_str());
}

TEST_CASE("csv write then load round trips") {
    const Dataset d = gen_blobs(3, 4, 20, 5.0, 31);
    const std::string path = temp_path("shapfed_test_roundtrip.csv");
    save_csv(d, path, "label");
    const Dataset back = load_csv(path, "label");
    REQUIRE(back.size() == d.size());
    CHECK(back.labels == d.labels);
    for (std::size_t i = 0; i < d.features.size(); ++i) {
        CHECK(std::abs(back.features[i] - d.features[i]) < 1e-12);
    }
    std::remove(path.c_str());
}

TEST_CASE("class_histogram") {
    const Dataset d = gen_blobs(4, 4, 100, 6.0, 3);
    CHECK(class_histogram(d) == std::vector<long long>{100, 100, 100, 100});

    Dataset sparse;
    sparse.dim = 1;
    sparse.num_classes = 3;
    sparse.features = {0.0, 1.0};
    sparse.labels = {0, 2};
    CHECK(class_histogram(sparse) == std::vector<long long>{1, 0, 1});

    // histogram of the union of shards equals the original
    const auto shards = partition(d, EqualSplit{}, 3, 5);
    std::vector<long long> merged(4, 0);
    for (const auto& s : shards) {
        const auto h = class_histogram(s);
        for (int j = 0; j < 4; ++j) merged[j] += h[j];
    }
    CHECK(merged == class_histogram(d));
}

TEST_CASE("stratified split covers every class") {
    const Dataset d = gen_blobs(5, 5, 40, 5.0, 17);
    const auto [train, val] = stratified_split(d, 0.2, 3);
    CHECK(train.size() + val.size() == d.size());
    const auto vh = class_histogram(val);
    for (long long c : vh) CHECK(c == 8);
    const auto th = class_histogram(train);
    for (long long c : th) CHECK(c == 32);
}
