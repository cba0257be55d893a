#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "shapfed/model.hpp"

using namespace shapfed;

namespace {

ModelSpec logistic_spec(int d, int m) {
    ModelSpec s;
    s.kind = ModelKind::Logistic;
    s.input_dim = d;
    s.num_classes = m;
    return s;
}

ModelSpec mlp_spec(int d, int h, int m) {
    ModelSpec s;
    s.kind = ModelKind::Mlp;
    s.input_dim = d;
    s.hidden_dim = h;
    s.num_classes = m;
    return s;
}

Batch random_batch(const ModelSpec& spec, int count, std::mt19937_64& rng) {
    Batch b;
    b.dim = spec.input_dim;
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<int> label(0, spec.num_classes - 1);
    for (int i = 0; i < count; ++i) {
        for (int k = 0; k < spec.input_dim; ++k) b.features.push_back(gauss(rng));
        b.labels.push_back(label(rng));
    }
    return b;
}

// Independent oracle: naive triple-loop affine map for logistic logits.
// Deliberately mirrors nothing from the library implementation.
std::vector<double> naive_logistic_logits(const ParamVector& p, int d, int m,
                                          const std::vector<double>& x, int count) {
    std::vector<double> out(static_cast<std::size_t>(count) * m, 0.0);
    for (int b = 0; b < count; ++b) {
        for (int j = 0; j < m; ++j) {
            double s = p[static_cast<std::size_t>(m) * d + j];  // bias block after W
            for (int k = 0; k < d; ++k) {
                s += p[static_cast<std::size_t>(j) * d + k] * x[static_cast<std::size_t>(b) * d + k];
            }
            out[static_cast<std::size_t>(b) * m + j] = s;
        }
    }
    return out;
}

// Central finite differences of the batch loss, coordinate by coordinate.
double fd_partial(const ParamVector& params, const ModelSpec& spec, const Batch& batch,
                  std::size_t coord, double step) {
    ParamVector hi = params, lo = params;
    hi[coord] += step;
    lo[coord] -= step;
    return (loss_and_grad(hi, spec, batch).loss - loss_and_grad(lo, spec, batch).loss) /
           (2.0 * step);
}

void check_gradient(const ModelSpec& spec, const ParamVector& params, const Batch& batch) {
    const LossGrad lg = loss_and_grad(params, spec, batch);
    for (std::size_t c = 0; c < params.size(); ++c) {
        const double fd = fd_partial(params, spec, batch, c, 1e-5);
        const double denom = std::max({std::abs(lg.grad[c]), std::abs(fd), 1e-2});
        CHECK(std::abs(lg.grad[c] - fd) / denom < 1e-5);
    }
}

}  // namespace

TEST_CASE("init_params sizes and determinism") {
    const auto p = init_params(logistic_spec(2, 2), 7);
    CHECK(p.size() == 6);
    CHECK(init_params(logistic_spec(2, 2), 7) == p);

    const auto q = init_params(mlp_spec(3, 4, 2), 0);
    CHECK(q.size() == 26);

    // biases zero, weights within the fan-in scale
    CHECK(p[4] == 0.0);
    CHECK(p[5] == 0.0);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(p[i]) <= 1.0 / std::sqrt(2.0));
}

TEST_CASE("init_params differs across seeds") {
    CHECK(init_params(logistic_spec(8, 3), 1) != init_params(logistic_spec(8, 3), 2));
}

TEST_CASE("forward zero params gives zero logits") {
    const ModelSpec spec = logistic_spec(3, 4);
    const ParamVector zeros(spec.param_count(), 0.0);
    const std::vector<double> x = {1.5, -2.0, 0.25, 3.0, 0.0, -1.0};
    for (double v : forward(zeros, spec, x.data(), 2)) CHECK(v == 0.0);

    const ModelSpec mspec = mlp_spec(3, 5, 4);
    const ParamVector mzeros(mspec.param_count(), 0.0);
    for (double v : forward(mzeros, mspec, x.data(), 2)) CHECK(v == 0.0);
}

TEST_CASE("forward identity weights reproduce the input") {
    const ModelSpec spec = logistic_spec(3, 3);
    ParamVector p(spec.param_count(), 0.0);
    for (int j = 0; j < 3; ++j) p[static_cast<std::size_t>(j) * 3 + j] = 1.0;  // W = I
    const std::vector<double> e1 = {1.0, 0.0, 0.0};
    const auto logits = forward(p, spec, e1.data(), 1);
    CHECK(logits[0] == doctest::Approx(1.0));
    CHECK(logits[1] == doctest::Approx(0.0));
    CHECK(logits[2] == doctest::Approx(0.0));
}

TEST_CASE("forward matches the naive matmul oracle") {
    std::mt19937_64 rng(11);
    const ModelSpec spec = logistic_spec(5, 3);
    const ParamVector p = init_params(spec, 99);
    const Batch batch = random_batch(spec, 7, rng);
    const auto got = forward(p, spec, batch.features.data(), batch.size());
    const auto want = naive_logistic_logits(p, 5, 3, batch.features, batch.size());
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("forward shape errors") {
    const ModelSpec spec = logistic_spec(3, 2);
    const ParamVector wrong(5, 0.0);
    const std::vector<double> x(3, 0.0);
    CHECK_THROWS_AS(forward(wrong, spec, x.data(), 1), ShapeError);
}

TEST_CASE("loss at zero params is ln(M)") {
    for (int m : {2, 3, 5}) {
        const ModelSpec spec = logistic_spec(4, m);
        const ParamVector zeros(spec.param_count(), 0.0);
        std::mt19937_64 rng(3);
        const Batch batch = random_batch(spec, 12, rng);
        const double loss = loss_and_grad(zeros, spec, batch).loss;
        CHECK(std::abs(loss - std::log(static_cast<double>(m))) < 1e-12);
    }
}

TEST_CASE("gradients match central finite differences") {
    std::mt19937_64 rng(17);
    SUBCASE("logistic") {
        const ModelSpec spec = logistic_spec(4, 3);
        check_gradient(spec, init_params(spec, 5), random_batch(spec, 6, rng));
    }
    SUBCASE("mlp") {
        const ModelSpec spec = mlp_spec(3, 4, 3);
        check_gradient(spec, init_params(spec, 5), random_batch(spec, 6, rng));
    }
}

TEST_CASE("gradient property over 100 random triples") {
    std::mt19937_64 rng(20250810);
    for (int trial = 0; trial < 100; ++trial) {
        const bool mlp = trial % 2 == 1;
        std::uniform_int_distribution<int> dim(2, 5);
        const int d = dim(rng), m = dim(rng), h = dim(rng);
        const ModelSpec spec = mlp ? mlp_spec(d, h, std::max(m, 2)) : logistic_spec(d, std::max(m, 2));
        const ParamVector params = init_params(spec, 1000 + trial);
        const Batch batch = random_batch(spec, 4 + trial % 5, rng);
        check_gradient(spec, params, batch);
    }
}

TEST_CASE("mean reduction is invariant to batch duplication") {
    const ModelSpec spec = logistic_spec(3, 3);
    std::mt19937_64 rng(9);
    const ParamVector p = init_params(spec, 2);
    const Batch batch = random_batch(spec, 5, rng);
    Batch doubled = batch;
    doubled.features.insert(doubled.features.end(), batch.features.begin(), batch.features.end());
    doubled.labels.insert(doubled.labels.end(), batch.labels.begin(), batch.labels.end());

    const LossGrad a = loss_and_grad(p, spec, batch);
    const LossGrad b = loss_and_grad(p, spec, doubled);
    CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-12));
    for (std::size_t i = 0; i < a.grad.size(); ++i) {
        CHECK(a.grad[i] == doctest::Approx(b.grad[i]).epsilon(1e-12));
    }
}

TEST_CASE("label out of range is an input error") {
    const ModelSpec spec = logistic_spec(2, 2);
    Batch batch;
    batch.dim = 2;
    batch.features = {0.0, 1.0};
    batch.labels = {2};
    CHECK_THROWS_AS(loss_and_grad(init_params(spec, 0), spec, batch), InputError);
}

TEST_CASE("sgd_step arithmetic") {
    CHECK(sgd_step({1.0, 1.0}, {1.0, 2.0}, 0.5) == ParamVector{0.5, 0.0});
    const ParamVector w = {3.0, -1.0, 2.5};
    CHECK(sgd_step(w, {0.0, 0.0, 0.0}, 0.7) == w);
    CHECK_THROWS_AS(sgd_step(w, {1.0}, 0.1), ShapeError);
}

TEST_CASE("sgd descends a 1-d quadratic monotonically below the curvature threshold") {
    // f(w) = 0.5 * c * w^2, grad = c * w; eta < 2/c contracts |w| each step.
    const double c = 2.0;
    const double eta = 0.3;
    ParamVector w = {5.0};
    double prev = 0.5 * c * w[0] * w[0];
    for (int step = 0; step < 50; ++step) {
        w = sgd_step(w, {c * w[0]}, eta);
        const double loss = 0.5 * c * w[0] * w[0];
        CHECK(loss < prev);
        prev = loss;
    }
}

TEST_CASE("extract_last_layer layout") {
    SUBCASE("logistic columns match flat offsets") {
        const ModelSpec spec = logistic_spec(2, 3);
        ParamVector p(spec.param_count());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<double>(i);
        const LastLayerMatrix ll = extract_last_layer(p, spec);
        REQUIRE(ll.num_classes() == 3);
        REQUIRE(ll.rows() == 2);
        CHECK(ll.columns[0] == std::vector<double>{0.0, 1.0});
        CHECK(ll.columns[1] == std::vector<double>{2.0, 3.0});
        CHECK(ll.columns[2] == std::vector<double>{4.0, 5.0});
    }
    SUBCASE("mlp columns have length P, not d") {
        const ModelSpec spec = mlp_spec(5, 4, 2);
        const LastLayerMatrix ll = extract_last_layer(init_params(spec, 3), spec);
        CHECK(ll.num_classes() == 2);
        CHECK(ll.rows() == 4);
    }
}

TEST_CASE("extract then write back is the identity") {
    for (const ModelSpec& spec : {logistic_spec(4, 3), mlp_spec(3, 6, 4)}) {
        const ParamVector p = init_params(spec, 21);
        const LastLayerMatrix ll = extract_last_layer(p, spec);
        CHECK(write_back_last_layer(p, spec, ll) == p);
    }
}

TEST_CASE("logistic forward is positively homogeneous in the weights") {
    const ModelSpec spec = logistic_spec(3, 3);
    ParamVector p = init_params(spec, 8);
    // zero the bias so scaling W scales the logits exactly
    for (std::size_t i = 9; i < p.size(); ++i) p[i] = 0.0;
    ParamVector scaled = p;
    for (std::size_t i = 0; i < 9; ++i) scaled[i] *= 3.0;

    std::mt19937_64 rng(4);
    const Batch batch = random_batch(spec, 4, rng);
    const auto base = forward(p, spec, batch.features.data(), batch.size());
    const auto big = forward(scaled, spec, batch.features.data(), batch.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(big[i] == doctest::Approx(3.0 * base[i]).epsilon(1e-12));
    }
}
