#include <algorithm>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "gnm/error.hpp"
#include "gnm/learn.hpp"

using namespace gnm;

namespace {

// Top ceil(N/10) indices by full sort, (value desc, index asc).
std::vector<int> sorted_top(const Eigen::VectorXd& eps) {
    std::vector<int> idx(static_cast<std::size_t>(eps.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return eps[a] > eps[b]; });
    idx.resize(static_cast<std::size_t>((eps.size() + 9) / 10));
    std::sort(idx.begin(), idx.end());
    return idx;
}

PatternSet single_task(std::uint64_t seed) {
    Rng rng(seed);
    return make_pattern_set(rng, 1, 1, 100, 50, 0.005);
}

}  // namespace

TEST_SUITE("learn") {

TEST_CASE("eligibility") {
    SpikeRaster r(3, 5);
    r.add(1, 3);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(5);
    v[3] = 0.7;
    const Eigen::VectorXd eps = eligibility(r, v);
    CHECK(eps[0] == 0.0);
    CHECK(eps[1] == doctest::Approx(0.7));
    CHECK(eps[2] == 0.0);
    CHECK(eligibility(r, Eigen::VectorXd::Zero(5)).isZero());
    CHECK_THROWS_AS(eligibility(r, Eigen::VectorXd::Zero(4)), DomainError);
}

TEST_CASE("dense eligibility integrates with the trapezoidal rule") {
    StateTrace t;
    t.resize(3);
    t.v << 1.0, 2.0, 3.0;
    t.dt = 0.5;
    Eigen::MatrixXd in = Eigen::MatrixXd::Ones(2, 3);
    in(1, 0) = 0.0;
    const Eigen::VectorXd eps = eligibility(in, t);
    CHECK(eps[0] == doctest::Approx(0.5 * (0.5 * 1.0 + 2.0 + 0.5 * 3.0)));
    CHECK(eps[1] == doctest::Approx(0.5 * (2.0 + 0.5 * 3.0)));
    t.dt = 1.0;
    CHECK(eligibility(in, t)[0] == doctest::Approx(6.0));
}

TEST_CASE("decile gate selects the top tenth") {
    Rng rng(13);
    for (int k = 0; k < 200; ++k) {
        const auto n = static_cast<Eigen::Index>(1 + uniform_index(rng, 150));
        Eigen::VectorXd eps(n);
        for (Eigen::Index i = 0; i < n; ++i) eps[i] = uniform(rng, 0.01, 1.0);
        const auto gate = decile_gate(eps);
        CHECK(gate.size() == static_cast<std::size_t>((n + 9) / 10));
        CHECK(gate == sorted_top(eps));
    }
}

TEST_CASE("decile gate ties and non-positive values") {
    Eigen::VectorXd eps = Eigen::VectorXd::Constant(20, 0.5);
    CHECK(decile_gate(eps) == std::vector<int>{0, 1});
    eps[7] = 0.9;
    CHECK(decile_gate(eps) == std::vector<int>{0, 7});
    CHECK(decile_gate(Eigen::VectorXd::Zero(20)).empty());
    Eigen::VectorXd one = Eigen::VectorXd::Zero(20);
    one[3] = 0.1;
    CHECK(decile_gate(one) == std::vector<int>{3});
}

TEST_CASE("momentum") {
    MomentumState m{Eigen::VectorXd::Ones(1), 0.0};
    CHECK(momentum_apply(Eigen::VectorXd::Constant(1, 0.3), m)[0] == doctest::Approx(0.3));
    MomentumState q{Eigen::VectorXd::Ones(1), 0.2};
    CHECK(momentum_apply(Eigen::VectorXd::Zero(1), q)[0] == doctest::Approx(0.2));
    CHECK(q.prev_delta[0] == doctest::Approx(0.2));
    MomentumState s{Eigen::VectorXd::Zero(1), 0.2};
    const double g = 0.01;
    double delta = 0.0;
    for (int n = 1; n <= 60; ++n) {
        delta = momentum_apply(Eigen::VectorXd::Constant(1, g), s)[0];
        CHECK(delta == doctest::Approx(g * (1.0 - std::pow(0.2, n)) / 0.8).epsilon(1e-12));
    }
    CHECK(delta == doctest::Approx(g / 0.8).epsilon(1e-12));
}

TEST_CASE("aggregate-label update") {
    Rng rng(3);
    const double lambda = 1e-3;
    for (int k = 0; k < 100; ++k) {
        Eigen::VectorXd eps(100), w(100);
        for (Eigen::Index i = 0; i < 100; ++i) {
            eps[i] = uniform(rng, 0.01, 1.0);
            w[i] = uniform(rng, 0.1, 0.9);
        }
        MomentumState m{Eigen::VectorXd::Zero(100), 0.0};
        CHECK(all_update(w, eps, 0, lambda, m) == w);
        const Eigen::VectorXd up = all_update(w, eps, 1, lambda, m);
        const Eigen::VectorXd diff = up - w;
        CHECK((diff.array() > 0.0).count() == 10);
        CHECK((diff.array() < 0.0).count() == 0);
        for (int i : sorted_top(eps)) CHECK(diff[i] == doctest::Approx(lambda));
        MomentumState m2{Eigen::VectorXd::Zero(100), 0.0};
        const Eigen::VectorXd down = all_update(w, eps, -1, lambda, m2);
        CHECK(((down - w).array() > 0.0).count() == 0);
        CHECK(((down - w).array() < 0.0).count() == 10);
    }
}

TEST_CASE("updates clip to the unit interval") {
    Eigen::VectorXd eps = Eigen::VectorXd::LinSpaced(10, 0.1, 1.0);
    MomentumState m{Eigen::VectorXd::Zero(10), 0.2};
    Eigen::VectorXd w = Eigen::VectorXd::Constant(10, 0.99);
    for (int k = 0; k < 20; ++k) w = all_update(w, eps, 1, 0.05, m);
    CHECK(w.maxCoeff() <= 1.0);
    CHECK(w[9] == 1.0);
    for (int k = 0; k < 100; ++k) w = all_update(w, eps, -1, 0.05, m);
    CHECK(w.minCoeff() >= 0.0);
    CHECK(w[9] == 0.0);
}

TEST_CASE("error-trace update") {
    SpikeRaster r(2, 6);
    r.add(0, 1);
    r.add(1, 2);
    r.add(1, 4);
    const Eigen::VectorXd w = Eigen::VectorXd::Constant(2, 0.5);
    const double lambda = 0.01;

    MomentumState m{Eigen::VectorXd::Zero(2), 0.0};
    CHECK(et_update(w, r, Eigen::VectorXd::Zero(6), lambda, m) == w);

    Eigen::VectorXd e = Eigen::VectorXd::Zero(6);
    e[1] = -1.0;
    CHECK(et_update(w, r, e, lambda, m)[0] == doctest::Approx(0.5 - lambda));

    e.setZero();
    e[2] = 1.0;
    e[4] = 1.0;
    MomentumState m2{Eigen::VectorXd::Zero(2), 0.0};
    const Eigen::VectorXd out = et_update(w, r, e, lambda, m2);
    CHECK(out[1] == doctest::Approx(0.5 + 2.0 * lambda));
    CHECK(out[0] == 0.5);
    CHECK_THROWS_AS(et_update(w, r, Eigen::VectorXd::Zero(5), lambda, m2), DomainError);
}

TEST_CASE("training edge cases") {
    const PatternSet set = single_task(1);
    TrainConfig cfg;
    cfg.epochs = 0;
    const TrainResult zero = train(cfg, set);
    CHECK(zero.weights.size() == 100);
    CHECK(zero.history.empty());
    CHECK(zero.weights.minCoeff() >= 0.0);
    CHECK(zero.weights.maxCoeff() <= cfg.init_max);

    cfg.epochs = 50;
    cfg.lambda = 0.0;
    for (Algorithm a : {Algorithm::all, Algorithm::et}) {
        cfg.algorithm = a;
        CHECK(train(cfg, set).weights == zero.weights);
    }
    cfg.epochs = -1;
    CHECK_THROWS_AS(train(cfg, set), ConfigError);
}

TEST_CASE("training is deterministic and keeps weights in range") {
    const PatternSet set = single_task(2);
    TrainConfig cfg;
    cfg.epochs = 200;
    cfg.lambda = 0.01;
    for (Algorithm a : {Algorithm::all, Algorithm::et}) {
        cfg.algorithm = a;
        const TrainResult r1 = train(cfg, set);
        const TrainResult r2 = train(cfg, set);
        CHECK(r1.weights == r2.weights);
        CHECK(r1.weights.minCoeff() >= 0.0);
        CHECK(r1.weights.maxCoeff() <= 1.0);
        CHECK(r1.history.size() == 200);
        cfg.seed = 99;
        CHECK(train(cfg, set).weights != r1.weights);
        cfg.seed = 1;
    }
}

TEST_CASE("LIF neuron trains through the same loop") {
    const PatternSet set = single_task(3);
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.neuron.kind = NeuronKind::lif;
    cfg.neuron.refractory = 3;
    const TrainResult r = train(cfg, set);
    CHECK(r.history.size() == 50);
}

TEST_CASE("weight files round-trip exactly") {
    Rng rng(5);
    const WeightVector w = initial_weights(rng, 37, 1.0);
    std::ostringstream os;
    write_weights(os, w, {{"seed", "5"}, {"model", "gnm"}});
    CHECK(os.str().rfind("GNM-WEIGHTS v1\n37\n", 0) == 0);
    CHECK(os.str().find("# seed=5\n") != std::string::npos);
    std::istringstream is(os.str());
    CHECK(read_weights(is) == w);
    std::istringstream bad("GNM-WEIGHTS v2\n1\n0.5\n");
    CHECK_THROWS_AS(read_weights(bad), ConfigError);
    std::istringstream shortfile("GNM-WEIGHTS v1\n3\n0.5\n");
    CHECK_THROWS_AS(read_weights(shortfile), ConfigError);
}

TEST_CASE("continuous responses score windows by their integral") {
    Rng rng(2);
    PatternSet set = make_pattern_set(rng, 2, 1, 20, 10, 0.1);
    const Episode ep = compose_episode(rng, set, 60, {{5, 0}, {30, 1}}, 0.0);
    NeuronParams p;
    p.alpha = 0.5;
    const Eigen::VectorXd w = Eigen::VectorXd::Constant(20, 1.0);
    const ContinuousResponse resp = respond_continuous(p, ep, w, 0.1);
    REQUIRE(resp.window_integrals.size() == 2);
    CHECK(resp.trace.size() == 601);
    CHECK(resp.window_integrals[0] == doctest::Approx(spike_integral(resp.trace, 1.0, 50, 150)));
    CHECK(resp.noise_integrals.segment(5, 10).isZero());
    CHECK(resp.noise_integrals.minCoeff() >= 0.0);
}

TEST_CASE("input traces decay geometrically") {
    Rng rng(4);
    const SpikeRaster r = generate_pattern(rng, 6, 40, 0.2);
    const Eigen::MatrixXd raw = r.dense();
    const Eigen::MatrixXd x = input_traces(r, 0.8);
    for (Eigen::Index i = 0; i < 6; ++i) {
        double acc = 0.0;
        for (Eigen::Index t = 0; t < 40; ++t) {
            acc = raw(i, t) + 0.8 * acc;
            CHECK(x(i, t) == doctest::Approx(acc).epsilon(1e-12));
        }
    }
    CHECK(input_traces(r, 0.0) == raw);
    CHECK_THROWS_AS(input_traces(r, 1.0), DomainError);
    CHECK_THROWS_AS(input_traces(r, -0.1), DomainError);
}

TEST_CASE("dense error-trace update matches the raster form on raw spikes") {
    Rng rng(6);
    const SpikeRaster r = generate_pattern(rng, 12, 30, 0.3);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(30);
    e.segment(5, 10).setConstant(0.1);
    e[22] = -1.0;
    const WeightVector w = WeightVector::Constant(12, 0.5);
    MomentumState m1{Eigen::VectorXd::Zero(12), 0.2};
    MomentumState m2{Eigen::VectorXd::Zero(12), 0.2};
    const WeightVector a = et_update(w, r, e, 0.05, m1);
    const WeightVector b = et_update(w, input_traces(r, 0.0), e, 0.05, m2);
    CHECK(a.isApprox(b, 1e-14));
    CHECK(et_update(w, input_traces(r, 0.5), Eigen::VectorXd::Zero(30), 0.05, m2) == w);
    CHECK_THROWS_AS(et_update(w, Eigen::MatrixXd::Zero(11, 30), e, 0.05, m2), DomainError);
}

TEST_CASE("error-trace blame decay is validated and selectable") {
    const PatternSet set = single_task(8);
    TrainConfig cfg;
    cfg.algorithm = Algorithm::et;
    cfg.lambda = default_lambda(Algorithm::et);
    cfg.epochs = 100;
    cfg.trace_keep = 1.0;
    CHECK_THROWS_AS(train(cfg, set), ConfigError);
    cfg.trace_keep = 0.0;
    const WeightVector raw = train(cfg, set).weights;
    cfg.trace_keep = 0.95;
    CHECK(train(cfg, set).weights != raw);
    CHECK(default_lambda(Algorithm::all) == 1e-4);
    CHECK(default_lambda(Algorithm::et) == 2e-3);
}

TEST_CASE("held-out presentations cycle through the patterns") {
    Rng rng(3);
    const PatternSet set = make_pattern_set(rng, 2, 1, 100, 50, 0.005);
    const NeuronParams p;
    const WeightVector w = WeightVector::Constant(100, 0.6);
    const auto a = score_presentations(p, set, w, 0.05, 17, 6);
    const auto b = score_presentations(p, set, w, 0.05, 17, 6);
    REQUIRE(a.size() == 6);
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].label == set.patterns[k % 2].label);
        CHECK(a[k].integral >= 0.0);
        CHECK(a[k].integral == b[k].integral);
    }
    const auto silent = score_presentations(p, set, WeightVector::Zero(100), 0.05, 17, 4);
    for (const auto& s : silent) {
        CHECK(s.integral == 0.0);
        CHECK_FALSE(s.correct());
    }
    CHECK(PresentationScore{2, 1.6}.correct());
    CHECK_FALSE(PresentationScore{2, 1.4}.correct());
}

}  // TEST_SUITE
