#include <cmath>
#include <vector>

#include "doctest.h"
#include "gnm/error.hpp"
#include "gnm/neuron.hpp"
#include "gnm/rng.hpp"

using namespace gnm;

namespace {

// Straight transcription of the update equations, kept separate from the
// library's templated version.
struct Ref {
    double v, r, d;
};

Ref ref_step(double v, double r, double input, const NeuronParams& p) {
    const double hill = p.zeta * std::pow(v, p.h) / (std::pow(p.theta_b, p.h) + std::pow(v, p.h));
    double f = p.eta * p.gamma * r + (1.0 - p.eta) * p.alpha;
    if (f > 1.0) f = 1.0;
    const double d = f * v;
    return {v + input - d, r + hill - p.beta * r, d};
}

}  // namespace

TEST_SUITE("neuron") {

TEST_CASE("leaky step with eta = 0") {
    NeuronParams p;
    const StepResult s = gnm_step({1.0, 0.0}, 0.5, p);
    CHECK(s.state.v == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(s.decay == doctest::Approx(0.3).epsilon(1e-12));
    // hill(1) with theta_b = 1 is zeta / 2
    CHECK(s.state.r == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("zero state and zero input stay at rest") {
    NeuronParams p;
    p.eta = 0.7;
    const StepResult s = gnm_step({0.0, 0.0}, 0.0, p);
    CHECK(s.state.v == 0.0);
    CHECK(s.state.r == 0.0);
    CHECK(s.decay == 0.0);
}

TEST_CASE("reset-coupled decay example") {
    NeuronParams p;
    p.eta = 0.8;
    const StepResult s = gnm_step({2.0, 0.5}, 0.0, p);
    const Ref ref = ref_step(2.0, 0.5, 0.0, p);
    CHECK(ref.v == doctest::Approx(1.08).epsilon(1e-12));
    CHECK(ref.r == doctest::Approx(0.5 + 16.0 / 17.0 - 0.15).epsilon(1e-12));
    CHECK(s.state.v == doctest::Approx(ref.v).epsilon(1e-12));
    CHECK(s.state.r == doctest::Approx(ref.r).epsilon(1e-12));
    CHECK(s.state.r == doctest::Approx(1.29118).epsilon(1e-5));
}

TEST_CASE("decay clamp keeps the potential non-negative") {
    NeuronParams p;
    p.eta = 1.0;
    p.gamma = 5.0;
    const StepResult s = gnm_step({1.5, 2.0}, 0.0, p);
    CHECK(s.decay == doctest::Approx(1.5));
    CHECK(s.state.v == doctest::Approx(0.0));
}

TEST_CASE("step matches the reference transcription on random states") {
    Rng rng(11);
    for (int k = 0; k < 500; ++k) {
        NeuronParams p;
        p.alpha = uniform01(rng);
        p.beta = uniform01(rng);
        p.gamma = uniform(rng, 0.0, 2.0);
        p.zeta = uniform(rng, 0.0, 2.0);
        p.eta = uniform01(rng);
        p.h = uniform(rng, 1.0, 8.0);
        p.theta_b = uniform(rng, 0.5, 2.0);
        const double v = uniform(rng, 0.0, 3.0);
        const double r = uniform(rng, 0.0, 2.0);
        const double in = uniform(rng, 0.0, 1.0);
        const StepResult s = gnm_step({v, r}, in, p);
        const Ref ref = ref_step(v, r, in, p);
        CHECK(s.state.v == doctest::Approx(ref.v).epsilon(1e-12));
        CHECK(s.state.r == doctest::Approx(ref.r).epsilon(1e-12));
        CHECK(s.decay == doctest::Approx(ref.d).epsilon(1e-12));
    }
}

TEST_CASE("non-negativity over random input sequences") {
    Rng rng(5);
    for (int k = 0; k < 50; ++k) {
        NeuronParams p;
        p.alpha = uniform01(rng);
        p.eta = uniform01(rng);
        p.beta = uniform01(rng);
        p.gamma = uniform(rng, 0.0, 3.0);
        Eigen::VectorXd input(300);
        for (Eigen::Index t = 0; t < input.size(); ++t) input[t] = uniform01(rng) < 0.2 ? uniform01(rng) : 0.0;
        const StateTrace tr = simulate_gnm(input, p);
        CHECK(tr.v.minCoeff() >= 0.0);
        CHECK(tr.r.minCoeff() >= 0.0);
    }
}

TEST_CASE("domain errors") {
    NeuronParams p;
    CHECK_THROWS_AS(gnm_step({0.0, 0.0}, -0.1, p), DomainError);
    p.alpha = 1.5;
    CHECK_THROWS_AS(gnm_step({0.0, 0.0}, 0.0, p), DomainError);
    CHECK_NOTHROW(validate(p, TimeMode::continuous));
    p = {};
    p.eta = 1.2;
    CHECK_THROWS_AS(validate(p), DomainError);
    p = {};
    p.h = 0.0;
    CHECK_THROWS_AS(validate(p), DomainError);
    p = {};
    p.alpha = -0.1;
    CHECK_THROWS_AS(validate(p, TimeMode::continuous), DomainError);
}

TEST_CASE("hysteresis of the decay term") {
    NeuronParams p;
    p.eta = 0.8;
    p.alpha = 0.3;
    p.beta = 0.1;
    Eigen::VectorXd input = Eigen::VectorXd::Zero(80);
    input.head(30).setConstant(0.5);
    const StateTrace tr = simulate_gnm(input, p);
    CHECK(tr.v.maxCoeff() > p.theta_b);
    // D as a function of V is not single-valued: some pair of samples at
    // nearly the same potential has clearly different decay.
    double widest = 0.0;
    for (Eigen::Index a = 1; a < tr.size(); ++a) {
        for (Eigen::Index b = 1; b < tr.size(); ++b) {
            if (std::abs(tr.v[a - 1] - tr.v[b - 1]) < 0.02) widest = std::max(widest, std::abs(tr.d[a] - tr.d[b]));
        }
    }
    CHECK(widest > 0.1);
}

TEST_CASE("continuous exponential decay") {
    NeuronParams p;
    p.alpha = 1.0;
    const StateTrace tr = integrate_continuous({}, p, 1.0, 0.5, {1.0, 0.0});
    REQUIRE(tr.size() == 3);
    CHECK(tr.v[0] == doctest::Approx(1.0));
    CHECK(tr.v[2] == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("continuous and discrete agree at integer times for eta = 0") {
    Rng rng(3);
    NeuronParams pd;
    pd.alpha = 0.3;
    NeuronParams pc = pd;
    pc.alpha = -std::log(1.0 - pd.alpha);
    Eigen::VectorXd input = Eigen::VectorXd::Zero(60);
    std::vector<InputEvent> events;
    for (Eigen::Index t = 0; t < input.size(); ++t) {
        if (uniform01(rng) < 0.3) {
            input[t] = uniform01(rng);
            events.push_back({static_cast<double>(t), input[t]});
        }
    }
    const StateTrace d = simulate_gnm(input, pd);
    const StateTrace c = integrate_continuous(events, pc, 59.0, 0.25);
    for (Eigen::Index t = 0; t < input.size(); ++t) {
        CHECK(c.v[4 * t] == doctest::Approx(d.v[t]).epsilon(1e-9));
    }
}

TEST_CASE("continuous reset dynamics match a fine-step reference") {
    NeuronParams p;
    p.eta = 0.5;
    p.alpha = 0.4;
    p.beta = 0.2;
    const StateTrace tr = integrate_continuous({}, p, 5.0, 0.5, {1.6, 0.0});
    // Forward Euler at a tiny step as an independent reference.
    double v = 1.6, r = 0.0;
    const double h = 1e-5;
    for (int k = 0; k < 500000; ++k) {
        const double hv = p.zeta * std::pow(v, p.h) / (1.0 + std::pow(v, p.h));
        const double dv = -(p.eta * p.gamma * r + (1.0 - p.eta) * p.alpha) * v;
        const double dr = hv - p.beta * r;
        v += h * dv;
        r += h * dr;
    }
    CHECK(tr.v[tr.size() - 1] == doctest::Approx(v).epsilon(1e-4));
    CHECK(tr.r[tr.size() - 1] == doctest::Approx(r).epsilon(1e-4));
}

TEST_CASE("events at a sample time are visible in that sample") {
    NeuronParams p;
    const std::vector<InputEvent> events{{1.0, 0.7}};
    const StateTrace tr = integrate_continuous(events, p, 2.0, 1.0);
    CHECK(tr.v[0] == 0.0);
    CHECK(tr.v[1] == doctest::Approx(0.7));
}

TEST_CASE("LIF spike and hard reset") {
    LifParams p;
    const LifStep s = lif_step({0.9, 0}, 0.5, p);
    CHECK(s.spike);
    CHECK(s.state.v == 0.0);
    const LifStep q = lif_step({0.5, 0}, 0.2, p);
    CHECK_FALSE(q.spike);
    CHECK(q.state.v == doctest::Approx(0.55));
}

TEST_CASE("LIF refractory period ignores input") {
    LifParams p;
    p.refractory = 2;
    LifStep s = lif_step({0.9, 0}, 0.5, p);
    REQUIRE(s.spike);
    CHECK(s.state.refractory_counter == 2);
    s = lif_step(s.state, 5.0, p);
    CHECK_FALSE(s.spike);
    CHECK(s.state.v == 0.0);
    s = lif_step(s.state, 5.0, p);
    CHECK_FALSE(s.spike);
    CHECK(s.state.refractory_counter == 0);
    s = lif_step(s.state, 5.0, p);
    CHECK(s.spike);
}

TEST_CASE("sub-threshold LIF equals the eta = 0 GNM") {
    Eigen::VectorXd input = Eigen::VectorXd::Constant(40, 0.05);
    NeuronParams g;
    const LifTrace l = simulate_lif(input, LifParams{});
    const StateTrace t = simulate_gnm(input, g);
    CHECK(l.spike_bins.empty());
    for (Eigen::Index k = 0; k < input.size(); ++k) CHECK(l.trace.v[k] == doctest::Approx(t.v[k]).epsilon(1e-14));
}

TEST_CASE("LIF trace keeps the pre-reset potential at spike bins") {
    Eigen::VectorXd input = Eigen::VectorXd::Zero(5);
    input[2] = 1.4;
    const LifTrace l = simulate_lif(input, LifParams{});
    REQUIRE(l.spike_bins.size() == 1);
    CHECK(l.spike_bins[0] == 2);
    CHECK(l.trace.v[2] == doctest::Approx(1.4));
    CHECK(l.trace.v[3] == 0.0);
}

}  // TEST_SUITE
