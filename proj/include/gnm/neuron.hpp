#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace gnm {

enum class TimeMode { discrete, continuous };

// Dynamical constants of the generalised neuron model.
//
// In discrete mode alpha is a per-bin leak fraction in [0, 1]. In continuous
// mode alpha, beta, gamma and zeta are rates and only need to be positive.
// eta blends the plain leak (eta = 0) with the Hill-gated reset decay
// (eta = 1).
struct NeuronParams {
    double alpha = 0.3;
    double beta = 0.3;
    double gamma = 1.0;
    double zeta = 1.0;
    double eta = 0.0;
    double h = 4.0;
    double theta_b = 1.0;  // behavioural threshold (Hill midpoint)
    double theta_r = 1.0;  // readout threshold
};

// Throws DomainError when the parameters are outside their domain for `mode`.
void validate(const NeuronParams& params, TimeMode mode = TimeMode::discrete);

struct NeuronState {
    double v = 0.0;
    double r = 0.0;
};

struct StepResult {
    NeuronState state;
    double decay = 0.0;  // D, the potential removed in this step
};

// Sampled potential, reset variable and decay term. Sample k of a discrete
// trace is the state after bin k; `v0` is the potential before the first
// sample and acts as the predecessor for threshold-crossing tests. NaN
// (the default) means there is no predecessor, so sample 0 never counts as
// a crossing.
struct StateTrace {
    Eigen::VectorXd v;
    Eigen::VectorXd r;
    Eigen::VectorXd d;
    double dt = 1.0;
    double v0 = std::numeric_limits<double>::quiet_NaN();

    Eigen::Index size() const { return v.size(); }
    bool empty() const { return v.size() == 0; }
    void resize(Eigen::Index n) {
        v.setZero(n);
        r.setZero(n);
        d.setZero(n);
    }
};

struct LifParams {
    double alpha = 0.3;
    double theta = 1.0;
    double v_reset = 0.0;
    int refractory = 0;  // bins of input insensitivity after a spike
};

void validate(const LifParams& params);

struct LifState {
    double v = 0.0;
    int refractory_counter = 0;
};

struct LifStep {
    LifState state;
    bool spike = false;
};

// Hill activation zeta * v^h / (theta_b^h + v^h). Negative potentials are
// treated as zero.
template <typename Scalar>
Scalar hill(Scalar v, const NeuronParams& p) {
    using std::pow;
    if (v <= Scalar(0)) return Scalar(0);
    const Scalar vh = pow(v, Scalar(p.h));
    const Scalar th = pow(Scalar(p.theta_b), Scalar(p.h));
    if (!std::isfinite(static_cast<double>(vh))) return Scalar(p.zeta);
    return Scalar(p.zeta) * vh / (th + vh);
}

// Total per-bin decay factor eta*gamma*r + (1-eta)*alpha, clamped to 1 so
// that a single step never removes more potential than is present.
template <typename Scalar>
Scalar decay_factor(Scalar r, const NeuronParams& p) {
    const Scalar f = Scalar(p.eta * p.gamma) * r + Scalar((1.0 - p.eta) * p.alpha);
    return std::min(f, Scalar(1));
}

namespace detail {

// Unchecked discrete update; right-hand sides use the pre-update state.
template <typename Scalar>
StepResult gnm_update(NeuronState s, Scalar input_sum, const NeuronParams& p) {
    const Scalar d = decay_factor<Scalar>(s.r, p) * s.v;
    NeuronState next;
    next.v = s.v + input_sum - d;
    next.r = s.r + hill<Scalar>(s.v, p) - Scalar(p.beta) * s.r;
    return {next, d};
}

}  // namespace detail

// One discrete time bin of the GNM.
StepResult gnm_step(const NeuronState& state, double input_sum, const NeuronParams& params);

// One discrete time bin of the LIF baseline with hard reset and refractory
// period.
LifStep lif_step(const LifState& state, double input_sum, const LifParams& params);

// Runs the discrete GNM over a per-bin input current series.
StateTrace simulate_gnm(const Eigen::Ref<const Eigen::VectorXd>& input, const NeuronParams& params,
                        NeuronState init = {});

struct LifTrace {
    // At spike bins `trace.v` holds the potential reached before the reset.
    StateTrace trace;
    std::vector<Eigen::Index> spike_bins;
};

LifTrace simulate_lif(const Eigen::Ref<const Eigen::VectorXd>& input, const LifParams& params);

// Weighted Dirac input in continuous time.
struct InputEvent {
    double time = 0.0;
    double weight = 0.0;
};

// Integrates dV/dt = -D, dR/dt = hill(V) - beta*R on [0, T], applying each
// event as an instantaneous jump of V. Samples are taken at k*dt and reflect
// every event with time <= k*dt. eta = 0 uses the exact exponential solution
// for V; otherwise fixed-step RK4 with step `rk4_step` (or dt if smaller).
StateTrace integrate_continuous(std::span<const InputEvent> events, const NeuronParams& params, double T,
                                double dt, NeuronState init = {}, double rk4_step = 0.01);

}  // namespace gnm
