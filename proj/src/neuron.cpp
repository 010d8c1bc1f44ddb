#include "gnm/neuron.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gnm/error.hpp"

namespace gnm {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw DomainError(msg);
}

}  // namespace

void validate(const NeuronParams& p, TimeMode mode) {
    require(std::isfinite(p.alpha) && std::isfinite(p.beta) && std::isfinite(p.gamma) && std::isfinite(p.zeta) &&
                std::isfinite(p.eta) && std::isfinite(p.h) && std::isfinite(p.theta_b) && std::isfinite(p.theta_r),
            "neuron parameters must be finite");
    require(p.eta >= 0.0 && p.eta <= 1.0, "eta must lie in [0, 1]");
    require(p.alpha >= 0.0 && p.beta >= 0.0 && p.gamma >= 0.0 && p.zeta >= 0.0, "rates must be non-negative");
    if (mode == TimeMode::discrete) {
        require(p.alpha <= 1.0, "discrete alpha must lie in [0, 1]");
        require(p.beta <= 1.0, "discrete beta must lie in [0, 1]");
    }
    require(p.theta_b > 0.0 && p.theta_r > 0.0, "thresholds must be positive");
    require(p.h >= 1.0, "Hill exponent must be >= 1");
}

void validate(const LifParams& p) {
    require(p.alpha >= 0.0 && p.alpha <= 1.0, "LIF alpha must lie in [0, 1]");
    require(p.refractory >= 0, "refractory period must be >= 0");
    require(p.theta > p.v_reset, "LIF threshold must exceed the reset potential");
}

StepResult gnm_step(const NeuronState& state, double input_sum, const NeuronParams& params) {
    validate(params, TimeMode::discrete);
    require(input_sum >= 0.0, "input sum must be non-negative");
    return detail::gnm_update<double>(state, input_sum, params);
}

LifStep lif_step(const LifState& state, double input_sum, const LifParams& p) {
    if (state.refractory_counter > 0) {
        return {{p.v_reset, state.refractory_counter - 1}, false};
    }
    const double v = state.v + input_sum - p.alpha * state.v;
    if (v >= p.theta) return {{p.v_reset, p.refractory}, true};
    return {{v, 0}, false};
}

StateTrace simulate_gnm(const Eigen::Ref<const Eigen::VectorXd>& input, const NeuronParams& params,
                        NeuronState init) {
    validate(params, TimeMode::discrete);
    StateTrace trace;
    trace.resize(input.size());
    trace.v0 = init.v;
    NeuronState s = init;
    for (Eigen::Index t = 0; t < input.size(); ++t) {
        const StepResult step = detail::gnm_update<double>(s, input[t], params);
        s = step.state;
        trace.v[t] = s.v;
        trace.r[t] = s.r;
        trace.d[t] = step.decay;
    }
    return trace;
}

LifTrace simulate_lif(const Eigen::Ref<const Eigen::VectorXd>& input, const LifParams& params) {
    validate(params);
    LifTrace out;
    out.trace.resize(input.size());
    out.trace.v0 = params.v_reset;
    LifState s{params.v_reset, 0};
    for (Eigen::Index t = 0; t < input.size(); ++t) {
        const double before = s.v;
        const bool refractory = s.refractory_counter > 0;
        const LifStep step = lif_step(s, input[t], params);
        if (step.spike) {
            out.trace.v[t] = before + input[t] - params.alpha * before;
            out.spike_bins.push_back(t);
        } else {
            out.trace.v[t] = step.state.v;
        }
        out.trace.d[t] = refractory ? 0.0 : params.alpha * before;
        s = step.state;
    }
    return out;
}

namespace {

struct Derivative {
    double dv;
    double dr;
};

Derivative rhs(const NeuronState& s, const NeuronParams& p) {
    const double d = (p.eta * p.gamma * s.r + (1.0 - p.eta) * p.alpha) * s.v;
    return {-d, hill(s.v, p) - p.beta * s.r};
}

// Free evolution over an interval of length `span` with no input events.
NeuronState evolve(NeuronState s, double span, const NeuronParams& p, double max_step) {
    if (span <= 0.0) return s;
    const int n = std::max(1, static_cast<int>(std::ceil(span / max_step - 1e-9)));
    const double h = span / n;
    if (p.eta == 0.0) {
        // V is exact; R is driven by the known V(t) and integrated with RK4.
        const double v_start = s.v;
        double r = s.r;
        for (int k = 0; k < n; ++k) {
            const double t0 = k * h;
            auto v_at = [&](double t) { return v_start * std::exp(-p.alpha * t); };
            auto f = [&](double t, double rr) { return hill(v_at(t), p) - p.beta * rr; };
            const double k1 = f(t0, r);
            const double k2 = f(t0 + 0.5 * h, r + 0.5 * h * k1);
            const double k3 = f(t0 + 0.5 * h, r + 0.5 * h * k2);
            const double k4 = f(t0 + h, r + h * k3);
            r += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        return {v_start * std::exp(-p.alpha * span), r};
    }
    for (int k = 0; k < n; ++k) {
        const Derivative k1 = rhs(s, p);
        const Derivative k2 = rhs({s.v + 0.5 * h * k1.dv, s.r + 0.5 * h * k1.dr}, p);
        const Derivative k3 = rhs({s.v + 0.5 * h * k2.dv, s.r + 0.5 * h * k2.dr}, p);
        const Derivative k4 = rhs({s.v + h * k3.dv, s.r + h * k3.dr}, p);
        s.v += h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
        s.r += h / 6.0 * (k1.dr + 2.0 * k2.dr + 2.0 * k3.dr + k4.dr);
    }
    return s;
}

}  // namespace

StateTrace integrate_continuous(std::span<const InputEvent> events, const NeuronParams& params, double T,
                                double dt, NeuronState init, double rk4_step) {
    require(dt > 0.0 && std::isfinite(dt), "sample spacing dt must be positive");
    require(T >= 0.0, "trial length must be non-negative");
    require(rk4_step > 0.0, "integration step must be positive");
    validate(params, TimeMode::continuous);

    std::vector<InputEvent> sorted(events.begin(), events.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const InputEvent& a, const InputEvent& b) { return a.time < b.time; });
    for (const InputEvent& e : sorted) {
        require(e.time >= 0.0 && e.time <= T, "event time outside [0, T]");
    }

    const auto n = static_cast<Eigen::Index>(std::floor(T / dt + 1e-9)) + 1;
    // V is exact for eta = 0; R is then a passive readout and a step of dt suffices.
    const double max_step = params.eta == 0.0 ? dt : std::min(rk4_step, dt);
    StateTrace trace;
    trace.resize(n);
    trace.dt = dt;
    trace.v0 = init.v;

    NeuronState s = init;
    double now = 0.0;
    std::size_t next = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double t_sample = static_cast<double>(k) * dt;
        while (next < sorted.size() && sorted[next].time <= t_sample + 1e-9 * dt) {
            s = evolve(s, sorted[next].time - now, params, max_step);
            now = std::max(now, sorted[next].time);
            s.v += sorted[next].weight;
            ++next;
        }
        s = evolve(s, t_sample - now, params, max_step);
        now = t_sample;
        trace.v[k] = s.v;
        trace.r[k] = s.r;
        trace.d[k] = (params.eta * params.gamma * s.r + (1.0 - params.eta) * params.alpha) * s.v;
    }
    return trace;
}

}  // namespace gnm
