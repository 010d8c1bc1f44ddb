#include "gnm/learn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "gnm/error.hpp"

namespace gnm {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974;     // "init"
constexpr std::uint64_t kEpisodeStream = 0x65706973;  // "epis"

}  // namespace

const char* to_string(Algorithm a) {
    return a == Algorithm::all ? "all" : "et";
}

const char* to_string(NeuronKind k) {
    return k == NeuronKind::gnm ? "gnm" : "lif";
}

Simulation simulate(const NeuronSpec& spec, const SpikeRaster& raster, const Eigen::Ref<const WeightVector>& w) {
    const Eigen::VectorXd input = raster.drive(w);
    Simulation sim;
    if (spec.kind == NeuronKind::gnm) {
        sim.trace = simulate_gnm(input, spec.params);
        sim.crossings = crossing_bins(sim.trace, spec.params.theta_r);
    } else {
        LifTrace lif = simulate_lif(input, spec.lif());
        sim.trace = std::move(lif.trace);
        sim.crossings = std::move(lif.spike_bins);
    }
    return sim;
}

void validate(const TrainConfig& cfg) {
    if (cfg.epochs < 0) throw ConfigError("epochs must be non-negative");
    if (!(cfg.lambda >= 0.0)) throw ConfigError("learning rate must be non-negative");
    if (!(cfg.gamma_mom >= 0.0 && cfg.gamma_mom < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
    if (!(cfg.init_max >= 0.0 && cfg.init_max <= 1.0)) throw ConfigError("initial weight bound must lie in [0, 1]");
    if (cfg.neuron.refractory < 0) throw ConfigError("refractory period must be non-negative");
    if (!(cfg.trace_keep >= 0.0 && cfg.trace_keep < 1.0)) throw ConfigError("trace decay must lie in [0, 1)");
    try {
        validate(cfg.neuron.params, TimeMode::discrete);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

WeightVector initial_weights(Rng& rng, int n, double init_max) {
    WeightVector w(n);
    for (int i = 0; i < n; ++i) w[i] = uniform(rng, 0.0, init_max);
    return w;
}

Eigen::VectorXd eligibility(const SpikeRaster& inputs, const Eigen::Ref<const Eigen::VectorXd>& v) {
    if (inputs.n_bins() != v.size()) throw DomainError("input and trace lengths differ");
    Eigen::VectorXd eps = Eigen::VectorXd::Zero(inputs.n_channels());
    for (Eigen::Index t = 0; t < v.size(); ++t) {
        for (int c : inputs.active(t)) eps[c] += v[t];
    }
    return eps;
}

Eigen::VectorXd eligibility(const Eigen::Ref<const Eigen::MatrixXd>& inputs, const StateTrace& trace) {
    if (inputs.cols() != trace.size()) throw DomainError("input and trace lengths differ");
    if (trace.dt == 1.0 || trace.size() < 2) return inputs * trace.v;
    const Eigen::Index n = trace.size();
    Eigen::VectorXd weights = Eigen::VectorXd::Constant(n, trace.dt);
    weights[0] *= 0.5;
    weights[n - 1] *= 0.5;
    return inputs * trace.v.cwiseProduct(weights);
}

std::vector<int> decile_gate(const Eigen::Ref<const Eigen::VectorXd>& eps) {
    const auto n = static_cast<int>(eps.size());
    const int k = (n + 9) / 10;
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    auto before = [&](int a, int b) { return eps[a] > eps[b] || (eps[a] == eps[b] && a < b); };
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), before);
    idx.resize(static_cast<std::size_t>(k));
    std::erase_if(idx, [&](int i) { return !(eps[i] > 0.0); });
    std::sort(idx.begin(), idx.end());
    return idx;
}

Eigen::VectorXd momentum_apply(const Eigen::Ref<const Eigen::VectorXd>& raw, MomentumState& m) {
    if (m.prev_delta.size() != raw.size()) m.prev_delta = Eigen::VectorXd::Zero(raw.size());
    Eigen::VectorXd delta = raw + m.gamma_mom * m.prev_delta;
    m.prev_delta = delta;
    return delta;
}

namespace {

WeightVector clip01(WeightVector w) {
    return w.cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace

WeightVector all_update(const Eigen::Ref<const WeightVector>& w, const Eigen::Ref<const Eigen::VectorXd>& eps,
                        int error_sign, double lambda, MomentumState& momentum) {
    if (eps.size() != w.size()) throw DomainError("eligibility and weight lengths differ");
    if (error_sign == 0) return w;
    Eigen::VectorXd raw = Eigen::VectorXd::Zero(w.size());
    const double step = error_sign > 0 ? lambda : -lambda;
    for (int i : decile_gate(eps)) raw[i] = step;
    return clip01(w + momentum_apply(raw, momentum));
}

WeightVector et_update(const Eigen::Ref<const WeightVector>& w, const SpikeRaster& inputs,
                       const Eigen::Ref<const Eigen::VectorXd>& error_trace, double lambda, MomentumState& momentum) {
    if (inputs.n_channels() != w.size()) throw DomainError("input channels and weight lengths differ");
    if (inputs.n_bins() != error_trace.size()) throw DomainError("input and error trace lengths differ");
    if ((error_trace.array() == 0.0).all()) return w;
    const Eigen::VectorXd blame = eligibility(inputs, error_trace);
    return clip01(w + momentum_apply(lambda * blame, momentum));
}

WeightVector et_update(const Eigen::Ref<const WeightVector>& w, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                       const Eigen::Ref<const Eigen::VectorXd>& error_trace, double lambda, MomentumState& momentum) {
    if (inputs.rows() != w.size()) throw DomainError("input channels and weight lengths differ");
    if (inputs.cols() != error_trace.size()) throw DomainError("input and error trace lengths differ");
    if ((error_trace.array() == 0.0).all()) return w;
    return clip01(w + momentum_apply(lambda * (inputs * error_trace), momentum));
}

Eigen::MatrixXd input_traces(const SpikeRaster& raster, double keep) {
    if (!(keep >= 0.0 && keep < 1.0)) throw DomainError("trace decay must lie in [0, 1)");
    Eigen::MatrixXd x = raster.dense();
    for (Eigen::Index t = 1; t < x.cols(); ++t) x.col(t) += keep * x.col(t - 1);
    return x;
}

double default_lambda(Algorithm a) {
    return a == Algorithm::all ? 1e-4 : 2e-3;
}

TrainResult train(const TrainConfig& cfg, const PatternSet& set) {
    validate(cfg);
    validate(set);
    Rng init_rng = make_rng(cfg.seed, {kInitStream});
    Rng episode_rng = make_rng(cfg.seed, {kEpisodeStream});

    TrainResult out;
    out.weights = initial_weights(init_rng, set.n_channels(), cfg.init_max);
    out.history.reserve(static_cast<std::size_t>(cfg.epochs));
    MomentumState momentum{Eigen::VectorXd::Zero(set.n_channels()), cfg.gamma_mom};

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const Episode ep = generate_episode(episode_rng, set, cfg.episode);
        const Simulation sim = simulate(cfg.neuron, ep.raster, out.weights);
        const SpikeReadout ro = make_readout(sim.crossings, ep);

        EpochRecord rec;
        rec.target = ep.target_total(set);
        rec.actual = ro.total();
        rec.noise_crossings = static_cast<int>(ro.noise_crossings.size());
        for (std::size_t i = 0; i < ep.windows.size(); ++i) {
            if (ro.per_window_counts[i] != set.patterns[static_cast<std::size_t>(ep.windows[i].pattern_index)].label) {
                ++rec.window_errors;
            }
        }
        out.history.push_back(rec);

        if (cfg.algorithm == Algorithm::all) {
            const int sign = aggregate_error(rec.actual, rec.target);
            if (sign != 0) {
                out.weights = all_update(out.weights, eligibility(ep.raster, sim.trace.v), sign, cfg.lambda, momentum);
            }
        } else {
            const Eigen::VectorXd e = build_error_trace(ro, ep, set);
            if (cfg.trace_keep > 0.0) {
                out.weights = et_update(out.weights, input_traces(ep.raster, cfg.trace_keep), e, cfg.lambda, momentum);
            } else {
                out.weights = et_update(out.weights, ep.raster, e, cfg.lambda, momentum);
            }
        }
    }
    return out;
}

std::vector<InputEvent> to_events(const SpikeRaster& raster, const Eigen::Ref<const WeightVector>& w) {
    std::vector<InputEvent> events;
    for (const SpikeEvent& e : raster.events()) events.push_back({static_cast<double>(e.bin), w[e.channel]});
    return events;
}

ContinuousResponse respond_continuous(const NeuronParams& params, const Episode& ep,
                                      const Eigen::Ref<const WeightVector>& w, double dt) {
    const auto events = to_events(ep.raster, w);
    const auto t_end = static_cast<double>(ep.length());
    ContinuousResponse out;
    out.trace = integrate_continuous(events, params, t_end, dt);
    const auto per_bin = static_cast<Eigen::Index>(std::lround(1.0 / dt));
    auto sample = [&](Eigen::Index bin) { return bin * per_bin; };

    for (const Window& win : ep.windows) {
        out.window_integrals.push_back(
            spike_integral(out.trace, params.theta_r, sample(win.start), sample(win.start + ep.window_length)));
    }
    out.noise_integrals = Eigen::VectorXd::Zero(ep.length());
    const auto mask = ep.noise_mask();
    for (Eigen::Index b = 0; b < ep.length(); ++b) {
        if (mask[static_cast<std::size_t>(b)]) {
            out.noise_integrals[b] = spike_integral(out.trace, params.theta_r, sample(b), sample(b + 1));
        }
    }
    return out;
}

TrainResult train_continuous(const ContinuousConfig& cfg, const PatternSet& set) {
    if (cfg.epochs < 0 || !(cfg.lambda >= 0.0) || !(cfg.dt > 0.0)) throw ConfigError("invalid continuous config");
    const double per_bin = 1.0 / cfg.dt;
    if (std::abs(per_bin - std::round(per_bin)) > 1e-9) throw ConfigError("dt must divide one time bin");
    validate(set);
    try {
        validate(cfg.neuron, TimeMode::continuous);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    Rng init_rng = make_rng(cfg.seed, {kInitStream});
    Rng episode_rng = make_rng(cfg.seed, {kEpisodeStream});

    TrainResult out;
    out.weights = initial_weights(init_rng, set.n_channels(), cfg.init_max);
    MomentumState momentum{Eigen::VectorXd::Zero(set.n_channels()), cfg.gamma_mom};
    const double m = static_cast<double>(set.pattern_length());

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const Episode ep = generate_episode(episode_rng, set, cfg.episode);
        const ContinuousResponse resp = respond_continuous(cfg.neuron, ep, out.weights, cfg.dt);

        EpochRecord rec;
        Eigen::VectorXd e = -resp.noise_integrals;
        for (std::size_t i = 0; i < ep.windows.size(); ++i) {
            const int k = set.patterns[static_cast<std::size_t>(ep.windows[i].pattern_index)].label;
            const double s = resp.window_integrals[i];
            e.segment(ep.windows[i].start, ep.window_length).setConstant((k - s) / m);
            rec.target += k;
            rec.actual += integral_class(s);
            if (integral_class(s) != k) ++rec.window_errors;
        }
        rec.noise_crossings = static_cast<int>((resp.noise_integrals.array() > 0.0).count());
        out.history.push_back(rec);
        out.weights = et_update(out.weights, ep.raster, e, cfg.lambda, momentum);
    }
    return out;
}

std::vector<PresentationScore> score_presentations(const NeuronParams& params, const PatternSet& set,
                                                   const Eigen::Ref<const WeightVector>& w, double dt,
                                                   std::uint64_t seed, int count, double p, Eigen::Index lead) {
    validate(set);
    if (count < 0 || lead < 0) throw ConfigError("presentation count and lead must be non-negative");
    const Eigen::Index m = set.pattern_length();
    std::vector<PresentationScore> out;
    for (int k = 0; k < count; ++k) {
        Rng rng = make_rng(seed, {static_cast<std::uint64_t>(k)});
        const auto idx = static_cast<int>(static_cast<std::size_t>(k) % set.patterns.size());
        const Episode ep = compose_episode(rng, set, 2 * lead + m, {{lead, idx}}, p);
        const ContinuousResponse resp = respond_continuous(params, ep, w, dt);
        out.push_back({set.patterns[static_cast<std::size_t>(idx)].label, resp.window_integrals.front()});
    }
    return out;
}

void write_weights(std::ostream& os, const WeightVector& w,
                   const std::vector<std::pair<std::string, std::string>>& metadata) {
    os << "GNM-WEIGHTS v1\n" << w.size() << '\n';
    char buf[64];
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", w[i]);
        os << buf << '\n';
    }
    for (const auto& [key, value] : metadata) os << "# " << key << '=' << value << '\n';
}

WeightVector read_weights(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "GNM-WEIGHTS v1") throw ConfigError("not a GNM-WEIGHTS v1 file");
    long long n = 0;
    if (!std::getline(is, line) || !(std::istringstream(line) >> n) || n < 0) {
        throw ConfigError("bad weight count");
    }
    WeightVector w(n);
    for (long long i = 0; i < n; ++i) {
        if (!std::getline(is, line)) throw ConfigError("weight file truncated");
        std::istringstream ss(line);
        if (!(ss >> w[i])) throw ConfigError("bad weight line: " + line);
    }
    return w;
}

}  // namespace gnm
