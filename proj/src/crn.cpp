#include "gnm/crn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "gnm/csv.hpp"
#include "gnm/error.hpp"
#include "gnm/parallel.hpp"

namespace gnm {

std::vector<ReactionSystem::Channel> ReactionSystem::channels() const {
    std::vector<Channel> out;
    out.reserve(static_cast<std::size_t>(2 * n_inputs() + 1));
    for (int i = 0; i < n_inputs(); ++i) {
        out.push_back({i, true, w[i] * c});
        out.push_back({i, false, (1.0 - w[i]) * c});
    }
    out.push_back({-1, false, alpha});
    return out;
}

ReactionSystem crn_from_weights(const Eigen::Ref<const Eigen::VectorXd>& w, double alpha, double c,
                                std::int64_t n_mol) {
    if (!(c > 0.0)) throw DomainError("C must be positive");
    if (n_mol < 1) throw DomainError("n_mol must be >= 1");
    if (!(alpha >= 0.0)) throw DomainError("alpha must be non-negative");
    if ((w.array() < 0.0).any() || (w.array() > 1.0).any()) throw DomainError("weights must lie in [0, 1]");
    ReactionSystem s;
    s.w = w;
    s.alpha = alpha;
    s.c = c;
    s.n_mol = n_mol;
    return s;
}

void add_spikes(ReactionSystem& system, const SpikeRaster& raster, double offset) {
    if (raster.n_channels() != system.n_inputs()) throw DomainError("raster channels differ from input species");
    for (const SpikeEvent& e : raster.events()) {
        system.events.push_back({offset + static_cast<double>(e.bin), e.channel, system.n_mol});
    }
    std::stable_sort(system.events.begin(), system.events.end(),
                     [](const Injection& a, const Injection& b) { return a.time < b.time; });
}

namespace {

Eigen::Index grid_size(double T, double sample_dt) {
    if (!(T > 0.0)) throw DomainError("T must be positive");
    if (!(sample_dt > 0.0)) throw DomainError("sample spacing must be positive");
    return static_cast<Eigen::Index>(std::floor(T / sample_dt + 1e-9)) + 1;
}

Trajectory empty_trajectory(Eigen::Index n, double sample_dt, std::int64_t n_mol) {
    Trajectory tr;
    tr.time = Eigen::VectorXd::LinSpaced(n, 0.0, static_cast<double>(n - 1) * sample_dt);
    tr.v_count.setZero(n);
    tr.input_count.setZero(n);
    tr.removed.setZero(n);
    tr.n_mol = n_mol;
    return tr;
}

}  // namespace

Trajectory ssa_run(const ReactionSystem& sys, Rng& rng, double T, double sample_dt) {
    const Eigen::Index n = grid_size(T, sample_dt);
    Trajectory tr = empty_trajectory(n, sample_dt, sys.n_mol);

    std::vector<std::int64_t> inputs(static_cast<std::size_t>(sys.n_inputs()), 0);
    std::vector<int> active;  // species with a non-zero count
    std::int64_t total_inputs = 0;
    std::int64_t v = sys.v_initial;
    std::int64_t removed = 0;

    Eigen::Index k = 0;
    // Records grid points strictly before `limit`.
    auto record_before = [&](double limit) {
        while (k < n && tr.time[k] < limit) {
            tr.v_count[k] = static_cast<double>(v);
            tr.input_count[k] = static_cast<double>(total_inputs);
            tr.removed[k] = static_cast<double>(removed);
            ++k;
        }
    };

    double t = 0.0;
    std::size_t next_event = 0;
    const double t_stop = tr.time[n - 1];
    while (true) {
        const double a_inputs = sys.c * static_cast<double>(total_inputs);
        const double a_v = sys.alpha * static_cast<double>(v);
        const double a0 = a_inputs + a_v;
        const double t_fire = a0 > 0.0 ? t + exponential(rng, a0) : std::numeric_limits<double>::infinity();
        const double t_event =
            next_event < sys.events.size() ? sys.events[next_event].time : std::numeric_limits<double>::infinity();

        if (t_event <= t_fire && t_event <= t_stop) {
            // The pending waiting time is discarded; exponential clocks are memoryless.
            record_before(t_event);
            const Injection& inj = sys.events[next_event++];
            auto& count = inputs.at(static_cast<std::size_t>(inj.species));
            if (count == 0 && inj.amount > 0) active.push_back(inj.species);
            count += inj.amount;
            total_inputs += inj.amount;
            t = t_event;
            continue;
        }
        if (t_fire > t_stop) break;

        record_before(t_fire);
        t = t_fire;
        double r = uniform01(rng) * a0;
        if (r < a_v) {
            --v;
            ++removed;
            continue;
        }
        r = (r - a_v) / sys.c;
        std::size_t pick = active.size() - 1;
        for (std::size_t j = 0; j < active.size(); ++j) {
            const auto cnt = static_cast<double>(inputs[static_cast<std::size_t>(active[j])]);
            if (r < cnt) {
                pick = j;
                break;
            }
            r -= cnt;
        }
        const int species = active[pick];
        auto& count = inputs[static_cast<std::size_t>(species)];
        --count;
        --total_inputs;
        if (uniform01(rng) < sys.w[species]) {
            ++v;
        } else {
            ++removed;
        }
        if (count == 0) active.erase(active.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    record_before(std::numeric_limits<double>::infinity());
    return tr;
}

Trajectory ode_reference(const ReactionSystem& sys, double T, double sample_dt, double step) {
    const Eigen::Index n = grid_size(T, sample_dt);
    if (!(step > 0.0)) throw DomainError("integration step must be positive");
    Trajectory tr = empty_trajectory(n, sample_dt, sys.n_mol);
    const double scale = static_cast<double>(sys.n_mol);

    // y = sum_i w_i I_i and u = sum_i I_i decay at the same rate C, so the
    // mean-field state reduces to (y, u, V, removed).
    struct State {
        double y, u, v, removed;
    };
    auto rhs = [&](const State& s) {
        return State{-sys.c * s.y, -sys.c * s.u, sys.c * s.y - sys.alpha * s.v,
                     sys.c * (s.u - s.y) + sys.alpha * s.v};
    };
    auto advance = [&](State s, double span) {
        if (span <= 0.0) return s;
        const int m = std::max(1, static_cast<int>(std::ceil(span / step - 1e-9)));
        const double h = span / m;
        for (int i = 0; i < m; ++i) {
            const State k1 = rhs(s);
            const State k2 = rhs({s.y + 0.5 * h * k1.y, s.u + 0.5 * h * k1.u, s.v + 0.5 * h * k1.v,
                                  s.removed + 0.5 * h * k1.removed});
            const State k3 = rhs({s.y + 0.5 * h * k2.y, s.u + 0.5 * h * k2.u, s.v + 0.5 * h * k2.v,
                                  s.removed + 0.5 * h * k2.removed});
            const State k4 = rhs({s.y + h * k3.y, s.u + h * k3.u, s.v + h * k3.v, s.removed + h * k3.removed});
            s.y += h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
            s.u += h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
            s.v += h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
            s.removed += h / 6.0 * (k1.removed + 2.0 * k2.removed + 2.0 * k3.removed + k4.removed);
        }
        return s;
    };

    State s{0.0, 0.0, static_cast<double>(sys.v_initial) / scale, 0.0};
    double t = 0.0;
    std::size_t next_event = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double tk = tr.time[k];
        while (next_event < sys.events.size() && sys.events[next_event].time <= tk + 1e-12) {
            const Injection& inj = sys.events[next_event++];
            s = advance(s, inj.time - t);
            t = std::max(t, inj.time);
            const double amount = static_cast<double>(inj.amount) / scale;
            s.y += sys.w[inj.species] * amount;
            s.u += amount;
        }
        s = advance(s, tk - t);
        t = tk;
        tr.v_count[k] = s.v * scale;
        tr.input_count[k] = s.u * scale;
        tr.removed[k] = s.removed * scale;
    }
    return tr;
}

StateTrace to_state_trace(const Trajectory& traj) {
    StateTrace st;
    st.resize(traj.time.size());
    st.v = traj.normalized();
    st.dt = traj.time.size() > 1 ? traj.time[1] - traj.time[0] : 1.0;
    return st;
}

EnsembleSummary summarize(const std::vector<Trajectory>& runs) {
    if (runs.empty()) throw DomainError("no runs to summarise");
    EnsembleSummary s;
    s.time = runs.front().time;
    s.runs = static_cast<int>(runs.size());
    const Eigen::Index n = s.time.size();
    s.mean.setZero(n);
    for (const Trajectory& r : runs) {
        if (r.time.size() != n) throw DomainError("runs sampled on different grids");
        s.mean += r.normalized();
    }
    s.mean /= static_cast<double>(runs.size());
    s.stddev.setZero(n);
    if (runs.size() > 1) {
        for (const Trajectory& r : runs) s.stddev += (r.normalized() - s.mean).array().square().matrix();
        s.stddev = (s.stddev / static_cast<double>(runs.size() - 1)).cwiseSqrt();
    }
    return s;
}

std::vector<NoiseStudyRow> noise_study(const Eigen::Ref<const Eigen::VectorXd>& w, const SpikeRaster& inputs,
                                       const NoiseStudyConfig& cfg, std::vector<std::vector<Trajectory>>* runs_out) {
    if (cfg.runs < 2) throw ConfigError("noise study needs at least two runs");
    const double T = static_cast<double>(inputs.n_bins());
    std::vector<NoiseStudyRow> rows;
    if (runs_out) runs_out->clear();
    for (std::int64_t n_mol : cfg.n_mols) {
        ReactionSystem sys = crn_from_weights(w, cfg.alpha, cfg.c, n_mol);
        add_spikes(sys, inputs);
        std::vector<Trajectory> runs(static_cast<std::size_t>(cfg.runs));
        parallel_for(runs.size(), [&](std::size_t r) {
            Rng rng = make_rng(cfg.seed, {static_cast<std::uint64_t>(n_mol), r});
            runs[r] = ssa_run(sys, rng, T, cfg.sample_dt);
        });
        NoiseStudyRow row;
        row.n_mol = n_mol;
        row.ensemble = summarize(runs);
        row.ode = ode_reference(sys, T, cfg.sample_dt);
        const Eigen::VectorXd diff = row.ensemble.mean - row.ode.normalized();
        row.rmse = std::sqrt(diff.squaredNorm() / static_cast<double>(diff.size()));
        const Eigen::ArrayXd se = row.ensemble.stddev.array() / std::sqrt(static_cast<double>(cfg.runs));
        row.within_3se = static_cast<double>((diff.array().abs() <= 3.0 * se + 1e-12).count()) /
                         static_cast<double>(diff.size());
        rows.push_back(std::move(row));
        if (runs_out) runs_out->push_back(std::move(runs));
    }
    return rows;
}

void write_trajectory_csv(std::ostream& os, const std::vector<Trajectory>& runs) {
    os << "time,v_normalized,run_id\n";
    for (std::size_t r = 0; r < runs.size(); ++r) {
        const Eigen::VectorXd v = runs[r].normalized();
        for (Eigen::Index k = 0; k < v.size(); ++k) {
            os << fmt9(runs[r].time[k]) << ',' << fmt9(v[k]) << ',' << r << '\n';
        }
    }
}

void write_summary_csv(std::ostream& os, const EnsembleSummary& s) {
    os << "time,mean,stddev\n";
    for (Eigen::Index k = 0; k < s.time.size(); ++k) {
        os << fmt9(s.time[k]) << ',' << fmt9(s.mean[k]) << ',' << fmt9(s.stddev[k]) << '\n';
    }
}

}  // namespace gnm
