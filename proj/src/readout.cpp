#include "gnm/readout.hpp"

#include <algorithm>
#include <cmath>

#include "gnm/error.hpp"

namespace gnm {

int count_crossings(const StateTrace& trace, double theta_r, BinRange window) {
    if (trace.empty()) throw DomainError("empty trace");
    if (window.begin < 0 || window.end > trace.size() || window.begin > window.end) {
        throw DomainError("window outside trace bounds");
    }
    int n = 0;
    double prev = window.begin == 0 ? trace.v0 : trace.v[window.begin - 1];
    for (Eigen::Index t = window.begin; t < window.end; ++t) {
        const double v = trace.v[t];
        if (prev < theta_r && theta_r <= v) ++n;
        prev = v;
    }
    return n;
}

int count_crossings(const StateTrace& trace, double theta_r) {
    return count_crossings(trace, theta_r, {0, trace.size()});
}

std::vector<Eigen::Index> crossing_bins(const StateTrace& trace, double theta_r) {
    if (trace.empty()) throw DomainError("empty trace");
    std::vector<Eigen::Index> out;
    double prev = trace.v0;
    for (Eigen::Index t = 0; t < trace.size(); ++t) {
        if (prev < theta_r && theta_r <= trace.v[t]) out.push_back(t);
        prev = trace.v[t];
    }
    return out;
}

SpikeReadout make_readout(std::vector<Eigen::Index> crossings, const Episode& episode) {
    SpikeReadout out;
    out.per_window_counts.assign(episode.windows.size(), 0);
    // Windows are sorted and disjoint, so a merge pass suffices.
    std::size_t w = 0;
    for (Eigen::Index t : crossings) {
        while (w < episode.windows.size() && episode.windows[w].start + episode.window_length <= t) ++w;
        if (w < episode.windows.size() && episode.windows[w].start <= t) {
            ++out.per_window_counts[w];
        } else {
            out.noise_crossings.push_back(t);
        }
    }
    out.crossings = std::move(crossings);
    return out;
}

double spike_integral(const StateTrace& trace, double theta_r, Eigen::Index first, Eigen::Index last) {
    if (trace.empty()) return 0.0;
    first = std::max<Eigen::Index>(first, 0);
    last = std::min<Eigen::Index>(last, trace.size() - 1);
    double s = 0.0;
    for (Eigen::Index k = first; k < last; ++k) {
        const double a = trace.v[k];
        const double b = trace.v[k + 1];
        const bool above_a = a >= theta_r;
        const bool above_b = b >= theta_r;
        if (above_a && above_b) {
            s += 0.5 * (a + b) * trace.dt;
        } else if (above_a != above_b) {
            // Only the super-threshold part of the interval, located by
            // linear interpolation of the crossing.
            const double hi = above_a ? a : b;
            const double frac = (hi - theta_r) / std::abs(b - a);
            s += 0.5 * (hi + theta_r) * frac * trace.dt;
        }
    }
    return s;
}

double spike_integral(const StateTrace& trace, double theta_r) {
    return spike_integral(trace, theta_r, 0, trace.size() - 1);
}

int integral_class(double s) {
    return static_cast<int>(std::lround(s));
}

int aggregate_error(int actual_total, int target_total) {
    if (actual_total > target_total) return -1;
    if (actual_total < target_total) return 1;
    return 0;
}

Eigen::VectorXd build_error_trace(const SpikeReadout& readout, const Episode& episode, const PatternSet& set) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(episode.length());
    const double m = static_cast<double>(episode.window_length);
    for (std::size_t i = 0; i < episode.windows.size(); ++i) {
        const Window& w = episode.windows[i];
        const int k = set.patterns.at(static_cast<std::size_t>(w.pattern_index)).label;
        const double value = static_cast<double>(k - readout.per_window_counts.at(i)) / m;
        e.segment(w.start, episode.window_length).setConstant(value);
    }
    for (Eigen::Index t : readout.noise_crossings) e[t] = -1.0;
    return e;
}

}  // namespace gnm
