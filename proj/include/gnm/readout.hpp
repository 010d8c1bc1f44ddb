#pragma once

#include <vector>

#include <Eigen/Core>

#include "gnm/neuron.hpp"
#include "gnm/pattern.hpp"

namespace gnm {

// Half-open bin range [begin, end).
struct BinRange {
    Eigen::Index begin = 0;
    Eigen::Index end = 0;
};

struct SpikeReadout {
    std::vector<Eigen::Index> crossings;     // strictly increasing
    std::vector<int> per_window_counts;      // parallel to Episode::windows
    std::vector<Eigen::Index> noise_crossings;

    int total() const { return static_cast<int>(crossings.size()); }
};

// Bins t in `window` with V(t-1) < theta_r <= V(t); V(-1) is trace.v0.
int count_crossings(const StateTrace& trace, double theta_r, BinRange window);
int count_crossings(const StateTrace& trace, double theta_r);

std::vector<Eigen::Index> crossing_bins(const StateTrace& trace, double theta_r);

// Assigns crossings to the episode's pattern windows or to noise.
SpikeReadout make_readout(std::vector<Eigen::Index> crossings, const Episode& episode);

inline SpikeReadout make_readout(const StateTrace& trace, double theta_r, const Episode& episode) {
    return make_readout(crossing_bins(trace, theta_r), episode);
}

// Trapezoidal integral of Theta(V - theta_r) * V over the samples of a
// continuous trace, optionally restricted to sample indices [first, last].
// Intervals that straddle the threshold contribute only their
// super-threshold part, with the crossing found by linear interpolation.
double spike_integral(const StateTrace& trace, double theta_r);
double spike_integral(const StateTrace& trace, double theta_r, Eigen::Index first, Eigen::Index last);

// Class estimate from a spike integral.
int integral_class(double s);

// -1 if the neuron spiked too often, +1 if too rarely, 0 otherwise.
int aggregate_error(int actual_total, int target_total);

// Signed per-bin error: (k - c) / M over each window with target k and
// count c, -1 at each noise crossing, 0 elsewhere.
Eigen::VectorXd build_error_trace(const SpikeReadout& readout, const Episode& episode, const PatternSet& set);

}  // namespace gnm
