#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gnm/deep_net.hpp"
#include "gnm/learn.hpp"
#include "gnm/pattern.hpp"

namespace gnm {

// Reference constants for the multi-spike tempotron, which is not simulated
// here: mean noisy performance on the single-pattern task (cap 1000), its
// win count against the ALL-trained GNM out of 50 two-class runs, and its
// membrane and synaptic time constants.
inline constexpr double kMstNoisyPerformance = 377.0;
inline constexpr int kMstWinsOutOf50 = 3;
inline constexpr double kMstTauM = 20.0;
inline constexpr double kMstTauS = 5.0;
// ET beat ALL in this many of 50 two-class runs.
inline constexpr int kEtWinsOutOf50 = 46;

struct TaskConfig {
    int n_classes = 1;
    int per_class = 1;
    int n_channels = 100;
    Eigen::Index pattern_length = 50;
    double p = 0.005;
};

PatternSet make_task(const TaskConfig& task, std::uint64_t seed);

struct EvalConfig {
    int cap = 1000;
    int reps = 30;
    double mean_gap = 200.0;  // mean noise bins between consecutive placements
    double p = 0.005;
    std::uint64_t seed = 1;
};

struct EvalResult {
    double noisy_performance = 0.0;
    int cap = 0;
    int repetitions = 0;
    std::vector<int> survival;
};

// Crossing bins of some classifier in response to a raster.
using Responder = std::function<std::vector<Eigen::Index>(const SpikeRaster&)>;

// Noise stream of `length` bins that opens with a pattern window; further
// windows follow after geometric noise gaps (support {0, 1, ...}, given
// mean) and show a uniformly chosen pattern. The window layout and the noise
// come from separate streams, so a longer stream extends a shorter one.
Episode evaluation_stream(std::uint64_t seed, const PatternSet& set, Eigen::Index length, double mean_gap, double p);

// Bins survived before the first failure: a crossing outside every window
// (fails at that bin), a crossing beyond the label inside a window (fails at
// that bin), or a window that ends with too few crossings (fails at its
// end). Capped at `cap`.
int survival_time(const Episode& stream, const std::vector<Eigen::Index>& crossings, const PatternSet& set, int cap);

EvalResult noisy_performance(const Responder& respond, const PatternSet& set, const EvalConfig& cfg);
EvalResult noisy_performance(const NeuronSpec& neuron, const WeightVector& w, const PatternSet& set,
                             const EvalConfig& cfg);
EvalResult noisy_performance(const LayeredNet& net, const PatternSet& set, const EvalConfig& cfg);

struct SweepGrid {
    std::vector<double> alphas;
    std::vector<double> etas;
    std::vector<std::uint64_t> seeds;
    TrainConfig train;  // alpha, eta and seed are overwritten per point
    EvalConfig eval;
    TaskConfig task;
    std::uint64_t master_seed = 1;
    unsigned threads = 0;
};

struct SweepRow {
    std::size_t alpha_index = 0;
    std::size_t eta_index = 0;
    std::size_t seed_index = 0;
    double alpha = 0.0;
    double eta = 0.0;
    std::uint64_t seed = 0;
    double noisy_perf = 0.0;  // NaN when the point failed
    int cap = 0;
    std::string error;
};

// Job seeds: patterns and evaluation streams from (master, seed); training
// from (master, alpha index, eta index, seed). Rows come back sorted by
// (alpha index, eta index, seed index).
std::vector<SweepRow> run_sweep(const SweepGrid& grid);

// Trains and evaluates a single grid point; run_sweep calls this per job.
SweepRow run_sweep_point(const SweepGrid& grid, std::size_t ai, std::size_t ei, std::size_t si);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

struct Heatmap {
    std::vector<double> alphas;
    std::vector<double> etas;
    Eigen::MatrixXd perf;  // alphas x etas, mean over seeds (NaN rows skipped)
};

Heatmap aggregate(const SweepGrid& grid, const std::vector<SweepRow>& rows);

// For each eta: best performance over alpha minus the best over alpha at eta = 0.
Eigen::VectorXd residuals(const Heatmap& heatmap);

struct ModelConfig {
    enum class Kind { single, net };
    std::string name;
    Kind kind = Kind::single;
    TrainConfig train;
    BpConfig bp;
};

struct CompareConfig {
    TaskConfig task;
    EvalConfig eval;
    std::vector<ModelConfig> models;
    std::vector<std::uint64_t> seeds;
    std::uint64_t master_seed = 1;
    unsigned threads = 0;
};

struct ComparisonTable {
    std::vector<std::string> models;
    std::vector<std::uint64_t> seeds;
    Eigen::MatrixXd perf;  // models x seeds

    Eigen::Index index_of(const std::string& model) const;
    // Seeds on which model a scored strictly higher than model b.
    int wins(const std::string& a, const std::string& b) const;
    double mean(const std::string& model) const;
    // mean(a) / mean(b); for a = LIF and b = GNM this is the LIF ratio.
    double ratio(const std::string& a, const std::string& b) const;
    // Per model, number of seeds where it is the unique best.
    std::vector<int> win_counts() const;
};

// Every model sees the same pattern set, training seed and evaluation
// streams for a given seed.
ComparisonTable compare_models(const CompareConfig& cfg);

void write_compare_csv(std::ostream& os, const ComparisonTable& table);

}  // namespace gnm
