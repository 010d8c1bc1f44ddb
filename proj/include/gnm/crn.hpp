#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "gnm/neuron.hpp"
#include "gnm/pattern.hpp"
#include "gnm/rng.hpp"

namespace gnm {

// Timed addition of molecules to input species `species`.
struct Injection {
    double time = 0.0;
    int species = 0;
    std::int64_t amount = 0;
};

// Chemical realisation of the eta = 0 neuron. For each input species I_i:
//   I_i -> V    at rate w_i * C per molecule
//   I_i -> 0    at rate (1 - w_i) * C per molecule
// and V -> 0 at rate alpha per molecule.
struct ReactionSystem {
    Eigen::VectorXd w;
    double alpha = 0.2;
    double c = 10.0;
    std::int64_t n_mol = 100;
    std::vector<Injection> events;  // sorted by time
    std::int64_t v_initial = 0;     // V molecules present at t = 0

    struct Channel {
        int reactant = 0;  // input species index, or -1 for V
        bool to_v = false;  // product is V (otherwise the null species)
        double rate = 0.0;  // per molecule
    };

    int n_inputs() const { return static_cast<int>(w.size()); }
    // The 2N + 1 reaction channels, inputs first, V decay last.
    std::vector<Channel> channels() const;
};

ReactionSystem crn_from_weights(const Eigen::Ref<const Eigen::VectorXd>& w, double alpha, double c,
                                std::int64_t n_mol);

// Adds one injection of n_mol molecules per spike; spikes in bin b arrive at
// time offset + b.
void add_spikes(ReactionSystem& system, const SpikeRaster& raster, double offset = 0.0);

struct Trajectory {
    Eigen::VectorXd time;
    Eigen::VectorXd v_count;
    Eigen::VectorXd input_count;  // sum over input species
    Eigen::VectorXd removed;      // cumulative molecules lost to the null species
    std::int64_t n_mol = 1;

    Eigen::VectorXd normalized() const { return v_count / static_cast<double>(n_mol); }
};

// Exact direct-method stochastic simulation on [0, T], with injections
// applied at their scheduled times. Sample k (time k * sample_dt) reflects
// every reaction and injection at or before that time.
Trajectory ssa_run(const ReactionSystem& system, Rng& rng, double T, double sample_dt);

// Mean-field equations dI_i/dt = -C I_i, dV/dt = C sum_i w_i I_i - alpha V
// integrated with fixed-step RK4 (step <= `step`), injections as jumps.
Trajectory ode_reference(const ReactionSystem& system, double T, double sample_dt, double step = 1e-3);

// Normalised potential as a trace for readout::spike_integral.
StateTrace to_state_trace(const Trajectory& traj);

struct EnsembleSummary {
    Eigen::VectorXd time;
    Eigen::VectorXd mean;    // normalised
    Eigen::VectorXd stddev;  // sample standard deviation, normalised
    int runs = 0;
};

struct NoiseStudyRow {
    std::int64_t n_mol = 0;
    double rmse = 0.0;               // mean SSA vs ODE, normalised units
    double within_3se = 0.0;         // fraction of grid points with |mean - ode| <= 3 SE
    EnsembleSummary ensemble;
    Trajectory ode;
};

struct NoiseStudyConfig {
    double alpha = 0.2;
    double c = 10.0;
    std::vector<std::int64_t> n_mols{25, 100, 500};
    int runs = 100;
    double sample_dt = 0.1;
    std::uint64_t seed = 1;
};

// Per-run seeds are derived from (seed, n_mol, run index).
std::vector<NoiseStudyRow> noise_study(const Eigen::Ref<const Eigen::VectorXd>& w, const SpikeRaster& inputs,
                                       const NoiseStudyConfig& cfg, std::vector<std::vector<Trajectory>>* runs_out = nullptr);

// Reduces run trajectories (same grid) to mean and sample standard deviation.
EnsembleSummary summarize(const std::vector<Trajectory>& runs);

void write_trajectory_csv(std::ostream& os, const std::vector<Trajectory>& runs);
void write_summary_csv(std::ostream& os, const EnsembleSummary& summary);

}  // namespace gnm
