#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "gnm/neuron.hpp"
#include "gnm/pattern.hpp"
#include "gnm/readout.hpp"
#include "gnm/rng.hpp"

namespace gnm {

// Synaptic weights, each kept in [0, 1].
using WeightVector = Eigen::VectorXd;

struct MomentumState {
    Eigen::VectorXd prev_delta;
    double gamma_mom = 0.2;
};

enum class Algorithm { all, et };
enum class NeuronKind { gnm, lif };

const char* to_string(Algorithm a);
const char* to_string(NeuronKind k);

// Which single-neuron model is trained and how its output is read.
struct NeuronSpec {
    NeuronKind kind = NeuronKind::gnm;
    NeuronParams params;
    int refractory = 0;  // LIF only

    LifParams lif() const { return {params.alpha, params.theta_r, 0.0, refractory}; }
};

struct Simulation {
    StateTrace trace;
    std::vector<Eigen::Index> crossings;
};

// Discrete-time response of the neuron to a weighted raster. For the LIF the
// crossings are its spikes.
Simulation simulate(const NeuronSpec& spec, const SpikeRaster& raster, const Eigen::Ref<const WeightVector>& w);

struct TrainConfig {
    int epochs = 10000;
    double lambda = 1e-4;
    Algorithm algorithm = Algorithm::all;
    NeuronSpec neuron;
    EpisodeConfig episode;
    std::uint64_t seed = 1;
    double gamma_mom = 0.2;
    double init_max = 0.05;  // initial weights ~ U[0, init_max]
    // ET only: blame uses input traces x(t) = I(t) + trace_keep * x(t-1);
    // 0 blames the raw spikes.
    double trace_keep = 0.95;
};

// 1e-4 for ALL, 2e-3 for ET.
double default_lambda(Algorithm a);

void validate(const TrainConfig& cfg);

struct EpochRecord {
    int target = 0;
    int actual = 0;
    int noise_crossings = 0;
    int window_errors = 0;  // windows whose count differs from the label
};

struct TrainResult {
    WeightVector weights;
    std::vector<EpochRecord> history;
};

WeightVector initial_weights(Rng& rng, int n, double init_max);

// eps_i = sum_t I_i(t) V(t) over a discrete trace.
Eigen::VectorXd eligibility(const SpikeRaster& inputs, const Eigen::Ref<const Eigen::VectorXd>& v);
// Dense N x T inputs. A trace with dt == 1 is summed; otherwise each row is
// integrated with the trapezoidal rule.
Eigen::VectorXd eligibility(const Eigen::Ref<const Eigen::MatrixXd>& inputs, const StateTrace& trace);

// Indices of the top ceil(N/10) strictly positive eligibilities, ranked by
// value then by lower channel index.
std::vector<int> decile_gate(const Eigen::Ref<const Eigen::VectorXd>& eligibilities);

// delta = raw + gamma_mom * prev; prev := delta.
Eigen::VectorXd momentum_apply(const Eigen::Ref<const Eigen::VectorXd>& raw, MomentumState& momentum);

WeightVector all_update(const Eigen::Ref<const WeightVector>& w, const Eigen::Ref<const Eigen::VectorXd>& eligibilities,
                        int error_sign, double lambda, MomentumState& momentum);

// raw_i = lambda * sum_t I_i(t) E(t); no update when E is identically zero.
WeightVector et_update(const Eigen::Ref<const WeightVector>& w, const SpikeRaster& inputs,
                       const Eigen::Ref<const Eigen::VectorXd>& error_trace, double lambda, MomentumState& momentum);

// Same rule over dense N x T inputs.
WeightVector et_update(const Eigen::Ref<const WeightVector>& w, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                       const Eigen::Ref<const Eigen::VectorXd>& error_trace, double lambda, MomentumState& momentum);

// Leaky per-channel traces of a raster: x(0) = I(0), x(t) = I(t) + keep * x(t-1).
Eigen::MatrixXd input_traces(const SpikeRaster& raster, double keep);

TrainResult train(const TrainConfig& cfg, const PatternSet& set);

// Continuous-time GNM trained on spike integrals. Spikes in bin b arrive at
// time b; windows are scored by their integral S and the error trace is
// (k - S) / M over each window and minus the bin's super-threshold integral
// on noise bins.
struct ContinuousConfig {
    int epochs = 3000;
    double lambda = 2e-3;
    NeuronParams neuron;
    EpisodeConfig episode{400, 2, 0.005, 1000};
    double dt = 0.05;
    std::uint64_t seed = 1;
    double gamma_mom = 0.2;
    double init_max = 0.05;
};

struct ContinuousResponse {
    StateTrace trace;
    std::vector<double> window_integrals;
    Eigen::VectorXd noise_integrals;  // per bin, zero inside windows
};

std::vector<InputEvent> to_events(const SpikeRaster& raster, const Eigen::Ref<const WeightVector>& w);

ContinuousResponse respond_continuous(const NeuronParams& params, const Episode& episode,
                                      const Eigen::Ref<const WeightVector>& w, double dt);

TrainResult train_continuous(const ContinuousConfig& cfg, const PatternSet& set);

struct PresentationScore {
    int label = 0;
    double integral = 0.0;

    bool correct() const { return integral_class(integral) == label; }
};

// Held-out check: presentation k shows pattern k mod P inside fresh noise,
// preceded and followed by `lead` noise bins, and reports its window
// integral.
std::vector<PresentationScore> score_presentations(const NeuronParams& params, const PatternSet& set,
                                                   const Eigen::Ref<const WeightVector>& w, double dt,
                                                   std::uint64_t seed, int count, double p = 0.005,
                                                   Eigen::Index lead = 50);

// Weight file: "GNM-WEIGHTS v1", N, then N full-precision lines; metadata as
// trailing "# key=value" lines.
void write_weights(std::ostream& os, const WeightVector& w,
                   const std::vector<std::pair<std::string, std::string>>& metadata = {});
WeightVector read_weights(std::istream& is);

}  // namespace gnm
