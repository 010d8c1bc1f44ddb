#pragma once

#include <cstdint>
#include <iosfwd>

#include <Eigen/Core>

#include "gnm/learn.hpp"
#include "gnm/neuron.hpp"
#include "gnm/pattern.hpp"

namespace gnm {

// Inputs -> hidden GNMs with lateral inhibition -> one output GNM.
//
// Only the eta = 0 regime is supported, where every unit is a linear leaky
// integrator and the hidden-to-output signal is the rectified
// super-threshold potential a_j(t) = max(V_j(t) - theta_r, 0):
//
//   V_j(t) = (1 - alpha_h) V_j(t-1) + sum_i W_ji I_i(t) - kappa sum_{k!=j} a_k(t-1)
//   V_o(t) = (1 - alpha_o) V_o(t-1) + sum_j u_j a_j(t)
struct LayeredNet {
    Eigen::MatrixXd w_hidden;  // hidden x inputs
    Eigen::VectorXd w_out;     // hidden
    NeuronParams hidden_params;
    NeuronParams out_params;
    double kappa = 0.0;

    Eigen::Index n_hidden() const { return w_hidden.rows(); }
    Eigen::Index n_inputs() const { return w_hidden.cols(); }
};

void validate(const LayeredNet& net);

struct NetTrace {
    Eigen::MatrixXd hidden_v;  // hidden x T
    Eigen::MatrixXd hidden_a;  // hidden x T
    StateTrace out;
};

struct NetGradient {
    Eigen::MatrixXd d_hidden;
    Eigen::VectorXd d_out;
};

NetTrace net_forward(const LayeredNet& net, const SpikeRaster& inputs);

// Gradient of L = -sum_t E(t) V_o(t) with respect to both weight layers,
// by backpropagation through time. The rectifier's subgradient at the kink
// is 0.
NetGradient net_backward(const LayeredNet& net, const SpikeRaster& inputs, const NetTrace& trace,
                         const Eigen::Ref<const Eigen::VectorXd>& error_trace);

// The loss itself; the finite-difference checks differentiate this.
double net_loss(const LayeredNet& net, const SpikeRaster& inputs, const Eigen::Ref<const Eigen::VectorXd>& error_trace);

// Output-neuron crossings, in the same form as single-neuron simulation.
Simulation simulate(const LayeredNet& net, const SpikeRaster& inputs);

struct GradientCheck {
    double max_rel_error = 0.0;
    double norm_analytic = 0.0;
};

// Compares net_backward against central differences of net_loss for every
// weight; relative error is ||g - g_fd|| / max(||g||, ||g_fd||).
GradientCheck check_gradient(const LayeredNet& net, const SpikeRaster& inputs,
                             const Eigen::Ref<const Eigen::VectorXd>& error_trace, double step = 1e-5);

struct BpConfig {
    int epochs = 10000;
    double lambda = 1e-4;
    int n_hidden = 10;
    double kappa = 0.05;
    NeuronParams hidden_params{0.3, 0.3, 1.0, 1.0, 0.0, 4.0, 1.0, 0.5};
    NeuronParams out_params;
    EpisodeConfig episode;
    std::uint64_t seed = 1;
    double gamma_mom = 0.2;
    double init_hidden = 0.3;
    double init_out = 0.5;
};

LayeredNet initial_net(Rng& rng, int n_inputs, const BpConfig& cfg);

struct BpResult {
    LayeredNet net;
    std::vector<EpochRecord> history;
};

// Per episode: forward, error trace from the output readout, backward, a
// momentum-smoothed descent step on both layers, clip to [0, 1].
BpResult bp_train(const BpConfig& cfg, const PatternSet& set);

// "GNM-NET v1", "hidden inputs", one comma-separated line per hidden row,
// one line of output weights, then "# key=value" metadata.
void write_net(std::ostream& os, const LayeredNet& net);
LayeredNet read_net(std::istream& is);

}  // namespace gnm
