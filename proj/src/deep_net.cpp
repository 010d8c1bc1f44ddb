#include "gnm/deep_net.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "gnm/error.hpp"
#include "gnm/readout.hpp"

namespace gnm {

void validate(const LayeredNet& net) {
    validate(net.hidden_params, TimeMode::discrete);
    validate(net.out_params, TimeMode::discrete);
    if (net.hidden_params.eta != 0.0 || net.out_params.eta != 0.0) {
        throw DomainError("layered network requires eta = 0 in every unit");
    }
    if (net.w_out.size() != net.w_hidden.rows()) throw DomainError("output weights must match hidden layer size");
    if (!(net.kappa >= 0.0)) throw DomainError("lateral inhibition must be non-negative");
}

NetTrace net_forward(const LayeredNet& net, const SpikeRaster& inputs) {
    validate(net);
    if (inputs.n_channels() != net.n_inputs()) throw DomainError("input channels differ from network inputs");
    const Eigen::Index h = net.n_hidden();
    const Eigen::Index n_t = inputs.n_bins();
    const double keep_h = 1.0 - net.hidden_params.alpha;
    const double keep_o = 1.0 - net.out_params.alpha;
    const double theta_h = net.hidden_params.theta_r;

    NetTrace tr;
    tr.hidden_v.setZero(h, n_t);
    tr.hidden_a.setZero(h, n_t);
    tr.out.resize(n_t);
    tr.out.v0 = 0.0;

    Eigen::VectorXd v = Eigen::VectorXd::Zero(h);
    Eigen::VectorXd a = Eigen::VectorXd::Zero(h);
    double vo = 0.0;
    for (Eigen::Index t = 0; t < n_t; ++t) {
        Eigen::VectorXd drive = Eigen::VectorXd::Zero(h);
        for (int c : inputs.active(t)) drive += net.w_hidden.col(c);
        // Inhibition from the other units' previous activations.
        const Eigen::VectorXd inhibition = net.kappa * (Eigen::VectorXd::Constant(h, a.sum()) - a);
        tr.out.d[t] = net.out_params.alpha * vo;
        v = keep_h * v + drive - inhibition;
        a = (v.array() - theta_h).max(0.0).matrix();
        vo = keep_o * vo + net.w_out.dot(a);
        tr.hidden_v.col(t) = v;
        tr.hidden_a.col(t) = a;
        tr.out.v[t] = vo;
    }
    return tr;
}

double net_loss(const LayeredNet& net, const SpikeRaster& inputs, const Eigen::Ref<const Eigen::VectorXd>& e) {
    const NetTrace tr = net_forward(net, inputs);
    if (e.size() != tr.out.size()) throw DomainError("error trace length differs from episode");
    return -e.dot(tr.out.v);
}

NetGradient net_backward(const LayeredNet& net, const SpikeRaster& inputs, const NetTrace& tr,
                         const Eigen::Ref<const Eigen::VectorXd>& e) {
    validate(net);
    const Eigen::Index h = net.n_hidden();
    const Eigen::Index n_t = inputs.n_bins();
    if (tr.hidden_v.rows() != h || tr.hidden_v.cols() != n_t || tr.out.size() != n_t || e.size() != n_t) {
        throw DomainError("trace, error trace and network dimensions disagree");
    }
    const double keep_h = 1.0 - net.hidden_params.alpha;
    const double keep_o = 1.0 - net.out_params.alpha;
    const double theta_h = net.hidden_params.theta_r;

    NetGradient g;
    g.d_hidden.setZero(h, net.n_inputs());
    g.d_out.setZero(h);

    double adj_o = 0.0;                                 // dL/dV_o(t), carried backwards
    Eigen::VectorXd adj_v_next = Eigen::VectorXd::Zero(h);  // dL/dV_j(t+1)
    for (Eigen::Index t = n_t - 1; t >= 0; --t) {
        adj_o = -e[t] + keep_o * adj_o;
        g.d_out += adj_o * tr.hidden_a.col(t);
        // a_j(t) feeds V_o(t) and, through inhibition, every V_k(t+1), k != j.
        const Eigen::VectorXd adj_a =
            adj_o * net.w_out - net.kappa * (Eigen::VectorXd::Constant(h, adj_v_next.sum()) - adj_v_next);
        const Eigen::VectorXd gate = (tr.hidden_v.col(t).array() > theta_h).cast<double>().matrix();
        const Eigen::VectorXd adj_v = adj_a.cwiseProduct(gate) + keep_h * adj_v_next;
        for (int c : inputs.active(t)) g.d_hidden.col(c) += adj_v;
        adj_v_next = adj_v;
    }
    return g;
}

Simulation simulate(const LayeredNet& net, const SpikeRaster& inputs) {
    Simulation sim;
    sim.trace = net_forward(net, inputs).out;
    sim.crossings = crossing_bins(sim.trace, net.out_params.theta_r);
    return sim;
}

GradientCheck check_gradient(const LayeredNet& net, const SpikeRaster& inputs,
                             const Eigen::Ref<const Eigen::VectorXd>& e, double step) {
    const NetGradient g = net_backward(net, inputs, net_forward(net, inputs), e);
    LayeredNet probe = net;
    NetGradient fd{Eigen::MatrixXd::Zero(net.n_hidden(), net.n_inputs()), Eigen::VectorXd::Zero(net.n_hidden())};
    auto central = [&](double& w) {
        const double saved = w;
        w = saved + step;
        const double up = net_loss(probe, inputs, e);
        w = saved - step;
        const double down = net_loss(probe, inputs, e);
        w = saved;
        return (up - down) / (2.0 * step);
    };
    for (Eigen::Index j = 0; j < net.n_hidden(); ++j) {
        for (Eigen::Index i = 0; i < net.n_inputs(); ++i) fd.d_hidden(j, i) = central(probe.w_hidden(j, i));
        fd.d_out[j] = central(probe.w_out[j]);
    }
    const double diff = std::sqrt((g.d_hidden - fd.d_hidden).squaredNorm() + (g.d_out - fd.d_out).squaredNorm());
    const double na = std::sqrt(g.d_hidden.squaredNorm() + g.d_out.squaredNorm());
    const double nf = std::sqrt(fd.d_hidden.squaredNorm() + fd.d_out.squaredNorm());
    const double scale = std::max(na, nf);
    return {scale == 0.0 ? 0.0 : diff / scale, na};
}

LayeredNet initial_net(Rng& rng, int n_inputs, const BpConfig& cfg) {
    LayeredNet net;
    net.w_hidden.resize(cfg.n_hidden, n_inputs);
    for (Eigen::Index j = 0; j < net.w_hidden.rows(); ++j) {
        for (Eigen::Index i = 0; i < net.w_hidden.cols(); ++i) net.w_hidden(j, i) = uniform(rng, 0.0, cfg.init_hidden);
    }
    net.w_out.resize(cfg.n_hidden);
    for (Eigen::Index j = 0; j < net.w_out.size(); ++j) net.w_out[j] = uniform(rng, 0.0, cfg.init_out);
    net.hidden_params = cfg.hidden_params;
    net.out_params = cfg.out_params;
    net.kappa = cfg.kappa;
    return net;
}

BpResult bp_train(const BpConfig& cfg, const PatternSet& set) {
    if (cfg.epochs < 0 || !(cfg.lambda >= 0.0) || cfg.n_hidden < 1) throw ConfigError("invalid backprop config");
    if (!(cfg.gamma_mom >= 0.0 && cfg.gamma_mom < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
    validate(set);
    Rng init_rng = make_rng(cfg.seed, {0x6e6574});  // "net"
    Rng episode_rng = make_rng(cfg.seed, {0x65706973});

    BpResult out;
    out.net = initial_net(init_rng, set.n_channels(), cfg);
    try {
        validate(out.net);
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    const Eigen::Index h = out.net.n_hidden();
    const Eigen::Index n = out.net.n_inputs();
    MomentumState mom_hidden{Eigen::VectorXd::Zero(h * n), cfg.gamma_mom};
    MomentumState mom_out{Eigen::VectorXd::Zero(h), cfg.gamma_mom};

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const Episode ep = generate_episode(episode_rng, set, cfg.episode);
        const NetTrace tr = net_forward(out.net, ep.raster);
        const SpikeReadout ro = make_readout(crossing_bins(tr.out, cfg.out_params.theta_r), ep);
        const Eigen::VectorXd e = build_error_trace(ro, ep, set);

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
        if ((e.array() == 0.0).all()) continue;

        const NetGradient g = net_backward(out.net, ep.raster, tr, e);
        const Eigen::Map<const Eigen::VectorXd> flat(g.d_hidden.data(), h * n);
        const Eigen::VectorXd step_hidden = momentum_apply(-cfg.lambda * flat, mom_hidden);
        const Eigen::VectorXd step_out = momentum_apply(-cfg.lambda * g.d_out, mom_out);
        out.net.w_hidden = (out.net.w_hidden + Eigen::Map<const Eigen::MatrixXd>(step_hidden.data(), h, n))
                               .cwiseMax(0.0)
                               .cwiseMin(1.0);
        out.net.w_out = (out.net.w_out + step_out).cwiseMax(0.0).cwiseMin(1.0);
    }
    return out;
}

namespace {

void write_params(std::ostream& os, const char* prefix, const NeuronParams& p) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "# %s=alpha:%.17g,theta_r:%.17g\n", prefix, p.alpha, p.theta_r);
    os << buf;
}

bool read_params(const std::string& line, const std::string& prefix, NeuronParams& p) {
    const std::string head = "# " + prefix + "=alpha:";
    if (line.rfind(head, 0) != 0) return false;
    std::istringstream ss(line.substr(head.size()));
    std::string rest;
    ss >> p.alpha;
    std::getline(ss, rest);
    const auto pos = rest.find("theta_r:");
    if (pos != std::string::npos) p.theta_r = std::stod(rest.substr(pos + 8));
    return true;
}

}  // namespace

void write_net(std::ostream& os, const LayeredNet& net) {
    char buf[64];
    os << "GNM-NET v1\n" << net.n_hidden() << ' ' << net.n_inputs() << '\n';
    auto row = [&](auto&& values, Eigen::Index n) {
        for (Eigen::Index i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", values(i));
            os << (i ? "," : "") << buf;
        }
        os << '\n';
    };
    for (Eigen::Index j = 0; j < net.n_hidden(); ++j) row(net.w_hidden.row(j), net.n_inputs());
    row(net.w_out, net.n_hidden());
    std::snprintf(buf, sizeof buf, "%.17g", net.kappa);
    os << "# kappa=" << buf << '\n';
    write_params(os, "hidden", net.hidden_params);
    write_params(os, "out", net.out_params);
}

LayeredNet read_net(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "GNM-NET v1") throw ConfigError("not a GNM-NET v1 file");
    long long h = 0, n = 0;
    if (!std::getline(is, line) || !(std::istringstream(line) >> h >> n) || h < 1 || n < 0) {
        throw ConfigError("bad network dimensions");
    }
    LayeredNet net;
    net.w_hidden.resize(h, n);
    net.w_out.resize(h);
    auto parse_row = [&](auto&& assign, long long count) {
        if (!std::getline(is, line)) throw ConfigError("network file truncated");
        std::istringstream ss(line);
        std::string cell;
        for (long long i = 0; i < count; ++i) {
            if (!std::getline(ss, cell, ',')) throw ConfigError("short weight row");
            assign(i, std::stod(cell));
        }
    };
    for (long long j = 0; j < h; ++j) parse_row([&](long long i, double v) { net.w_hidden(j, i) = v; }, n);
    parse_row([&](long long j, double v) { net.w_out[j] = v; }, h);
    while (std::getline(is, line)) {
        if (line.rfind("# kappa=", 0) == 0) net.kappa = std::stod(line.substr(8));
        read_params(line, "hidden", net.hidden_params);
        read_params(line, "out", net.out_params);
    }
    return net;
}

}  // namespace gnm
