// gnm-lab: train, evaluate and compare generalised neuron models.
//
// Every subcommand accepts --config FILE (flat key=value) and one flag per
// setting; flags override values from the file.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gnm/config.hpp"
#include "gnm/crn.hpp"
#include "gnm/csv.hpp"
#include "gnm/deep_net.hpp"
#include "gnm/error.hpp"
#include "gnm/harness.hpp"
#include "gnm/learn.hpp"

namespace {

constexpr std::uint64_t kHeldOutStream = 0x68656c64;  // "held"
constexpr std::uint64_t kTraceStream = 0x74726365;    // "trce"

using namespace gnm;

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Key {
    const char* name;
    const char* help;
};

// Settings understood by the builders in gnm/config.hpp.
const std::vector<Key> kKeys = {
    {"alpha", "leak per bin (rate in continuous mode)"},
    {"beta", "reset-variable decay"},
    {"gamma", "reset-coupled decay coefficient"},
    {"zeta", "Hill rate"},
    {"eta", "spikiness in [0, 1]"},
    {"h", "Hill exponent"},
    {"theta_b", "behavioural threshold"},
    {"theta_r", "readout threshold"},
    {"lambda", "learning rate"},
    {"bp_lambda", "learning rate for the layered network"},
    {"et_lambda", "learning rate for error-trace models in compare"},
    {"trace_keep", "error-trace input decay per bin (0 = raw spikes)"},
    {"gamma_mom", "momentum coefficient"},
    {"epochs", "training episodes"},
    {"seed", "training seed"},
    {"seeds", "seed list, e.g. 0,1,2 or 0:5"},
    {"pattern_seed", "seed of the pattern set"},
    {"eval_seed", "seed of the evaluation streams"},
    {"master_seed", "master seed for sweeps and comparisons"},
    {"cap", "noisy-performance cap in bins"},
    {"reps", "evaluation repetitions"},
    {"mean_gap", "mean noise gap between evaluation patterns"},
    {"classes", "number of pattern classes"},
    {"per_class", "patterns per class"},
    {"n_channels", "input channels N"},
    {"pattern_length", "pattern length M in bins"},
    {"p", "spike probability per bit"},
    {"episode_length", "training episode length in bins"},
    {"max_occurrences", "max placements per pattern per episode"},
    {"algorithm", "all | et"},
    {"model", "gnm | lif"},
    {"refractory", "LIF refractory bins"},
    {"init_max", "initial weights ~ U[0, init_max]"},
    {"alphas", "sweep alpha values"},
    {"etas", "sweep eta values"},
    {"models", "comparison models: gnm-all, gnm-et, lif, lif-et, bp"},
    {"hidden", "hidden units"},
    {"kappa", "lateral inhibition"},
    {"hidden_alpha", "hidden-unit leak"},
    {"hidden_theta_r", "hidden activation threshold"},
    {"init_hidden", "initial hidden weights bound"},
    {"init_out", "initial output weights bound"},
    {"n_mol", "molecules per input spike, list"},
    {"runs", "SSA runs per n_mol"},
    {"C", "input-species decay rate"},
    {"sample_dt", "trajectory sample spacing"},
    {"dt", "continuous-mode sample spacing"},
    {"presentations", "held-out presentations scored after continuous training"},
    {"threads", "worker threads (0 = all cores)"},
};

struct CommonOptions {
    std::string config_path;
    std::map<std::string, std::string> flags;
    std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "key=value config file");
    cmd->add_option("-o,--out", opts.out, "output path");
    for (const Key& k : kKeys) {
        // "-h" belongs to --help, so the Hill exponent is spelled --hill-h.
        std::string flag = std::string(k.name) == "h" ? "--hill-h" : std::string("--") + k.name;
        for (auto& ch : flag) {
            if (ch == '_') ch = '-';
        }
        cmd->add_option_function<std::string>(
            flag, [&opts, name = std::string(k.name)](const std::string& v) { opts.flags[name] = v; }, k.help);
    }
}

Settings merged(const CommonOptions& opts) {
    Settings s = opts.config_path.empty() ? Settings{} : Settings::load(opts.config_path);
    for (const auto& [k, v] : opts.flags) s.set(k, v);
    return s;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    return os;
}

std::uint64_t get_seed(const Settings& s, const char* key, std::uint64_t fallback) {
    const long long v = s.get_int(key, static_cast<long long>(fallback));
    if (v < 0) throw ConfigError(std::string(key) + " must be non-negative");
    return static_cast<std::uint64_t>(v);
}

PatternSet task_patterns(const Settings& s) {
    return make_task(task_from(s), get_seed(s, "pattern_seed", 1));
}

void write_history(const std::string& path, const std::vector<EpochRecord>& history) {
    auto os = open_out(path);
    os << "epoch,target,actual,noise_crossings,window_errors\n";
    for (std::size_t i = 0; i < history.size(); ++i) {
        const auto& r = history[i];
        os << i << ',' << r.target << ',' << r.actual << ',' << r.noise_crossings << ',' << r.window_errors << '\n';
    }
}

// Potential over one evaluation-style stream; `target` is the label of the
// window covering the sample, 0 on noise.
void write_trace(const std::string& path, const StateTrace& tr, const Episode& ep, const PatternSet& set,
                 double theta_r) {
    std::vector<int> target(static_cast<std::size_t>(ep.length()), 0);
    for (const Window& w : ep.windows) {
        const int label = set.patterns[static_cast<std::size_t>(w.pattern_index)].label;
        for (Eigen::Index b = w.start; b < w.start + ep.window_length; ++b) target[static_cast<std::size_t>(b)] = label;
    }
    auto os = open_out(path);
    os << "time,v,theta_r,target\n";
    for (Eigen::Index k = 0; k < tr.size(); ++k) {
        const double t = static_cast<double>(k) * tr.dt;
        const auto bin = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(t + 1e-9)), ep.length() - 1);
        os << fmt9(t) << ',' << fmt9(tr.v[k]) << ',' << fmt9(theta_r) << ',' << target[static_cast<std::size_t>(bin)]
           << '\n';
    }
}

Episode trace_stream(const EvalConfig& eval, const PatternSet& set, Eigen::Index length) {
    return evaluation_stream(derive_seed(eval.seed, {kTraceStream}), set, length, eval.mean_gap, eval.p);
}

int cmd_train(const CommonOptions& opts, bool continuous, const std::string& history_path,
              const std::string& trace_path) {
    const Settings s = merged(opts);
    const PatternSet set = task_patterns(s);
    const EvalConfig eval = eval_config_from(s);
    WeightVector w;
    std::vector<std::pair<std::string, std::string>> meta;
    if (continuous) {
        const ContinuousConfig cfg = continuous_config_from(s);
        TrainResult r = train_continuous(cfg, set);
        w = r.weights;
        meta = {{"mode", "continuous"}, {"alpha", fmt9(cfg.neuron.alpha)}, {"theta_r", fmt9(cfg.neuron.theta_r)},
                {"lambda", fmt9(cfg.lambda)}, {"epochs", std::to_string(cfg.epochs)},
                {"seed", std::to_string(cfg.seed)}};
        if (!history_path.empty()) write_history(history_path, r.history);
        const auto scores = score_presentations(cfg.neuron, set, w, cfg.dt, derive_seed(cfg.seed, {kHeldOutStream}),
                                                static_cast<int>(s.get_int("presentations", 10)), cfg.episode.p);
        int correct = 0;
        for (std::size_t k = 0; k < scores.size(); ++k) {
            std::cout << "presentation " << k << " label " << scores[k].label << " integral "
                      << fmt9(scores[k].integral) << '\n';
            correct += scores[k].correct() ? 1 : 0;
        }
        std::cout << "correct " << correct << " of " << scores.size() << '\n';
        if (!trace_path.empty()) {
            const Episode ep = trace_stream(eval, set, 400);
            write_trace(trace_path, respond_continuous(cfg.neuron, ep, w, cfg.dt).trace, ep, set, cfg.neuron.theta_r);
        }
    } else {
        const TrainConfig cfg = train_config_from(s);
        TrainResult r = train(cfg, set);
        w = r.weights;
        meta = describe(cfg);
        meta.insert(meta.begin(), {"mode", "discrete"});
        if (!history_path.empty()) write_history(history_path, r.history);
        const EvalResult ev = noisy_performance(cfg.neuron, w, set, eval);
        std::cout << "noisy_perf " << fmt9(ev.noisy_performance) << " cap " << ev.cap << '\n';
        if (!trace_path.empty()) {
            const Episode ep = trace_stream(eval, set, eval.cap + set.pattern_length());
            write_trace(trace_path, simulate(cfg.neuron, ep.raster, w).trace, ep, set, cfg.neuron.params.theta_r);
        }
    }
    meta.emplace_back("pattern_seed", std::to_string(get_seed(s, "pattern_seed", 1)));
    meta.emplace_back("classes", std::to_string(task_from(s).n_classes));
    const std::string out = opts.out.empty() ? "weights.txt" : opts.out;
    auto os = open_out(out);
    write_weights(os, w, meta);
    return 0;
}

int cmd_eval(const CommonOptions& opts, const std::string& weights_path, const std::string& trace_path) {
    const Settings s = merged(opts);
    std::ifstream in(weights_path);
    if (!in) throw ConfigError("cannot open weights file " + weights_path);
    const WeightVector w = read_weights(in);
    const PatternSet set = task_patterns(s);
    if (w.size() != set.n_channels()) throw ConfigError("weight count differs from n_channels");
    const TrainConfig cfg = train_config_from(s);
    const EvalConfig eval = eval_config_from(s);
    const EvalResult r = noisy_performance(cfg.neuron, w, set, eval);
    std::cout << "noisy_perf " << fmt9(r.noisy_performance) << " cap " << r.cap << " reps " << r.repetitions << '\n';
    if (!trace_path.empty()) {
        const Episode ep = trace_stream(eval, set, eval.cap + set.pattern_length());
        write_trace(trace_path, simulate(cfg.neuron, ep.raster, w).trace, ep, set, cfg.neuron.params.theta_r);
    }
    if (!opts.out.empty()) {
        auto os = open_out(opts.out);
        os << "rep,survival\n";
        for (std::size_t i = 0; i < r.survival.size(); ++i) os << i << ',' << r.survival[i] << '\n';
    }
    return 0;
}

int cmd_sweep(const CommonOptions& opts, const std::string& residuals_path) {
    const Settings s = merged(opts);
    SweepGrid grid;
    grid.alphas = s.get_doubles("alphas", {0.025, 0.08, 0.3, 0.6, 1.0});
    grid.etas = s.get_doubles("etas", {0.0, 0.25, 0.5, 0.75, 0.975});
    grid.seeds = s.get_seeds("seeds", {0, 1, 2});
    grid.train = train_config_from(s);
    grid.eval = eval_config_from(s);
    grid.task = task_from(s);
    grid.master_seed = get_seed(s, "master_seed", 1);
    grid.threads = static_cast<unsigned>(s.get_int("threads", 0));
    for (double a : grid.alphas) {
        if (a < 0.0 || a > 1.0) throw ConfigError("sweep alpha outside [0, 1]");
    }
    for (double e : grid.etas) {
        if (e < 0.0 || e > 1.0) throw ConfigError("sweep eta outside [0, 1]");
    }
    const auto rows = run_sweep(grid);
    const std::string out = opts.out.empty() ? "sweep.csv" : opts.out;
    {
        auto os = open_out(out);
        write_sweep_csv(os, rows);
    }
    for (const auto& r : rows) {
        if (!r.error.empty()) std::cerr << "point alpha=" << r.alpha << " eta=" << r.eta << " failed: " << r.error << '\n';
    }
    const Heatmap hm = aggregate(grid, rows);
    if (!residuals_path.empty()) {
        const Eigen::VectorXd res = residuals(hm);
        auto os = open_out(residuals_path);
        os << "eta,residual\n";
        for (std::size_t e = 0; e < hm.etas.size(); ++e) {
            os << fmt9(hm.etas[e]) << ',' << fmt9(res[static_cast<Eigen::Index>(e)]) << '\n';
        }
    }
    return 0;
}

ModelConfig model_named(const std::string& name, const Settings& s) {
    ModelConfig m;
    m.name = name;
    m.train = train_config_from(s);
    if (name == "gnm-all") {
        m.train.neuron.kind = NeuronKind::gnm;
        m.train.algorithm = Algorithm::all;
    } else if (name == "gnm-et") {
        m.train.neuron.kind = NeuronKind::gnm;
        m.train.algorithm = Algorithm::et;
        m.train.lambda = s.get_double("et_lambda", default_lambda(Algorithm::et));
    } else if (name == "lif") {
        m.train.neuron.kind = NeuronKind::lif;
        m.train.algorithm = Algorithm::all;
    } else if (name == "lif-et") {
        m.train.neuron.kind = NeuronKind::lif;
        m.train.algorithm = Algorithm::et;
        m.train.lambda = s.get_double("et_lambda", default_lambda(Algorithm::et));
    } else if (name == "bp") {
        m.kind = ModelConfig::Kind::net;
        m.bp = bp_config_from(s);
    } else {
        throw ConfigError("unknown model " + name);
    }
    return m;
}

int cmd_compare(const CommonOptions& opts) {
    const Settings s = merged(opts);
    CompareConfig cfg;
    cfg.task = task_from(s);
    cfg.eval = eval_config_from(s);
    cfg.seeds = s.get_seeds("seeds", {0, 1, 2});
    cfg.master_seed = get_seed(s, "master_seed", 1);
    cfg.threads = static_cast<unsigned>(s.get_int("threads", 0));
    std::string list = s.get_string("models", "gnm-all,gnm-et");
    std::size_t pos = 0;
    while (pos <= list.size()) {
        const auto comma = list.find(',', pos);
        const std::string item = list.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!item.empty()) cfg.models.push_back(model_named(item, s));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    const ComparisonTable table = compare_models(cfg);
    const std::string out = opts.out.empty() ? "compare.csv" : opts.out;
    {
        auto os = open_out(out);
        write_compare_csv(os, table);
    }
    const auto wins = table.win_counts();
    for (std::size_t m = 0; m < table.models.size(); ++m) {
        std::cout << table.models[m] << " mean " << fmt9(table.mean(table.models[m])) << " wins " << wins[m] << '\n';
    }
    for (std::size_t a = 0; a < table.models.size(); ++a) {
        for (std::size_t b = 0; b < table.models.size(); ++b) {
            if (a == b) continue;
            std::cout << table.models[a] << " > " << table.models[b] << " on " << table.wins(table.models[a], table.models[b])
                      << "/" << table.seeds.size() << " seeds, ratio " << fmt9(table.ratio(table.models[a], table.models[b]))
                      << '\n';
        }
    }
    return 0;
}

int cmd_crn(const CommonOptions& opts, const std::string& weights_path) {
    const Settings s = merged(opts);
    const PatternSet set = task_patterns(s);
    WeightVector w;
    if (weights_path.empty()) {
        Rng rng = make_rng(get_seed(s, "seed", 1), {0x77});
        w = initial_weights(rng, set.n_channels(), 1.0);
    } else {
        std::ifstream in(weights_path);
        if (!in) throw ConfigError("cannot open weights file " + weights_path);
        w = read_weights(in);
    }
    // One presentation of every pattern, separated by noise.
    Rng rng = make_rng(get_seed(s, "seed", 1), {0x63726e});
    const Eigen::Index m = set.pattern_length();
    std::vector<Window> windows;
    for (std::size_t i = 0; i < set.patterns.size(); ++i) {
        windows.push_back({static_cast<Eigen::Index>(20 + static_cast<Eigen::Index>(i) * (m + 40)), static_cast<int>(i)});
    }
    const Eigen::Index length = 20 + static_cast<Eigen::Index>(set.patterns.size()) * (m + 40);
    const Episode ep = compose_episode(rng, set, length, windows, s.get_double("p", 0.005));
    const NoiseStudyConfig cfg = noise_study_from(s);
    std::vector<std::vector<Trajectory>> runs;
    const auto rows = noise_study(w, ep.raster, cfg, &runs);

    const std::string prefix = opts.out.empty() ? "crn" : opts.out;
    {
        auto os = open_out(prefix + "_ode.csv");
        write_trajectory_csv(os, {rows.front().ode});
    }
    {
        auto os = open_out(prefix + "_rmse.csv");
        os << "n_mol,rmse,within_3se\n";
        for (const auto& r : rows) os << r.n_mol << ',' << fmt9(r.rmse) << ',' << fmt9(r.within_3se) << '\n';
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string tag = prefix + "_n" + std::to_string(rows[i].n_mol);
        {
            auto os = open_out(tag + "_summary.csv");
            write_summary_csv(os, rows[i].ensemble);
        }
        auto os = open_out(tag + "_runs.csv");
        write_trajectory_csv(os, runs[i]);
        std::cout << "n_mol " << rows[i].n_mol << " rmse " << fmt9(rows[i].rmse) << " within_3se "
                  << fmt9(rows[i].within_3se) << '\n';
    }
    return 0;
}

int cmd_bp_train(const CommonOptions& opts) {
    const Settings s = merged(opts);
    const PatternSet set = task_patterns(s);
    const BpConfig cfg = bp_config_from(s);
    const BpResult r = bp_train(cfg, set);
    const EvalResult ev = noisy_performance(r.net, set, eval_config_from(s));
    std::cout << "noisy_perf " << fmt9(ev.noisy_performance) << " cap " << ev.cap << '\n';
    const std::string out = opts.out.empty() ? "net.txt" : opts.out;
    auto os = open_out(out);
    write_net(os, r.net);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalised neuron model laboratory"};
    app.require_subcommand(1);

    CommonOptions train_opts, eval_opts, sweep_opts, compare_opts, crn_opts, bp_opts;
    bool continuous = false;
    std::string history, eval_weights, residuals_out, crn_weights, train_trace, eval_trace;

    auto* train = app.add_subcommand("train", "train a single neuron and write its weights");
    add_common(train, train_opts);
    train->add_flag("--continuous", continuous, "continuous-time GNM trained on spike integrals");
    train->add_option("--history", history, "per-epoch CSV");
    train->add_option("--trace", train_trace, "potential over one evaluation stream, CSV");

    auto* eval = app.add_subcommand("eval", "noisy performance of saved weights");
    add_common(eval, eval_opts);
    eval->add_option("--weights", eval_weights, "GNM-WEIGHTS file")->required();
    eval->add_option("--trace", eval_trace, "potential over one evaluation stream, CSV");

    auto* sweep = app.add_subcommand("sweep", "(alpha, eta) grid of train + evaluate");
    add_common(sweep, sweep_opts);
    sweep->add_option("--residuals", residuals_out, "per-eta residual CSV");

    auto* compare = app.add_subcommand("compare", "compare models across seeds");
    add_common(compare, compare_opts);

    auto* crn = app.add_subcommand("crn", "stochastic vs mean-field chemical realisation");
    add_common(crn, crn_opts);
    crn->add_option("--weights", crn_weights, "GNM-WEIGHTS file (default: random weights)");

    auto* bp = app.add_subcommand("bp-train", "train the layered network by backpropagation");
    add_common(bp, bp_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*train) return cmd_train(train_opts, continuous, history, train_trace);
        if (*eval) return cmd_eval(eval_opts, eval_weights, eval_trace);
        if (*sweep) return cmd_sweep(sweep_opts, residuals_out);
        if (*compare) return cmd_compare(compare_opts);
        if (*crn) return cmd_crn(crn_opts, crn_weights);
        if (*bp) return cmd_bp_train(bp_opts);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
