#include "gnm/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

#include "gnm/csv.hpp"
#include "gnm/error.hpp"

namespace gnm {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || *end != '\0' || errno == ERANGE) throw ConfigError("bad number for " + key + ": " + text);
    return v;
}

long long to_int(const std::string& key, const std::string& text) {
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(text.c_str(), &end, 10);
    if (text.empty() || *end != '\0' || errno == ERANGE) throw ConfigError("bad integer for " + key + ": " + text);
    return v;
}

std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

}  // namespace

Settings Settings::parse(std::istream& is) {
    Settings s;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        s.values_[key] = trim(t.substr(eq + 1));
    }
    return s;
}

Settings Settings::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse(in);
}

std::string Settings::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Settings::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : to_double(key, it->second);
}

long long Settings::get_int(const std::string& key, long long fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : to_int(key, it->second);
}

std::vector<double> Settings::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    for (const auto& item : split(it->second)) out.push_back(to_double(key, item));
    return out;
}

std::vector<std::uint64_t> Settings::get_seeds(const std::string& key,
                                               const std::vector<std::uint64_t>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<std::uint64_t> out;
    for (const auto& item : split(it->second)) {
        // "a:b" expands to the half-open range a..b-1.
        const auto colon = item.find(':');
        if (colon != std::string::npos) {
            const long long a = to_int(key, item.substr(0, colon));
            const long long b = to_int(key, item.substr(colon + 1));
            if (a < 0 || b < a) throw ConfigError("bad seed range for " + key);
            for (long long v = a; v < b; ++v) out.push_back(static_cast<std::uint64_t>(v));
        } else {
            const long long v = to_int(key, item);
            if (v < 0) throw ConfigError("seeds must be non-negative");
            out.push_back(static_cast<std::uint64_t>(v));
        }
    }
    return out;
}

NeuronParams neuron_params_from(const Settings& s, NeuronParams p) {
    p.alpha = s.get_double("alpha", p.alpha);
    p.beta = s.get_double("beta", p.beta);
    p.gamma = s.get_double("gamma", p.gamma);
    p.zeta = s.get_double("zeta", p.zeta);
    p.eta = s.get_double("eta", p.eta);
    p.h = s.get_double("h", p.h);
    p.theta_b = s.get_double("theta_b", p.theta_b);
    p.theta_r = s.get_double("theta_r", p.theta_r);
    return p;
}

TaskConfig task_from(const Settings& s) {
    TaskConfig t;
    t.n_classes = static_cast<int>(s.get_int("classes", t.n_classes));
    t.per_class = static_cast<int>(s.get_int("per_class", t.per_class));
    t.n_channels = static_cast<int>(s.get_int("n_channels", t.n_channels));
    t.pattern_length = s.get_int("pattern_length", t.pattern_length);
    t.p = s.get_double("p", t.p);
    if (t.n_classes < 1 || t.per_class < 1 || t.n_channels < 1 || t.pattern_length < 1) {
        throw ConfigError("task dimensions must be positive");
    }
    return t;
}

EpisodeConfig episode_from(const Settings& s) {
    EpisodeConfig e;
    e.length = s.get_int("episode_length", e.length);
    e.max_occurrences = static_cast<int>(s.get_int("max_occurrences", e.max_occurrences));
    e.p = s.get_double("p", e.p);
    return e;
}

TrainConfig train_config_from(const Settings& s) {
    TrainConfig c;
    c.epochs = static_cast<int>(s.get_int("epochs", c.epochs));
    const std::string algo = s.get_string("algorithm", "all");
    if (algo == "all") {
        c.algorithm = Algorithm::all;
    } else if (algo == "et") {
        c.algorithm = Algorithm::et;
    } else {
        throw ConfigError("algorithm must be all or et");
    }
    c.lambda = s.get_double("lambda", default_lambda(c.algorithm));
    c.trace_keep = s.get_double("trace_keep", c.trace_keep);
    const std::string model = s.get_string("model", "gnm");
    if (model == "gnm") {
        c.neuron.kind = NeuronKind::gnm;
    } else if (model == "lif") {
        c.neuron.kind = NeuronKind::lif;
    } else {
        throw ConfigError("model must be gnm or lif");
    }
    c.neuron.params = neuron_params_from(s);
    c.neuron.refractory = static_cast<int>(s.get_int("refractory", c.neuron.refractory));
    c.episode = episode_from(s);
    c.seed = static_cast<std::uint64_t>(s.get_int("seed", static_cast<long long>(c.seed)));
    c.gamma_mom = s.get_double("gamma_mom", c.gamma_mom);
    c.init_max = s.get_double("init_max", c.init_max);
    validate(c);
    return c;
}

EvalConfig eval_config_from(const Settings& s) {
    EvalConfig e;
    e.cap = static_cast<int>(s.get_int("cap", e.cap));
    e.reps = static_cast<int>(s.get_int("reps", e.reps));
    e.mean_gap = s.get_double("mean_gap", e.mean_gap);
    e.p = s.get_double("p", e.p);
    e.seed = static_cast<std::uint64_t>(s.get_int("eval_seed", static_cast<long long>(e.seed)));
    if (e.cap < 1 || e.reps < 1) throw ConfigError("cap and reps must be positive");
    return e;
}

BpConfig bp_config_from(const Settings& s) {
    BpConfig c;
    c.epochs = static_cast<int>(s.get_int("epochs", c.epochs));
    c.lambda = s.get_double("bp_lambda", s.get_double("lambda", c.lambda));
    c.n_hidden = static_cast<int>(s.get_int("hidden", c.n_hidden));
    c.kappa = s.get_double("kappa", c.kappa);
    c.out_params = neuron_params_from(s, c.out_params);
    c.hidden_params.alpha = s.get_double("hidden_alpha", c.out_params.alpha);
    c.hidden_params.theta_r = s.get_double("hidden_theta_r", c.hidden_params.theta_r);
    c.episode = episode_from(s);
    c.seed = static_cast<std::uint64_t>(s.get_int("seed", static_cast<long long>(c.seed)));
    c.gamma_mom = s.get_double("gamma_mom", c.gamma_mom);
    c.init_hidden = s.get_double("init_hidden", c.init_hidden);
    c.init_out = s.get_double("init_out", c.init_out);
    return c;
}

ContinuousConfig continuous_config_from(const Settings& s) {
    ContinuousConfig c;
    c.epochs = static_cast<int>(s.get_int("epochs", c.epochs));
    c.lambda = s.get_double("lambda", c.lambda);
    c.neuron = neuron_params_from(s, c.neuron);
    c.episode.length = s.get_int("episode_length", c.episode.length);
    c.episode.max_occurrences = static_cast<int>(s.get_int("max_occurrences", c.episode.max_occurrences));
    c.episode.p = s.get_double("p", c.episode.p);
    c.dt = s.get_double("dt", c.dt);
    c.seed = static_cast<std::uint64_t>(s.get_int("seed", static_cast<long long>(c.seed)));
    c.gamma_mom = s.get_double("gamma_mom", c.gamma_mom);
    c.init_max = s.get_double("init_max", c.init_max);
    return c;
}

NoiseStudyConfig noise_study_from(const Settings& s) {
    NoiseStudyConfig c;
    c.alpha = s.get_double("alpha", c.alpha);
    c.c = s.get_double("C", c.c);
    c.runs = static_cast<int>(s.get_int("runs", c.runs));
    c.sample_dt = s.get_double("sample_dt", c.sample_dt);
    c.seed = static_cast<std::uint64_t>(s.get_int("seed", static_cast<long long>(c.seed)));
    if (s.has("n_mol")) {
        c.n_mols.clear();
        for (double v : s.get_doubles("n_mol", {})) {
            if (v < 1.0) throw ConfigError("n_mol must be >= 1");
            c.n_mols.push_back(static_cast<std::int64_t>(v));
        }
    }
    return c;
}

std::vector<std::pair<std::string, std::string>> describe(const TrainConfig& c) {
    const NeuronParams& p = c.neuron.params;
    return {
        {"model", to_string(c.neuron.kind)},
        {"algorithm", to_string(c.algorithm)},
        {"alpha", fmt9(p.alpha)},
        {"beta", fmt9(p.beta)},
        {"gamma", fmt9(p.gamma)},
        {"zeta", fmt9(p.zeta)},
        {"eta", fmt9(p.eta)},
        {"h", fmt9(p.h)},
        {"theta_b", fmt9(p.theta_b)},
        {"theta_r", fmt9(p.theta_r)},
        {"refractory", std::to_string(c.neuron.refractory)},
        {"lambda", fmt9(c.lambda)},
        {"trace_keep", fmt9(c.trace_keep)},
        {"gamma_mom", fmt9(c.gamma_mom)},
        {"epochs", std::to_string(c.epochs)},
        {"seed", std::to_string(c.seed)},
        {"init_max", fmt9(c.init_max)},
        {"episode_length", std::to_string(c.episode.length)},
        {"max_occurrences", std::to_string(c.episode.max_occurrences)},
        {"p", fmt9(c.episode.p)},
    };
}

}  // namespace gnm
