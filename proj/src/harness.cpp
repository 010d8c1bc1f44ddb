#include "gnm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "gnm/csv.hpp"
#include "gnm/error.hpp"
#include "gnm/parallel.hpp"
#include "gnm/readout.hpp"

namespace gnm {

namespace {

constexpr std::uint64_t kPatternStream = 0x70617474;  // "patt"
constexpr std::uint64_t kEvalStream = 0x6576616c;     // "eval"
constexpr std::uint64_t kTrainStream = 0x74726e;      // "trn"
constexpr std::uint64_t kLayoutStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

}  // namespace

PatternSet make_task(const TaskConfig& task, std::uint64_t seed) {
    Rng rng(seed);
    return make_pattern_set(rng, task.n_classes, task.per_class, task.n_channels, task.pattern_length, task.p);
}

Episode evaluation_stream(std::uint64_t seed, const PatternSet& set, Eigen::Index length, double mean_gap, double p) {
    validate(set);
    if (!(mean_gap >= 0.0)) throw ConfigError("mean gap must be non-negative");
    Rng layout = make_rng(seed, {kLayoutStream});
    Rng noise = make_rng(seed, {kNoiseStream});
    const Eigen::Index m = set.pattern_length();
    const double gap_p = 1.0 / (mean_gap + 1.0);
    std::vector<Window> windows;
    Eigen::Index start = 0;
    while (start + m <= length) {
        const auto idx = static_cast<int>(uniform_index(layout, set.patterns.size()));
        windows.push_back({start, idx});
        const auto gap = gap_p >= 1.0 ? 0 : static_cast<Eigen::Index>(geometric_skip(layout, gap_p));
        start += m + gap;
    }
    return compose_episode(noise, set, length, std::move(windows), p);
}

int survival_time(const Episode& stream, const std::vector<Eigen::Index>& crossings, const PatternSet& set, int cap) {
    const SpikeReadout ro = make_readout(crossings, stream);
    Eigen::Index fail = std::numeric_limits<Eigen::Index>::max();
    if (!ro.noise_crossings.empty()) fail = ro.noise_crossings.front();
    std::size_t c = 0;
    for (std::size_t i = 0; i < stream.windows.size(); ++i) {
        const Window& w = stream.windows[i];
        if (w.start >= fail) break;
        const int label = set.patterns[static_cast<std::size_t>(w.pattern_index)].label;
        while (c < ro.crossings.size() && ro.crossings[c] < w.start) ++c;
        if (ro.per_window_counts[i] > label) {
            fail = std::min(fail, ro.crossings[c + static_cast<std::size_t>(label)]);
        } else if (ro.per_window_counts[i] < label) {
            fail = std::min(fail, w.start + stream.window_length);
        }
    }
    return static_cast<int>(std::min<Eigen::Index>(fail, cap));
}

EvalResult noisy_performance(const Responder& respond, const PatternSet& set, const EvalConfig& cfg) {
    if (cfg.reps < 1) throw ConfigError("need at least one repetition");
    if (cfg.cap < 1) throw ConfigError("cap must be positive");
    EvalResult out;
    out.cap = cfg.cap;
    out.repetitions = cfg.reps;
    const Eigen::Index length = cfg.cap + set.pattern_length();
    for (int r = 0; r < cfg.reps; ++r) {
        const Episode stream =
            evaluation_stream(derive_seed(cfg.seed, {static_cast<std::uint64_t>(r)}), set, length, cfg.mean_gap, cfg.p);
        out.survival.push_back(survival_time(stream, respond(stream.raster), set, cfg.cap));
    }
    double total = 0.0;
    for (int s : out.survival) total += s;
    out.noisy_performance = total / cfg.reps;
    return out;
}

EvalResult noisy_performance(const NeuronSpec& neuron, const WeightVector& w, const PatternSet& set,
                             const EvalConfig& cfg) {
    return noisy_performance([&](const SpikeRaster& r) { return simulate(neuron, r, w).crossings; }, set, cfg);
}

EvalResult noisy_performance(const LayeredNet& net, const PatternSet& set, const EvalConfig& cfg) {
    return noisy_performance([&](const SpikeRaster& r) { return simulate(net, r).crossings; }, set, cfg);
}

SweepRow run_sweep_point(const SweepGrid& grid, std::size_t ai, std::size_t ei, std::size_t si) {
    SweepRow row;
    row.alpha_index = ai;
    row.eta_index = ei;
    row.seed_index = si;
    row.alpha = grid.alphas.at(ai);
    row.eta = grid.etas.at(ei);
    row.seed = grid.seeds.at(si);
    row.cap = grid.eval.cap;
    try {
        const PatternSet set = make_task(grid.task, derive_seed(grid.master_seed, {row.seed, kPatternStream}));
        TrainConfig cfg = grid.train;
        cfg.neuron.params.alpha = row.alpha;
        cfg.neuron.params.eta = row.eta;
        cfg.seed = derive_seed(grid.master_seed, {ai, ei, row.seed});
        const TrainResult trained = train(cfg, set);
        EvalConfig eval = grid.eval;
        eval.seed = derive_seed(grid.master_seed, {row.seed, kEvalStream});
        row.noisy_perf = noisy_performance(cfg.neuron, trained.weights, set, eval).noisy_performance;
    } catch (const std::exception& e) {
        row.noisy_perf = std::numeric_limits<double>::quiet_NaN();
        row.error = e.what();
    }
    return row;
}

std::vector<SweepRow> run_sweep(const SweepGrid& grid) {
    const std::size_t na = grid.alphas.size();
    const std::size_t ne = grid.etas.size();
    const std::size_t ns = grid.seeds.size();
    std::vector<SweepRow> rows(na * ne * ns);
    parallel_for(
        rows.size(),
        [&](std::size_t job) {
            const std::size_t si = job % ns;
            const std::size_t ei = (job / ns) % ne;
            const std::size_t ai = job / (ns * ne);
            rows[job] = run_sweep_point(grid, ai, ei, si);
        },
        grid.threads);
    return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "alpha,eta,seed,noisy_perf,cap\n";
    for (const SweepRow& r : rows) {
        os << fmt9(r.alpha) << ',' << fmt9(r.eta) << ',' << r.seed << ','
           << (std::isnan(r.noisy_perf) ? std::string("nan") : fmt9(r.noisy_perf)) << ',' << r.cap << '\n';
    }
}

Heatmap aggregate(const SweepGrid& grid, const std::vector<SweepRow>& rows) {
    Heatmap hm;
    hm.alphas = grid.alphas;
    hm.etas = grid.etas;
    const auto na = static_cast<Eigen::Index>(grid.alphas.size());
    const auto ne = static_cast<Eigen::Index>(grid.etas.size());
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(na, ne);
    Eigen::MatrixXd count = Eigen::MatrixXd::Zero(na, ne);
    for (const SweepRow& r : rows) {
        if (std::isnan(r.noisy_perf)) continue;
        const auto a = static_cast<Eigen::Index>(r.alpha_index);
        const auto e = static_cast<Eigen::Index>(r.eta_index);
        sum(a, e) += r.noisy_perf;
        count(a, e) += 1.0;
    }
    hm.perf = sum.cwiseQuotient(count);  // 0/0 leaves NaN for failed cells
    return hm;
}

Eigen::VectorXd residuals(const Heatmap& hm) {
    const auto zero = std::find(hm.etas.begin(), hm.etas.end(), 0.0);
    if (zero == hm.etas.end()) throw DomainError("heatmap has no eta = 0 column");
    const auto z = static_cast<Eigen::Index>(zero - hm.etas.begin());
    const double best0 = hm.perf.col(z).maxCoeff();
    Eigen::VectorXd out(hm.perf.cols());
    for (Eigen::Index e = 0; e < hm.perf.cols(); ++e) out[e] = hm.perf.col(e).maxCoeff() - best0;
    return out;
}

Eigen::Index ComparisonTable::index_of(const std::string& model) const {
    const auto it = std::find(models.begin(), models.end(), model);
    if (it == models.end()) throw DomainError("unknown model " + model);
    return it - models.begin();
}

int ComparisonTable::wins(const std::string& a, const std::string& b) const {
    const Eigen::Index ia = index_of(a);
    const Eigen::Index ib = index_of(b);
    return static_cast<int>((perf.row(ia).array() > perf.row(ib).array()).count());
}

double ComparisonTable::mean(const std::string& model) const {
    return perf.row(index_of(model)).mean();
}

double ComparisonTable::ratio(const std::string& a, const std::string& b) const {
    return mean(a) / mean(b);
}

std::vector<int> ComparisonTable::win_counts() const {
    std::vector<int> counts(models.size(), 0);
    for (Eigen::Index s = 0; s < perf.cols(); ++s) {
        Eigen::Index best = 0;
        const double top = perf.col(s).maxCoeff(&best);
        if ((perf.col(s).array() == top).count() == 1) ++counts[static_cast<std::size_t>(best)];
    }
    return counts;
}

ComparisonTable compare_models(const CompareConfig& cfg) {
    if (cfg.models.size() < 2) throw ConfigError("comparison needs at least two models");
    ComparisonTable table;
    for (const auto& m : cfg.models) table.models.push_back(m.name);
    table.seeds = cfg.seeds;
    const std::size_t nm = cfg.models.size();
    const std::size_t ns = cfg.seeds.size();
    table.perf.setZero(static_cast<Eigen::Index>(nm), static_cast<Eigen::Index>(ns));
    parallel_for(
        nm * ns,
        [&](std::size_t job) {
            const std::size_t mi = job / ns;
            const std::size_t si = job % ns;
            const std::uint64_t seed = cfg.seeds[si];
            const PatternSet set = make_task(cfg.task, derive_seed(cfg.master_seed, {seed, kPatternStream}));
            EvalConfig eval = cfg.eval;
            eval.seed = derive_seed(cfg.master_seed, {seed, kEvalStream});
            const std::uint64_t train_seed = derive_seed(cfg.master_seed, {seed, kTrainStream});
            const ModelConfig& model = cfg.models[mi];
            double perf = 0.0;
            if (model.kind == ModelConfig::Kind::single) {
                TrainConfig tc = model.train;
                tc.seed = train_seed;
                perf = noisy_performance(tc.neuron, train(tc, set).weights, set, eval).noisy_performance;
            } else {
                BpConfig bc = model.bp;
                bc.seed = train_seed;
                perf = noisy_performance(bp_train(bc, set).net, set, eval).noisy_performance;
            }
            table.perf(static_cast<Eigen::Index>(mi), static_cast<Eigen::Index>(si)) = perf;
        },
        cfg.threads);
    return table;
}

void write_compare_csv(std::ostream& os, const ComparisonTable& t) {
    os << "model,seed,noisy_perf\n";
    for (std::size_t m = 0; m < t.models.size(); ++m) {
        for (std::size_t s = 0; s < t.seeds.size(); ++s) {
            os << t.models[m] << ',' << t.seeds[s] << ','
               << fmt9(t.perf(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(s))) << '\n';
        }
    }
}

}  // namespace gnm
