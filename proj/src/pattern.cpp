#include "gnm/pattern.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "gnm/error.hpp"

namespace gnm {

SpikeRaster::SpikeRaster(int n_channels, Eigen::Index n_bins) : n_channels_(n_channels) {
    if (n_channels < 0 || n_bins < 0) throw DomainError("raster dimensions must be non-negative");
    bins_.resize(static_cast<std::size_t>(n_bins));
}

std::size_t SpikeRaster::event_count() const {
    std::size_t n = 0;
    for (const auto& b : bins_) n += b.size();
    return n;
}

bool SpikeRaster::add(int channel, Eigen::Index bin) {
    if (channel < 0 || channel >= n_channels_ || bin < 0 || bin >= n_bins()) {
        throw DomainError("spike event outside raster bounds");
    }
    auto& b = bins_[static_cast<std::size_t>(bin)];
    auto it = std::lower_bound(b.begin(), b.end(), channel);
    if (it != b.end() && *it == channel) return false;
    b.insert(it, channel);
    return true;
}

bool SpikeRaster::contains(int channel, Eigen::Index bin) const {
    if (bin < 0 || bin >= n_bins()) return false;
    const auto& b = bins_[static_cast<std::size_t>(bin)];
    return std::binary_search(b.begin(), b.end(), channel);
}

std::vector<SpikeEvent> SpikeRaster::events() const {
    std::vector<SpikeEvent> out;
    out.reserve(event_count());
    for (std::size_t t = 0; t < bins_.size(); ++t) {
        for (int c : bins_[t]) out.push_back({c, static_cast<Eigen::Index>(t)});
    }
    return out;
}

SpikeRaster SpikeRaster::slice(Eigen::Index start, Eigen::Index length) const {
    if (start < 0 || length < 0 || start + length > n_bins()) throw DomainError("slice outside raster");
    SpikeRaster out(n_channels_, length);
    std::copy(bins_.begin() + start, bins_.begin() + start + length, out.bins_.begin());
    return out;
}

void SpikeRaster::paste(const SpikeRaster& src, Eigen::Index start) {
    if (src.n_channels_ != n_channels_) throw DomainError("channel count mismatch in paste");
    if (start < 0 || start + src.n_bins() > n_bins()) throw DomainError("paste outside raster");
    std::copy(src.bins_.begin(), src.bins_.end(), bins_.begin() + start);
}

Eigen::VectorXd SpikeRaster::drive(const Eigen::Ref<const Eigen::VectorXd>& weights) const {
    if (weights.size() != n_channels_) throw DomainError("weight vector length must equal channel count");
    Eigen::VectorXd out(n_bins());
    for (Eigen::Index t = 0; t < n_bins(); ++t) {
        double s = 0.0;
        for (int c : bins_[static_cast<std::size_t>(t)]) s += weights[c];
        out[t] = s;
    }
    return out;
}

Eigen::MatrixXd SpikeRaster::dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_channels_, n_bins());
    for (Eigen::Index t = 0; t < n_bins(); ++t) {
        for (int c : bins_[static_cast<std::size_t>(t)]) m(c, t) = 1.0;
    }
    return m;
}

int PatternSet::n_classes() const {
    int k = 0;
    for (const auto& p : patterns) k = std::max(k, p.label);
    return k;
}

void validate(const PatternSet& set) {
    if (set.patterns.empty()) throw DomainError("pattern set is empty");
    const int n = set.n_channels();
    const Eigen::Index m = set.pattern_length();
    std::vector<bool> seen(static_cast<std::size_t>(set.n_classes()) + 1, false);
    for (const auto& p : set.patterns) {
        if (p.raster.n_channels() != n || p.raster.n_bins() != m) {
            throw DomainError("all patterns must share N and M");
        }
        if (p.label < 1) throw DomainError("class labels must be positive");
        seen[static_cast<std::size_t>(p.label)] = true;
    }
    for (std::size_t k = 1; k < seen.size(); ++k) {
        if (!seen[k]) throw DomainError("class labels must cover 1..K");
    }
}

std::vector<bool> Episode::noise_mask() const {
    std::vector<bool> mask(static_cast<std::size_t>(length()), true);
    for (const Window& w : windows) {
        for (Eigen::Index t = w.start; t < w.start + window_length; ++t) mask[static_cast<std::size_t>(t)] = false;
    }
    return mask;
}

std::vector<Eigen::Index> Episode::noise_bins() const {
    const auto mask = noise_mask();
    std::vector<Eigen::Index> out;
    for (std::size_t t = 0; t < mask.size(); ++t) {
        if (mask[t]) out.push_back(static_cast<Eigen::Index>(t));
    }
    return out;
}

int Episode::target_total(const PatternSet& set) const {
    int total = 0;
    for (const Window& w : windows) total += set.patterns.at(static_cast<std::size_t>(w.pattern_index)).label;
    return total;
}

void fill_noise(Rng& rng, SpikeRaster& raster, Eigen::Index start, Eigen::Index length, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("spike probability must lie in [0, 1]");
    const auto n = static_cast<std::uint64_t>(raster.n_channels());
    const auto total = static_cast<std::uint64_t>(length) * n;
    if (p == 0.0 || total == 0) return;
    if (p == 1.0) {
        for (Eigen::Index t = start; t < start + length; ++t) {
            for (int c = 0; c < raster.n_channels(); ++c) raster.add(c, t);
        }
        return;
    }
    // Skip over runs of zeros; equivalent to independent Bernoulli draws.
    std::uint64_t k = geometric_skip(rng, p);
    while (k < total) {
        raster.add(static_cast<int>(k % n), start + static_cast<Eigen::Index>(k / n));
        k += 1 + geometric_skip(rng, p);
    }
}

SpikeRaster generate_pattern(Rng& rng, int n_channels, Eigen::Index n_bins, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("spike probability must lie in [0, 1]");
    SpikeRaster r(n_channels, n_bins);
    fill_noise(rng, r, 0, n_bins, p);
    return r;
}

PatternSet make_pattern_set(Rng& rng, int n_classes, int per_class, int n_channels, Eigen::Index n_bins,
                            double p) {
    if (n_classes < 1 || per_class < 1) throw ConfigError("need at least one class and one pattern per class");
    PatternSet set;
    for (int k = 1; k <= n_classes; ++k) {
        for (int j = 0; j < per_class; ++j) {
            set.patterns.push_back({generate_pattern(rng, n_channels, n_bins, p), k});
        }
    }
    return set;
}

Episode compose_episode(Rng& rng, const PatternSet& set, Eigen::Index length, std::vector<Window> windows,
                        double p) {
    validate(set);
    Episode ep;
    ep.window_length = set.pattern_length();
    ep.raster = SpikeRaster(set.n_channels(), length);
    std::sort(windows.begin(), windows.end(), [](const Window& a, const Window& b) { return a.start < b.start; });
    Eigen::Index end = 0;
    for (const Window& w : windows) {
        if (w.start < end || w.start + ep.window_length > length) {
            throw ConfigError("pattern windows overlap or exceed the episode");
        }
        if (w.pattern_index < 0 || w.pattern_index >= static_cast<int>(set.patterns.size())) {
            throw ConfigError("window refers to an unknown pattern");
        }
        end = w.start + ep.window_length;
    }
    fill_noise(rng, ep.raster, 0, length, p);
    for (const Window& w : windows) {
        ep.raster.paste(set.patterns[static_cast<std::size_t>(w.pattern_index)].raster, w.start);
    }
    ep.windows = std::move(windows);
    return ep;
}

Episode generate_episode(Rng& rng, const PatternSet& set, const EpisodeConfig& cfg) {
    validate(set);
    const Eigen::Index m = set.pattern_length();
    if (cfg.length < static_cast<Eigen::Index>(cfg.max_occurrences) * m) {
        throw ConfigError("episode too short for the maximum number of occurrences");
    }
    std::vector<int> placements;
    for (std::size_t i = 0; i < set.patterns.size(); ++i) {
        const auto count = uniform_index(rng, static_cast<std::uint64_t>(cfg.max_occurrences) + 1);
        for (std::uint64_t j = 0; j < count; ++j) placements.push_back(static_cast<int>(i));
    }
    if (static_cast<Eigen::Index>(placements.size()) * m > cfg.length) {
        throw ConfigError("drawn occurrences cannot fit into the episode");
    }

    std::vector<Window> windows;
    const auto n_starts = static_cast<std::uint64_t>(cfg.length - m + 1);
    for (int idx : placements) {
        bool placed = false;
        for (int attempt = 0; attempt < cfg.max_attempts && !placed; ++attempt) {
            const auto start = static_cast<Eigen::Index>(uniform_index(rng, n_starts));
            const bool clash = std::any_of(windows.begin(), windows.end(), [&](const Window& w) {
                return start < w.start + m && w.start < start + m;
            });
            if (!clash) {
                windows.push_back({start, idx});
                placed = true;
            }
        }
        if (!placed) throw ConfigError("could not place pattern window without overlap");
    }
    return compose_episode(rng, set, cfg.length, std::move(windows), cfg.p);
}

void write_episode(std::ostream& os, const Episode& ep) {
    os << ep.raster.n_channels() << ',' << ep.window_length << ',' << ep.length() << '\n';
    os << "# events\n";
    for (const SpikeEvent& e : ep.raster.events()) os << e.channel << ',' << e.bin << '\n';
    os << "# windows\n";
    for (const Window& w : ep.windows) os << w.start << ',' << w.pattern_index << '\n';
}

namespace {

bool parse_pair(const std::string& line, long long& a, long long& b) {
    std::istringstream ss(line);
    char comma = 0;
    return static_cast<bool>(ss >> a >> comma >> b) && comma == ',';
}

}  // namespace

Episode read_episode(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("episode file is empty");
    long long n = 0, m = 0, t = 0;
    {
        std::istringstream ss(line);
        char c1 = 0, c2 = 0;
        if (!(ss >> n >> c1 >> m >> c2 >> t) || c1 != ',' || c2 != ',') throw ConfigError("bad episode header");
    }
    Episode ep;
    ep.raster = SpikeRaster(static_cast<int>(n), static_cast<Eigen::Index>(t));
    ep.window_length = static_cast<Eigen::Index>(m);
    enum { none, events, windows } section = none;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line == "# events") {
            section = events;
            continue;
        }
        if (line == "# windows") {
            section = windows;
            continue;
        }
        long long a = 0, b = 0;
        if (section == none || !parse_pair(line, a, b)) throw ConfigError("bad episode line: " + line);
        if (section == events) {
            ep.raster.add(static_cast<int>(a), static_cast<Eigen::Index>(b));
        } else {
            if (a < 0 || a + m > t) throw ConfigError("window outside episode");
            ep.windows.push_back({static_cast<Eigen::Index>(a), static_cast<int>(b)});
        }
    }
    return ep;
}

}  // namespace gnm
