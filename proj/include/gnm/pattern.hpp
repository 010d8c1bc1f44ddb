#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gnm/rng.hpp"

namespace gnm {

struct SpikeEvent {
    int channel = 0;
    Eigen::Index bin = 0;

    friend bool operator==(const SpikeEvent&, const SpikeEvent&) = default;
};

// Binary spike events on `n_channels` inputs over `n_bins` time bins.
// Stored bin-major; each bin keeps a sorted, duplicate-free channel list.
class SpikeRaster {
public:
    SpikeRaster() = default;
    SpikeRaster(int n_channels, Eigen::Index n_bins);

    int n_channels() const { return n_channels_; }
    Eigen::Index n_bins() const { return static_cast<Eigen::Index>(bins_.size()); }
    std::size_t event_count() const;

    // Returns false if the event was already present.
    bool add(int channel, Eigen::Index bin);
    bool contains(int channel, Eigen::Index bin) const;
    std::span<const int> active(Eigen::Index bin) const { return bins_[static_cast<std::size_t>(bin)]; }

    // Events ordered by (bin, channel).
    std::vector<SpikeEvent> events() const;

    SpikeRaster slice(Eigen::Index start, Eigen::Index length) const;
    // Overwrites bins [start, start + src.n_bins()) with the content of src.
    void paste(const SpikeRaster& src, Eigen::Index start);

    // Per-bin weighted input sum, I(t) = sum_i w_i [channel i spikes at t].
    Eigen::VectorXd drive(const Eigen::Ref<const Eigen::VectorXd>& weights) const;
    // n_channels x n_bins 0/1 matrix.
    Eigen::MatrixXd dense() const;

    friend bool operator==(const SpikeRaster&, const SpikeRaster&) = default;

private:
    int n_channels_ = 0;
    std::vector<std::vector<int>> bins_;
};

struct LabeledPattern {
    SpikeRaster raster;
    int label = 1;  // target spike count
};

struct PatternSet {
    std::vector<LabeledPattern> patterns;

    int n_channels() const { return patterns.empty() ? 0 : patterns.front().raster.n_channels(); }
    Eigen::Index pattern_length() const { return patterns.empty() ? 0 : patterns.front().raster.n_bins(); }
    int n_classes() const;
};

// Throws DomainError if rasters disagree in shape or labels are not 1..K.
void validate(const PatternSet& set);

struct Window {
    Eigen::Index start = 0;
    int pattern_index = 0;

    friend bool operator==(const Window&, const Window&) = default;
};

// A noise stream with embedded pattern windows. Windows are sorted by start
// and never overlap; every bin outside a window is noise.
struct Episode {
    SpikeRaster raster;
    std::vector<Window> windows;
    Eigen::Index window_length = 0;

    Eigen::Index length() const { return raster.n_bins(); }
    // true for bins outside every window.
    std::vector<bool> noise_mask() const;
    std::vector<Eigen::Index> noise_bins() const;
    // Sum of the class labels of all placements.
    int target_total(const PatternSet& set) const;

    friend bool operator==(const Episode&, const Episode&) = default;
};

struct EpisodeConfig {
    Eigen::Index length = 2000;
    int max_occurrences = 3;  // per pattern, drawn uniformly from 0..max
    double p = 0.005;
    int max_attempts = 1000;  // rejection-sampling cap per window
};

// Every one of the N*M bits is set independently with probability p.
SpikeRaster generate_pattern(Rng& rng, int n_channels, Eigen::Index n_bins, double p);

// Fills an existing raster's empty bins [start, start + length) with
// Bernoulli(p) noise.
void fill_noise(Rng& rng, SpikeRaster& raster, Eigen::Index start, Eigen::Index length, double p);

// `n_classes` classes with `per_class` patterns each, labels 1..n_classes.
PatternSet make_pattern_set(Rng& rng, int n_classes, int per_class, int n_channels, Eigen::Index n_bins,
                            double p);

Episode generate_episode(Rng& rng, const PatternSet& set, const EpisodeConfig& cfg);

// Places the given windows (sorted, disjoint) into a fresh noise stream.
Episode compose_episode(Rng& rng, const PatternSet& set, Eigen::Index length, std::vector<Window> windows,
                        double p);

// Text format: "N,M,T" header, "# events" then "channel,bin" lines,
// "# windows" then "start,pattern_index" lines.
void write_episode(std::ostream& os, const Episode& ep);
Episode read_episode(std::istream& is);

}  // namespace gnm
