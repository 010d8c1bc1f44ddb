#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gnm/crn.hpp"
#include "gnm/deep_net.hpp"
#include "gnm/harness.hpp"
#include "gnm/learn.hpp"

namespace gnm {

// Flat key=value settings. Lines starting with '#' and blank lines are
// ignored; later assignments replace earlier ones.
class Settings {
public:
    static Settings parse(std::istream& is);
    static Settings load(const std::string& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& values() const { return values_; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    // Comma-separated list.
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<std::uint64_t> get_seeds(const std::string& key, const std::vector<std::uint64_t>& fallback) const;

private:
    std::map<std::string, std::string> values_;
};

// Builders; every value not present keeps the library default. All throw
// ConfigError on malformed values.
NeuronParams neuron_params_from(const Settings& s, NeuronParams base = {});
TaskConfig task_from(const Settings& s);
EpisodeConfig episode_from(const Settings& s);
TrainConfig train_config_from(const Settings& s);
EvalConfig eval_config_from(const Settings& s);
BpConfig bp_config_from(const Settings& s);
ContinuousConfig continuous_config_from(const Settings& s);
NoiseStudyConfig noise_study_from(const Settings& s);

// "key=value" metadata pairs describing a training configuration.
std::vector<std::pair<std::string, std::string>> describe(const TrainConfig& cfg);

}  // namespace gnm
