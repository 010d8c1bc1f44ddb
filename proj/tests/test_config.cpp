#include <sstream>

#include "doctest.h"
#include "gnm/config.hpp"
#include "gnm/error.hpp"

using namespace gnm;

namespace {

Settings parse(const std::string& text) {
    std::istringstream is(text);
    return Settings::parse(is);
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("key=value parsing") {
    const Settings s = parse("# comment\nalpha = 0.25\n\n  eta=0.5  \nalpha=0.4\nseeds=0:3, 7\nname = x y\n");
    CHECK(s.get_double("alpha", 0.0) == 0.4);
    CHECK(s.get_double("eta", 0.0) == 0.5);
    CHECK(s.get_double("beta", 0.3) == 0.3);
    CHECK(s.get_string("name", "") == "x y");
    CHECK(s.get_seeds("seeds", {}) == std::vector<std::uint64_t>{0, 1, 2, 7});
    CHECK(parse("alphas=0.1,0.2").get_doubles("alphas", {}) == std::vector<double>{0.1, 0.2});
}

TEST_CASE("malformed settings are configuration errors") {
    CHECK_THROWS_AS(parse("no equals sign\n"), ConfigError);
    CHECK_THROWS_AS(parse("=3\n"), ConfigError);
    CHECK_THROWS_AS(parse("alpha=abc").get_double("alpha", 0.0), ConfigError);
    CHECK_THROWS_AS(parse("epochs=1.5").get_int("epochs", 0), ConfigError);
    CHECK_THROWS_AS(parse("seeds=5:2").get_seeds("seeds", {}), ConfigError);
    CHECK_THROWS_AS(parse("seeds=-1").get_seeds("seeds", {}), ConfigError);
    CHECK_THROWS_AS(Settings::load("/nonexistent/file.cfg"), ConfigError);
}

TEST_CASE("later values override earlier ones") {
    Settings s = parse("lambda=0.1\n");
    s.set("lambda", "0.2");
    CHECK(train_config_from(s).lambda == 0.2);
}

TEST_CASE("builders apply defaults and overrides") {
    const TrainConfig d = train_config_from(Settings{});
    CHECK(d.epochs == 10000);
    CHECK(d.lambda == 1e-4);
    CHECK(d.algorithm == Algorithm::all);
    CHECK(d.neuron.params.alpha == 0.3);
    CHECK(d.episode.length == 2000);

    const TrainConfig c = train_config_from(parse("algorithm=et\nmodel=lif\nrefractory=4\neta=0.2\nh=6\n"));
    CHECK(c.algorithm == Algorithm::et);
    CHECK(c.neuron.kind == NeuronKind::lif);
    CHECK(c.neuron.refractory == 4);
    CHECK(c.neuron.params.eta == 0.2);
    CHECK(c.neuron.params.h == 6.0);

    CHECK_THROWS_AS(train_config_from(parse("algorithm=sgd")), ConfigError);
    CHECK_THROWS_AS(train_config_from(parse("alpha=2")), ConfigError);
    CHECK_THROWS_AS(task_from(parse("classes=0")), ConfigError);
    CHECK_THROWS_AS(eval_config_from(parse("reps=0")), ConfigError);

    const NoiseStudyConfig n = noise_study_from(parse("n_mol=10,20\nruns=5\nC=3"));
    CHECK(n.n_mols == std::vector<std::int64_t>{10, 20});
    CHECK(n.runs == 5);
    CHECK(n.c == 3.0);
}

TEST_CASE("description lists the training configuration") {
    const auto d = describe(TrainConfig{});
    bool has_seed = false;
    for (const auto& [k, v] : d) has_seed = has_seed || (k == "seed" && v == "1");
    CHECK(has_seed);
}

}  // TEST_SUITE
