#include <sstream>

#include "doctest.h"
#include "gnm/error.hpp"
#include "gnm/pattern.hpp"

using namespace gnm;

namespace {

PatternSet three_classes(Rng& rng) {
    PatternSet set;
    for (int k = 1; k <= 3; ++k) set.patterns.push_back({generate_pattern(rng, 20, 10, 0.1), k});
    return set;
}

}  // namespace

TEST_SUITE("pattern") {

TEST_CASE("raster basics") {
    SpikeRaster r(4, 6);
    CHECK(r.add(2, 3));
    CHECK_FALSE(r.add(2, 3));
    CHECK(r.add(0, 3));
    CHECK(r.contains(2, 3));
    CHECK_FALSE(r.contains(1, 3));
    CHECK(r.event_count() == 2);
    const auto ev = r.events();
    REQUIRE(ev.size() == 2);
    CHECK(ev[0] == SpikeEvent{0, 3});
    CHECK(ev[1] == SpikeEvent{2, 3});
    Eigen::VectorXd w(4);
    w << 0.1, 0.2, 0.3, 0.4;
    const Eigen::VectorXd drive = r.drive(w);
    CHECK(drive[3] == doctest::Approx(0.4));
    CHECK(drive.sum() == doctest::Approx(0.4));
    CHECK(r.dense().sum() == 2.0);
    CHECK_THROWS(r.add(4, 0));
    CHECK_THROWS(r.add(0, 6));
}

TEST_CASE("generate_pattern extremes") {
    Rng rng(1);
    CHECK(generate_pattern(rng, 10, 7, 0.0).event_count() == 0);
    CHECK(generate_pattern(rng, 10, 7, 1.0).event_count() == 70);
    CHECK_THROWS_AS(generate_pattern(rng, 10, 7, 1.1), DomainError);
    CHECK_THROWS_AS(generate_pattern(rng, 10, 7, -0.1), DomainError);
}

TEST_CASE("pattern event count matches the binomial mean") {
    Rng rng(2);
    double total = 0.0;
    for (int k = 0; k < 1000; ++k) total += static_cast<double>(generate_pattern(rng, 100, 50, 0.005).event_count());
    const double mean = total / 1000.0;
    // N M p = 25; three standard errors of the mean of 1000 draws is ~0.47.
    CHECK(mean >= 22.0);
    CHECK(mean <= 28.0);
    CHECK(std::abs(mean - 25.0) < 3.0 * std::sqrt(25.0 * 0.995 / 1000.0));
}

TEST_CASE("noise has the same per-bin rate inside and outside windows") {
    Rng rng(4);
    PatternSet set;
    set.patterns.push_back({generate_pattern(rng, 100, 50, 0.005), 1});
    EpisodeConfig cfg;
    long inside = 0, outside = 0, in_bins = 0, out_bins = 0;
    for (int k = 0; k < 300; ++k) {
        // Fresh patterns so the comparison is over the generating process.
        set.patterns[0].raster = generate_pattern(rng, 100, 50, 0.005);
        const Episode ep = generate_episode(rng, set, cfg);
        const auto mask = ep.noise_mask();
        for (Eigen::Index b = 0; b < ep.length(); ++b) {
            const auto n = static_cast<long>(ep.raster.active(b).size());
            if (mask[static_cast<std::size_t>(b)]) {
                outside += n;
                ++out_bins;
            } else {
                inside += n;
                ++in_bins;
            }
        }
    }
    REQUIRE(in_bins > 0);
    // Two-proportion z-test on channel-bin cells.
    const double n1 = 100.0 * static_cast<double>(in_bins);
    const double n2 = 100.0 * static_cast<double>(out_bins);
    const double p1 = static_cast<double>(inside) / n1;
    const double p2 = static_cast<double>(outside) / n2;
    const double pp = static_cast<double>(inside + outside) / (n1 + n2);
    const double z = (p1 - p2) / std::sqrt(pp * (1.0 - pp) * (1.0 / n1 + 1.0 / n2));
    CHECK(std::abs(z) < 4.0);
    CHECK(p2 == doctest::Approx(0.005).epsilon(0.05));
}

TEST_CASE("episode windows are disjoint and carry their patterns") {
    Rng rng(9);
    const PatternSet set = three_classes(rng);
    EpisodeConfig cfg;
    cfg.length = 200;
    cfg.p = 0.05;
    for (int k = 0; k < 200; ++k) {
        const Episode ep = generate_episode(rng, set, cfg);
        int target = 0;
        for (std::size_t i = 0; i < ep.windows.size(); ++i) {
            const Window& w = ep.windows[i];
            CHECK(w.start >= 0);
            CHECK(w.start + ep.window_length <= ep.length());
            if (i > 0) CHECK(ep.windows[i - 1].start + ep.window_length <= w.start);
            CHECK(ep.raster.slice(w.start, ep.window_length) ==
                  set.patterns[static_cast<std::size_t>(w.pattern_index)].raster);
            target += set.patterns[static_cast<std::size_t>(w.pattern_index)].label;
        }
        CHECK(ep.target_total(set) == target);
        // Every bin is either noise or inside exactly one window.
        std::vector<int> cover(static_cast<std::size_t>(ep.length()), 0);
        for (const Window& w : ep.windows) {
            for (Eigen::Index b = w.start; b < w.start + ep.window_length; ++b) ++cover[static_cast<std::size_t>(b)];
        }
        const auto mask = ep.noise_mask();
        for (std::size_t b = 0; b < cover.size(); ++b) CHECK((cover[b] == 0) == mask[b]);
    }
}

TEST_CASE("composed episode targets") {
    Rng rng(3);
    const PatternSet set = three_classes(rng);
    const Episode one = compose_episode(rng, set, 100, {{40, 2}}, 0.01);
    CHECK(one.target_total(set) == 3);
    const Episode two = compose_episode(rng, set, 100, {{5, 0}, {60, 2}}, 0.01);
    CHECK(two.target_total(set) == 4);
    const Episode none = compose_episode(rng, set, 100, {}, 0.01);
    CHECK(none.target_total(set) == 0);
    CHECK(none.noise_bins().size() == 100);
    CHECK_THROWS(compose_episode(rng, set, 100, {{5, 0}, {10, 1}}, 0.01));
    CHECK_THROWS(compose_episode(rng, set, 100, {{95, 0}}, 0.01));
}

TEST_CASE("class-2 placement gives target 2") {
    Rng rng(8);
    PatternSet set;
    set.patterns.push_back({generate_pattern(rng, 10, 5, 0.2), 1});
    set.patterns.push_back({generate_pattern(rng, 10, 5, 0.2), 2});
    const Episode ep = compose_episode(rng, set, 30, {{10, 1}}, 0.0);
    CHECK(ep.target_total(set) == 2);
}

TEST_CASE("impossible placement is a configuration error") {
    Rng rng(1);
    PatternSet set;
    set.patterns.push_back({generate_pattern(rng, 10, 50, 0.1), 1});
    EpisodeConfig cfg;
    cfg.length = 120;
    cfg.max_occurrences = 3;
    CHECK_THROWS_AS(
        [&] {
            for (int k = 0; k < 100; ++k) generate_episode(rng, set, cfg);
        }(),
        ConfigError);
}

TEST_CASE("episodes are deterministic and round-trip through text") {
    Rng a(77), b(77);
    Rng pr(5);
    const PatternSet set = three_classes(pr);
    EpisodeConfig cfg;
    cfg.length = 300;
    const Episode e1 = generate_episode(a, set, cfg);
    const Episode e2 = generate_episode(b, set, cfg);
    CHECK(e1 == e2);
    std::ostringstream os;
    write_episode(os, e1);
    std::istringstream is(os.str());
    const Episode back = read_episode(is);
    CHECK(back.raster == e1.raster);
    CHECK(back.windows == e1.windows);
    std::ostringstream again;
    write_episode(again, back);
    CHECK(again.str() == os.str());
}

TEST_CASE("pattern set validation") {
    Rng rng(1);
    PatternSet set;
    set.patterns.push_back({generate_pattern(rng, 10, 5, 0.2), 1});
    set.patterns.push_back({generate_pattern(rng, 10, 6, 0.2), 2});
    CHECK_THROWS_AS(validate(set), DomainError);
    set.patterns[1].raster = generate_pattern(rng, 10, 5, 0.2);
    set.patterns[1].label = 3;
    CHECK_THROWS_AS(validate(set), DomainError);
    set.patterns[1].label = 2;
    CHECK_NOTHROW(validate(set));
    const PatternSet made = make_pattern_set(rng, 3, 2, 10, 5, 0.1);
    CHECK(made.patterns.size() == 6);
    CHECK(made.n_classes() == 3);
}

}  // TEST_SUITE
