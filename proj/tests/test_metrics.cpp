#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "jcas/metrics.hpp"

using namespace jcas;

TEST_CASE("episodic_gain: constant, mean, permutation invariance, empty rejected") {
    CHECK(metrics::episodic_gain(std::vector<double>{3.5, 3.5, 3.5}) == doctest::Approx(3.5));
    CHECK(metrics::episodic_gain(std::vector<double>{1.0, 2.0, 3.0}) == doctest::Approx(2.0));
    CHECK(metrics::episodic_gain(std::vector<double>{3.0, 1.0, 2.0}) == doctest::Approx(2.0));
    CHECK_THROWS_AS((void)metrics::episodic_gain(std::vector<double>{}),
                    std::invalid_argument);
}

TEST_CASE("episodic_gain: linear in a gain scale factor") {
    std::vector<double> trace{0.5, 1.5, 2.5, 4.0};
    const double base = metrics::episodic_gain(trace);
    for (double& g : trace) g *= 7.0;
    CHECK(metrics::episodic_gain(trace) == doctest::Approx(7.0 * base));
}

TEST_CASE("tpr: full, half, and redundant-only masks") {
    const std::vector<uint8_t> relevant{1, 1, 1, 1, 0, 0, 0, 0};
    CHECK(metrics::tpr(relevant, relevant) == doctest::Approx(100.0));
    CHECK(metrics::tpr(std::vector<uint8_t>{1, 1, 0, 0, 0, 0, 0, 0}, relevant) ==
          doctest::Approx(50.0));
    CHECK(metrics::tpr(std::vector<uint8_t>{0, 0, 0, 0, 1, 1, 1, 1}, relevant) ==
          doctest::Approx(0.0));
    CHECK_THROWS_AS((void)metrics::tpr(relevant, std::vector<uint8_t>(8, 0)),
                    std::invalid_argument);
}

TEST_CASE("tpr stays within [0,100]; the literal ratio can exceed 100") {
    const std::vector<uint8_t> relevant{1, 1, 0, 0, 0, 0};
    const std::vector<uint8_t> greedy{1, 1, 1, 1, 1, 1};
    CHECK(metrics::tpr(greedy, relevant) == doctest::Approx(100.0));
    CHECK(metrics::tpr_literal(greedy, relevant) == doctest::Approx(300.0));
}

TEST_CASE("episode csv: round-trip preserves values and absent fields") {
    std::vector<metrics::EpisodeRecord> records;
    metrics::EpisodeRecord a;
    a.episode = 0;
    a.avg_gain = 1.2345678901234567;
    a.final_beta = 2.5;
    a.tpr = 87.5;
    a.tpr_literal = 112.5;
    a.selected_count = 9.25;
    records.push_back(a);
    metrics::EpisodeRecord b;
    b.episode = 1;
    b.avg_gain = 0.5;
    b.final_beta = 0.75;  // baseline: selector columns absent
    records.push_back(b);

    const auto path = std::filesystem::temp_directory_path() / "jcas_episodes.csv";
    metrics::write_episode_csv(records, path);
    const auto loaded = metrics::read_episode_csv(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].avg_gain == a.avg_gain);
    CHECK(loaded[0].tpr.value() == 87.5);
    CHECK(loaded[0].selected_count.value() == 9.25);
    CHECK_FALSE(loaded[1].tpr.has_value());
    CHECK_FALSE(loaded[1].selected_count.has_value());
    CHECK(loaded[1].final_beta == 0.75);
    std::filesystem::remove(path);
}

TEST_CASE("compare_runs: one run echoes its curve; identical runs give zero IQR") {
    metrics::RunSeries run{"td3", {1.0, 2.0, 3.0}};
    const auto solo = metrics::compare_runs({run}, 2.0);
    REQUIRE(solo.agents.size() == 1);
    CHECK(solo.agents[0].median_gain == run.episodic_gains);
    CHECK(solo.agents[0].median_auc == doctest::Approx(6.0));
    CHECK(solo.agents[0].episodes_to_threshold[0] == 1);

    const auto twins = metrics::compare_runs({run, run, run}, 10.0);
    for (double iqr : twins.agents[0].iqr_gain) CHECK(iqr == doctest::Approx(0.0));
    CHECK(twins.agents[0].episodes_to_threshold[0] == -1);
}

TEST_CASE("compare_runs: pointwise dominance implies AUC dominance") {
    metrics::RunSeries lo{"a", {1.0, 1.5, 2.0}};
    metrics::RunSeries hi{"b", {1.5, 2.0, 2.5}};
    const auto summary = metrics::compare_runs({lo, hi}, 100.0);
    double auc_a = 0.0, auc_b = 0.0;
    for (const auto& agent : summary.agents) {
        if (agent.label == "a") auc_a = agent.median_auc;
        if (agent.label == "b") auc_b = agent.median_auc;
    }
    CHECK(auc_b >= auc_a);
}

TEST_CASE("compare_runs: rejects inconsistent episode counts and empty input") {
    metrics::RunSeries a{"x", {1.0, 2.0}};
    metrics::RunSeries b{"x", {1.0}};
    CHECK_THROWS_AS((void)metrics::compare_runs({a, b}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)metrics::compare_runs({}, 0.0), std::invalid_argument);
}

TEST_CASE("beam pattern csv: header plus one row per grid point") {
    const auto path = std::filesystem::temp_directory_path() / "jcas_pattern.csv";
    metrics::write_beam_pattern_csv({{-1.0, 0.25}, {0.0, 1.0}}, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "angle_rad,normalized_gain");
    std::getline(in, line);
    CHECK(line == "-1,0.25");
    std::filesystem::remove(path);
}
