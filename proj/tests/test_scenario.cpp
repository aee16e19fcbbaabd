#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "chiralmet/metrology.hpp"
#include "chiralmet/scenario.hpp"

using namespace chiralmet;

namespace {

const char* kMinimal = R"({
  "probe": {"family": "polarization_squeezed", "alpha": 100.0, "s": 0.5},
  "sample": {"concentration": 0.01, "concentration_unit": "g_per_cm3",
             "path_length": 1.0, "path_length_unit": "cm",
             "rotatory_power": 1.16},
  "channel": {"mode": "birefringence"}
})";

const char* kFull = R"({
  "probe": {"family": "twin_amplitude_squeezed", "alpha": [30.0, -4.5],
            "s": 0.3, "theta": 0.7},
  "sample": {"concentration": 0.002, "concentration_unit": "mol_per_L",
             "path_length": 5.0, "path_length_unit": "cm",
             "eps_L": 110.0, "eps_R": 90.0},
  "channel": {"mode": "dichroism", "eta": 0.85},
  "measurement": {"scheme": "intensity_ratio", "nu": 20000, "seed": 7,
                  "model": "exact_fock"},
  "sweep": {"parameter": "channel.eta", "start": 0.5, "stop": 1.0,
            "steps": 6}
})";

std::string replaced(std::string text, const std::string& from,
                     const std::string& to) {
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
    const ScenarioConfig c = parse_scenario(kMinimal);
    CHECK(c.probe.family == ProbeFamily::polarization_squeezed);
    CHECK(c.probe.alpha == complexd(100.0, 0.0));
    CHECK(c.probe.theta == 0.0);
    CHECK(c.sample.efficiency == 1.0);
    CHECK(c.mode == ChannelMode::birefringence);
    CHECK(c.scheme == MeasurementScheme::balanced_difference);
    CHECK(!c.xi.has_value());
    CHECK(c.nu == 1);
    CHECK(!c.seed.has_value());
    CHECK(c.model == OutcomeModel::gaussian_bright);
    CHECK(!c.sweep.has_value());

    const ScenarioConfig d = parse_scenario(kFull);
    CHECK(d.probe.alpha == complexd(30.0, -4.5));
    CHECK(d.scheme == MeasurementScheme::intensity_ratio);
    CHECK(d.nu == 20000);
    CHECK(d.seed.has_value());
    CHECK(*d.seed == 7);
    CHECK(d.model == OutcomeModel::exact_fock);
    REQUIRE(d.sweep.has_value());
    CHECK(d.sweep->parameter == "channel.eta");
    CHECK(d.sweep->steps == 6);
}

TEST_CASE("serialize and reparse preserve every field") {
    for (const char* text : {kMinimal, kFull}) {
        const ScenarioConfig a = parse_scenario(text);
        const std::string s1 = serialize_scenario(a);
        const ScenarioConfig b = parse_scenario(s1);
        CHECK(config_equal(a, b));
        CHECK(serialize_scenario(b) == s1);
    }

    ScenarioConfig c = parse_scenario(kMinimal);
    c.probe.alpha = complexd(std::numbers::pi, -1.0 / 3.0);
    c.sample.concentration = 0.1;  // not exactly representable
    c.xi = -0.123456789012345678;
    c.seed = 0xffffffffffffull;
    const ScenarioConfig d = parse_scenario(serialize_scenario(c));
    CHECK(config_equal(c, d));
    CHECK(d.probe.alpha.real() == std::numbers::pi);
    CHECK(d.sample.concentration == 0.1);
}

TEST_CASE("unknown keys and blocks are rejected") {
    CHECK_THROWS_WITH_AS(
        parse_scenario(replaced(kMinimal, "\"s\": 0.5", "\"s\": 0.5, \"sq\": 1")),
        "unknown key 'sq' in block 'probe'", std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        parse_scenario(replaced(kMinimal, "\"channel\"", "\"det\"")),
        "unknown block 'det'", std::invalid_argument);
    CHECK_THROWS_AS(parse_scenario("[1, 2]"), std::invalid_argument);
    CHECK_THROWS_AS(parse_scenario("{not json"), std::invalid_argument);
}

TEST_CASE("required keys and unit tags are enforced") {
    CHECK_THROWS_WITH_AS(
        parse_scenario(replaced(
            kMinimal, "\"concentration_unit\": \"g_per_cm3\",", "")),
        "sample.concentration_unit is required", std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        parse_scenario(replaced(
            kMinimal, "\"path_length_unit\": \"cm\",", "")),
        "sample.path_length_unit is required", std::invalid_argument);
    CHECK_THROWS_AS(
        parse_scenario(replaced(kMinimal, "\"alpha\": 100.0, ", "")),
        std::invalid_argument);
    CHECK_THROWS_AS(
        parse_scenario(replaced(kMinimal,
                                "\"sample\"", "\"samples\"")),
        std::invalid_argument);
}

TEST_CASE("bad enum strings list the options") {
    CHECK_THROWS_WITH_AS(
        parse_scenario(replaced(kMinimal, "birefringence", "rotation")),
        "channel.mode must be one of {birefringence, dichroism}, got "
        "'rotation'",
        std::invalid_argument);
    CHECK_THROWS_AS(
        parse_scenario(replaced(kMinimal, "polarization_squeezed", "pol")),
        std::invalid_argument);
    CHECK_THROWS_AS(
        parse_scenario(replaced(kFull, "exact_fock", "fock")),
        std::invalid_argument);
    CHECK_THROWS_AS(
        parse_scenario(replaced(kFull, "mol_per_L", "mg_per_m3")),
        std::invalid_argument);
}

TEST_CASE("range validation") {
    CHECK_THROWS_AS(parse_scenario(replaced(kMinimal, "\"s\": 0.5",
                                            "\"s\": -0.1")),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        parse_scenario(replaced(kMinimal, "\"mode\": \"birefringence\"",
                                "\"mode\": \"birefringence\", \"eta\": 1.2")),
        std::invalid_argument);
    CHECK_THROWS_AS(
        parse_scenario(replaced(kMinimal, "\"path_length\": 1.0",
                                "\"path_length\": 0.0")),
        std::invalid_argument);
    CHECK_THROWS_AS(parse_scenario(replaced(kFull, "\"nu\": 20000",
                                            "\"nu\": 0")),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_scenario(replaced(kFull, "\"steps\": 6",
                                            "\"steps\": 0")),
                    std::invalid_argument);
    CHECK_THROWS_WITH_AS(
        parse_scenario(replaced(kFull, "channel.eta", "channel.gain")),
        "sweep.parameter 'channel.gain' does not name a sweepable numeric "
        "field",
        std::invalid_argument);
}

TEST_CASE("sweep values and parameter application") {
    SweepSpec spec{"probe.s", 0.0, 1.0, 5};
    const auto values = sweep_values(spec);
    REQUIRE(values.size() == 5);
    CHECK(values.front() == 0.0);
    CHECK(values.back() == 1.0);
    CHECK(values[2] == doctest::Approx(0.5).epsilon(1e-15));

    SweepSpec single{"probe.s", 0.7, 9.9, 1};
    const auto one = sweep_values(single);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == 0.7);

    ScenarioConfig c = parse_scenario(kMinimal);
    for (const auto& name : sweep_parameters()) {
        ScenarioConfig probe = c;
        apply_parameter(probe, name, 0.25);
    }
    ScenarioConfig d = c;
    apply_parameter(d, "channel.eta", 0.6);
    CHECK(d.sample.efficiency == 0.6);
    apply_parameter(d, "probe.alpha", 40.0);
    CHECK(d.probe.alpha == complexd(40.0, 0.0));
    apply_parameter(d, "measurement.xi", 0.2);
    REQUIRE(d.xi.has_value());
    CHECK(*d.xi == 0.2);
    CHECK_THROWS_AS(apply_parameter(d, "probe.cutoff", 1.0),
                    std::invalid_argument);
}

TEST_CASE("plan from config resolves the analyzer angle") {
    ScenarioConfig c = parse_scenario(kMinimal);
    c.nu = 5000;
    c.seed = 3;
    const ExperimentPlan plan = plan_from_config(c);
    CHECK(plan.scheme == MeasurementScheme::balanced_difference);
    CHECK(plan.trials == 5000);
    const double dphi = phases_from_sample(c.sample).delta_phi();
    CHECK(plan.xi == doctest::Approx(optimal_waveplate_angle(dphi))
                         .epsilon(1e-15));

    c.xi = 0.11;
    CHECK(plan_from_config(c).xi == 0.11);

    ScenarioConfig mismatch = c;
    mismatch.scheme = MeasurementScheme::intensity_ratio;
    CHECK_THROWS_AS(plan_from_config(mismatch), std::invalid_argument);

    ScenarioConfig wrong_family = c;
    wrong_family.probe.family = ProbeFamily::twin_amplitude_squeezed;
    CHECK_THROWS_AS(plan_from_config(wrong_family), std::invalid_argument);

    const ScenarioConfig ratio = parse_scenario(kFull);
    const ExperimentPlan rplan = plan_from_config(ratio);
    CHECK(rplan.scheme == MeasurementScheme::intensity_ratio);
    CHECK(rplan.model == OutcomeModel::exact_fock);
    REQUIRE(rplan.seed.has_value());
    CHECK(*rplan.seed == 7);
}

TEST_CASE("result table round-trips exactly through csv") {
    ResultTable table;
    table.columns = {"a", "b", "c"};
    table.add_row({std::numbers::pi, -1.0 / 3.0, 0.0});
    table.add_row({1e-317, -2.5e300, 6.02214076e23});
    table.add_row({1.0, 2.0, std::nextafter(1.0, 2.0)});

    const std::string csv = table.to_csv();
    const ResultTable back = table_from_csv(csv);
    REQUIRE(back.columns == table.columns);
    REQUIRE(back.rows.size() == table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i)
        for (std::size_t j = 0; j < table.columns.size(); ++j)
            CHECK(back.rows[i][j] == table.rows[i][j]);
    CHECK(table.to_csv() == csv);

    const std::string json_text = table.to_json();
    CHECK(json_text.find("\"columns\"") != std::string::npos);
    CHECK(json_text.find("\"rows\"") != std::string::npos);

    CHECK_THROWS_AS(table.add_row({1.0}), std::invalid_argument);
    CHECK_THROWS_AS(table_from_csv("a,b\n1.0,nope\n"), std::invalid_argument);
    CHECK_THROWS_AS(table_from_csv(""), std::invalid_argument);
}

TEST_CASE("config files round-trip on disk") {
    const ScenarioConfig a = parse_scenario(kFull);
    const std::string path = "scenario_roundtrip.json";
    write_text_file(path, serialize_scenario(a));
    const ScenarioConfig b = load_scenario(path);
    CHECK(config_equal(a, b));
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_text_file("no/such/file.json"), std::runtime_error);
}
