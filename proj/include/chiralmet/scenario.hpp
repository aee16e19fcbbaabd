#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chiralmet/montecarlo.hpp"

// Scenario configuration (named-block JSON with explicit unit tags) and the
// numeric result table the runners emit. Unknown keys are rejected rather
// than ignored; doubles round-trip exactly through both output formats.

namespace chiralmet {

enum class ChannelMode { birefringence, dichroism };

struct SweepSpec {
    std::string parameter;
    double start = 0.0;
    double stop = 0.0;
    int steps = 1;

    friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct ScenarioConfig {
    ProbeSpec probe;
    ChiralSample sample;  // efficiency holds the channel block's eta
    ChannelMode mode = ChannelMode::birefringence;
    MeasurementScheme scheme = MeasurementScheme::balanced_difference;
    std::optional<double> xi;  // absent = optimal waveplate angle
    std::uint64_t nu = 1;
    std::optional<std::uint64_t> seed;
    OutcomeModel model = OutcomeModel::gaussian_bright;
    std::optional<SweepSpec> sweep;
};

bool config_equal(const ScenarioConfig& a, const ScenarioConfig& b);

// Parses the named-block JSON text. Throws std::invalid_argument naming the
// offending block and key on unknown keys, missing required keys (unit tags
// for concentration and path length are mandatory), bad enum strings, or a
// sweep parameter that does not name a sweepable numeric field.
ScenarioConfig parse_scenario(const std::string& text);
std::string serialize_scenario(const ScenarioConfig& config);
ScenarioConfig load_scenario(const std::string& path);

// Names accepted by sweep.parameter, dotted block.key form.
const std::vector<std::string>& sweep_parameters();
void apply_parameter(ScenarioConfig& config, const std::string& name,
                     double value);
// The concrete sweep values (steps = 1 emits start only).
std::vector<double> sweep_values(const SweepSpec& sweep);

// Measurement plan at the config's operating point; resolves the default
// analyzer angle and checks scheme/channel compatibility.
ExperimentPlan plan_from_config(const ScenarioConfig& config);

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::vector<double> row);
    std::string to_csv() const;   // header, comma-separated, LF
    std::string to_json() const;  // {"columns": [...], "rows": [[...]]}
};

// Inverse of to_csv, with exact double round-trip.
ResultTable table_from_csv(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace chiralmet
