#include "chiralmet/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "chiralmet/metrology.hpp"

namespace chiralmet {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
    throw std::invalid_argument(msg);
}

// Tracks key consumption so leftovers can be reported as unknown keys.
class Block {
  public:
    Block(const json& obj, std::string name)
        : obj_(obj), name_(std::move(name)) {
        if (!obj_.is_object()) fail("block '" + name_ + "' must be an object");
    }

    double number(const char* key) {
        require(key);
        return number_or(key, 0.0);
    }

    double number_or(const char* key, double fallback) {
        if (!obj_.contains(key)) return fallback;
        used_.insert(key);
        const json& v = obj_.at(key);
        if (!v.is_number()) fail(path(key) + " must be a number");
        return v.get<double>();
    }

    std::uint64_t count_or(const char* key, std::uint64_t fallback) {
        if (!obj_.contains(key)) return fallback;
        used_.insert(key);
        const json& v = obj_.at(key);
        if (!v.is_number_unsigned()) {
            if (v.is_number_integer() && v.get<long long>() >= 0)
                return static_cast<std::uint64_t>(v.get<long long>());
            fail(path(key) + " must be a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    std::string text(const char* key) {
        require(key);
        used_.insert(key);
        const json& v = obj_.at(key);
        if (!v.is_string()) fail(path(key) + " must be a string");
        return v.get<std::string>();
    }

    std::string text_or(const char* key, const std::string& fallback) {
        if (!obj_.contains(key)) return fallback;
        return text(key);
    }

    bool has(const char* key) const { return obj_.contains(key); }

    complexd amplitude(const char* key) {
        require(key);
        used_.insert(key);
        const json& v = obj_.at(key);
        if (v.is_number()) return complexd(v.get<double>(), 0.0);
        if (v.is_array() && v.size() == 2 && v[0].is_number() &&
            v[1].is_number())
            return complexd(v[0].get<double>(), v[1].get<double>());
        fail(path(key) + " must be a number or [re, im]");
    }

    int integer(const char* key) {
        require(key);
        used_.insert(key);
        const json& v = obj_.at(key);
        if (!v.is_number_integer()) fail(path(key) + " must be an integer");
        return v.get<int>();
    }

    void finish() const {
        for (const auto& item : obj_.items())
            if (!used_.count(item.key()))
                fail("unknown key '" + item.key() + "' in block '" + name_ +
                     "'");
    }

  private:
    void require(const char* key) {
        if (!obj_.contains(key)) fail(path(key) + " is required");
        used_.insert(key);
    }
    std::string path(const char* key) const { return name_ + "." + key; }

    const json& obj_;
    std::string name_;
    std::set<std::string> used_;
};

template <typename T>
T pick(const std::string& value, const char* what,
       std::initializer_list<std::pair<const char*, T>> options) {
    for (const auto& [name, tag] : options)
        if (value == name) return tag;
    std::string msg = std::string(what) + " must be one of {";
    bool first = true;
    for (const auto& [name, tag] : options) {
        if (!first) msg += ", ";
        msg += name;
        first = false;
    }
    fail(msg + "}, got '" + value + "'");
}

const char* family_name(ProbeFamily f) {
    return f == ProbeFamily::polarization_squeezed ? "polarization_squeezed"
                                                   : "twin_amplitude_squeezed";
}
const char* conc_unit_name(ConcentrationUnit u) {
    return u == ConcentrationUnit::grams_per_cm3 ? "g_per_cm3" : "mol_per_L";
}
const char* path_unit_name(PathLengthUnit u) {
    return u == PathLengthUnit::decimeters ? "dm" : "cm";
}
const char* mode_name(ChannelMode m) {
    return m == ChannelMode::birefringence ? "birefringence" : "dichroism";
}
const char* scheme_name(MeasurementScheme s) {
    return s == MeasurementScheme::balanced_difference ? "balanced"
                                                       : "intensity_ratio";
}
const char* model_name(OutcomeModel m) {
    return m == OutcomeModel::gaussian_bright ? "gaussian_bright"
                                              : "exact_fock";
}

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

bool config_equal(const ScenarioConfig& a, const ScenarioConfig& b) {
    return a.probe.family == b.probe.family && a.probe.alpha == b.probe.alpha &&
           a.probe.s == b.probe.s && a.probe.theta == b.probe.theta &&
           a.sample.concentration == b.sample.concentration &&
           a.sample.concentration_unit == b.sample.concentration_unit &&
           a.sample.path_length == b.sample.path_length &&
           a.sample.path_length_unit == b.sample.path_length_unit &&
           a.sample.rotatory_power == b.sample.rotatory_power &&
           a.sample.eps_L == b.sample.eps_L && a.sample.eps_R == b.sample.eps_R &&
           a.sample.efficiency == b.sample.efficiency && a.mode == b.mode &&
           a.scheme == b.scheme && a.xi == b.xi && a.nu == b.nu &&
           a.seed == b.seed && a.model == b.model && a.sweep == b.sweep;
}

ScenarioConfig parse_scenario(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& err) {
        fail(std::string("config is not valid JSON: ") + err.what());
    }
    if (!root.is_object()) fail("config must be a JSON object");
    for (const auto& item : root.items()) {
        const std::string& key = item.key();
        if (key != "probe" && key != "sample" && key != "channel" &&
            key != "measurement" && key != "sweep")
            fail("unknown block '" + key + "'");
    }
    if (!root.contains("probe")) fail("block 'probe' is required");
    if (!root.contains("sample")) fail("block 'sample' is required");
    if (!root.contains("channel")) fail("block 'channel' is required");

    ScenarioConfig config;

    Block probe(root.at("probe"), "probe");
    config.probe.family = pick<ProbeFamily>(
        probe.text("family"), "probe.family",
        {{"polarization_squeezed", ProbeFamily::polarization_squeezed},
         {"twin_amplitude_squeezed", ProbeFamily::twin_amplitude_squeezed}});
    config.probe.alpha = probe.amplitude("alpha");
    config.probe.s = probe.number("s");
    config.probe.theta = probe.number_or("theta", 0.0);
    probe.finish();
    if (config.probe.s < 0.0) fail("probe.s must be >= 0");

    Block sample(root.at("sample"), "sample");
    config.sample.concentration = sample.number("concentration");
    config.sample.concentration_unit = pick<ConcentrationUnit>(
        sample.text("concentration_unit"), "sample.concentration_unit",
        {{"g_per_cm3", ConcentrationUnit::grams_per_cm3},
         {"mol_per_L", ConcentrationUnit::moles_per_liter}});
    config.sample.path_length = sample.number("path_length");
    config.sample.path_length_unit = pick<PathLengthUnit>(
        sample.text("path_length_unit"), "sample.path_length_unit",
        {{"dm", PathLengthUnit::decimeters},
         {"cm", PathLengthUnit::centimeters}});
    config.sample.rotatory_power = sample.number_or("rotatory_power", 0.0);
    config.sample.eps_L = sample.number_or("eps_L", 0.0);
    config.sample.eps_R = sample.number_or("eps_R", 0.0);
    sample.finish();
    if (config.sample.concentration < 0.0)
        fail("sample.concentration must be >= 0");
    if (config.sample.path_length <= 0.0)
        fail("sample.path_length must be > 0");

    Block channel(root.at("channel"), "channel");
    config.mode = pick<ChannelMode>(
        channel.text("mode"), "channel.mode",
        {{"birefringence", ChannelMode::birefringence},
         {"dichroism", ChannelMode::dichroism}});
    config.sample.efficiency = channel.number_or("eta", 1.0);
    channel.finish();
    if (config.sample.efficiency < 0.0 || config.sample.efficiency > 1.0)
        fail("channel.eta must lie in [0, 1]");

    config.scheme = config.mode == ChannelMode::birefringence
                        ? MeasurementScheme::balanced_difference
                        : MeasurementScheme::intensity_ratio;
    if (root.contains("measurement")) {
        Block meas(root.at("measurement"), "measurement");
        config.scheme = pick<MeasurementScheme>(
            meas.text_or("scheme", scheme_name(config.scheme)),
            "measurement.scheme",
            {{"balanced", MeasurementScheme::balanced_difference},
             {"intensity_ratio", MeasurementScheme::intensity_ratio}});
        if (meas.has("xi")) config.xi = meas.number("xi");
        config.nu = meas.count_or("nu", 1);
        if (meas.has("seed")) config.seed = meas.count_or("seed", 0);
        config.model = pick<OutcomeModel>(
            meas.text_or("model", "gaussian_bright"), "measurement.model",
            {{"gaussian_bright", OutcomeModel::gaussian_bright},
             {"exact_fock", OutcomeModel::exact_fock}});
        meas.finish();
    }
    if (config.nu < 1) fail("measurement.nu must be >= 1");

    if (root.contains("sweep")) {
        Block sweep(root.at("sweep"), "sweep");
        SweepSpec spec;
        spec.parameter = sweep.text("parameter");
        spec.start = sweep.number("start");
        spec.stop = sweep.number("stop");
        spec.steps = sweep.integer("steps");
        sweep.finish();
        if (spec.steps < 1) fail("sweep.steps must be >= 1");
        const auto& names = sweep_parameters();
        if (std::find(names.begin(), names.end(), spec.parameter) ==
            names.end())
            fail("sweep.parameter '" + spec.parameter +
                 "' does not name a sweepable numeric field");
        config.sweep = spec;
    }
    return config;
}

std::string serialize_scenario(const ScenarioConfig& config) {
    json root;
    root["probe"] = {{"family", family_name(config.probe.family)},
                     {"alpha", {config.probe.alpha.real(),
                                config.probe.alpha.imag()}},
                     {"s", config.probe.s},
                     {"theta", config.probe.theta}};
    root["sample"] = {
        {"concentration", config.sample.concentration},
        {"concentration_unit", conc_unit_name(config.sample.concentration_unit)},
        {"path_length", config.sample.path_length},
        {"path_length_unit", path_unit_name(config.sample.path_length_unit)},
        {"rotatory_power", config.sample.rotatory_power},
        {"eps_L", config.sample.eps_L},
        {"eps_R", config.sample.eps_R}};
    root["channel"] = {{"mode", mode_name(config.mode)},
                       {"eta", config.sample.efficiency}};
    json meas = {{"scheme", scheme_name(config.scheme)},
                 {"nu", config.nu},
                 {"model", model_name(config.model)}};
    if (config.xi) meas["xi"] = *config.xi;
    if (config.seed) meas["seed"] = *config.seed;
    root["measurement"] = meas;
    if (config.sweep)
        root["sweep"] = {{"parameter", config.sweep->parameter},
                         {"start", config.sweep->start},
                         {"stop", config.sweep->stop},
                         {"steps", config.sweep->steps}};
    return root.dump(2) + "\n";
}

ScenarioConfig load_scenario(const std::string& path) {
    return parse_scenario(read_text_file(path));
}

const std::vector<std::string>& sweep_parameters() {
    static const std::vector<std::string> names = {
        "probe.alpha",          "probe.s",
        "probe.theta",          "sample.concentration",
        "sample.path_length",   "sample.rotatory_power",
        "sample.eps_L",         "sample.eps_R",
        "channel.eta",          "measurement.xi"};
    return names;
}

void apply_parameter(ScenarioConfig& config, const std::string& name,
                     double value) {
    if (name == "probe.alpha")
        config.probe.alpha = complexd(value, 0.0);
    else if (name == "probe.s")
        config.probe.s = value;
    else if (name == "probe.theta")
        config.probe.theta = value;
    else if (name == "sample.concentration")
        config.sample.concentration = value;
    else if (name == "sample.path_length")
        config.sample.path_length = value;
    else if (name == "sample.rotatory_power")
        config.sample.rotatory_power = value;
    else if (name == "sample.eps_L")
        config.sample.eps_L = value;
    else if (name == "sample.eps_R")
        config.sample.eps_R = value;
    else if (name == "channel.eta")
        config.sample.efficiency = value;
    else if (name == "measurement.xi")
        config.xi = value;
    else
        fail("unknown sweep parameter '" + name + "'");
}

std::vector<double> sweep_values(const SweepSpec& sweep) {
    if (sweep.steps < 1) fail("sweep.steps must be >= 1");
    std::vector<double> values(static_cast<std::size_t>(sweep.steps));
    if (sweep.steps == 1) {
        values[0] = sweep.start;
        return values;
    }
    const double step = (sweep.stop - sweep.start) / (sweep.steps - 1);
    for (int i = 0; i < sweep.steps; ++i) values[i] = sweep.start + i * step;
    return values;
}

ExperimentPlan plan_from_config(const ScenarioConfig& config) {
    if (config.mode == ChannelMode::birefringence &&
        config.scheme != MeasurementScheme::balanced_difference)
        fail("birefringence mode pairs with the balanced scheme");
    if (config.mode == ChannelMode::dichroism &&
        config.scheme != MeasurementScheme::intensity_ratio)
        fail("dichroism mode pairs with the intensity_ratio scheme");
    if (config.scheme == MeasurementScheme::balanced_difference &&
        config.probe.family != ProbeFamily::polarization_squeezed)
        fail("probe.family must be polarization_squeezed for the balanced "
             "scheme");
    if (config.scheme == MeasurementScheme::intensity_ratio &&
        config.probe.family != ProbeFamily::twin_amplitude_squeezed)
        fail("probe.family must be twin_amplitude_squeezed for the "
             "intensity_ratio scheme");

    ExperimentPlan plan;
    plan.probe = config.probe;
    plan.sample = config.sample;
    plan.scheme = config.scheme;
    plan.trials = config.nu;
    plan.seed = config.seed;
    plan.model = config.model;
    if (config.scheme == MeasurementScheme::balanced_difference)
        plan.xi = config.xi ? *config.xi
                            : optimal_waveplate_angle(
                                  phases_from_sample(config.sample)
                                      .delta_phi());
    return plan;
}

void ResultTable::add_row(std::vector<double> row) {
    if (row.size() != columns.size())
        throw std::invalid_argument("row width does not match column count");
    rows.push_back(std::move(row));
}

std::string ResultTable::to_csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i) out += ',';
        out += columns[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

std::string ResultTable::to_json() const {
    json root;
    root["columns"] = columns;
    root["rows"] = rows;
    return root.dump(2) + "\n";
}

ResultTable table_from_csv(const std::string& text) {
    ResultTable table;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("csv is missing the header row");
    std::istringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) table.columns.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::size_t begin = 0;
        while (begin <= line.size()) {
            std::size_t end = line.find(',', begin);
            if (end == std::string::npos) end = line.size();
            double v = 0.0;
            const auto res =
                std::from_chars(line.data() + begin, line.data() + end, v);
            if (res.ec != std::errc() || res.ptr != line.data() + end)
                throw std::invalid_argument("csv cell is not a number: " +
                                            line.substr(begin, end - begin));
            row.push_back(v);
            begin = end + 1;
        }
        table.add_row(std::move(row));
    }
    return table;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace chiralmet
