#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chiralmet/fock.hpp"
#include "chiralmet/runners.hpp"

namespace py = pybind11;
using namespace chiralmet;

PYBIND11_MODULE(_core, m) {
    m.doc() = "precision limits for estimating the concentration of a "
              "chiral solution with bright Gaussian probes";

    py::enum_<ProbeFamily>(m, "ProbeFamily")
        .value("polarization_squeezed", ProbeFamily::polarization_squeezed)
        .value("twin_amplitude_squeezed",
               ProbeFamily::twin_amplitude_squeezed);
    py::enum_<ConcentrationUnit>(m, "ConcentrationUnit")
        .value("grams_per_cm3", ConcentrationUnit::grams_per_cm3)
        .value("moles_per_liter", ConcentrationUnit::moles_per_liter);
    py::enum_<PathLengthUnit>(m, "PathLengthUnit")
        .value("decimeters", PathLengthUnit::decimeters)
        .value("centimeters", PathLengthUnit::centimeters);

    py::class_<ProbeSpec>(m, "ProbeSpec")
        .def(py::init([](ProbeFamily family, complexd alpha, double s,
                         double theta) {
                 return ProbeSpec{family, alpha, s, theta};
             }),
             py::arg("family"), py::arg("alpha"), py::arg("s") = 0.0,
             py::arg("theta") = 0.0)
        .def_readwrite("family", &ProbeSpec::family)
        .def_readwrite("alpha", &ProbeSpec::alpha)
        .def_readwrite("s", &ProbeSpec::s)
        .def_readwrite("theta", &ProbeSpec::theta);

    py::class_<ChiralSample>(m, "ChiralSample")
        .def(py::init<>())
        .def_readwrite("concentration", &ChiralSample::concentration)
        .def_readwrite("concentration_unit", &ChiralSample::concentration_unit)
        .def_readwrite("path_length", &ChiralSample::path_length)
        .def_readwrite("path_length_unit", &ChiralSample::path_length_unit)
        .def_readwrite("rotatory_power", &ChiralSample::rotatory_power)
        .def_readwrite("eps_L", &ChiralSample::eps_L)
        .def_readwrite("eps_R", &ChiralSample::eps_R)
        .def_readwrite("efficiency", &ChiralSample::efficiency);

    py::class_<QfiReport>(m, "QfiReport")
        .def_readonly("qfi_numerical", &QfiReport::qfi_numerical)
        .def_readonly("qfi_closed_form", &QfiReport::qfi_closed_form)
        .def_readonly("vacuum_term", &QfiReport::vacuum_term)
        .def_readonly("bright_term", &QfiReport::bright_term)
        .def_readonly("sql", &QfiReport::sql)
        .def_readonly("advantage_qfi", &QfiReport::advantage_qfi)
        .def_readonly("advantage_precision", &QfiReport::advantage_precision)
        .def_readonly("qcrb_variance", &QfiReport::qcrb_variance)
        .def_readonly("trials", &QfiReport::trials);

    py::class_<MeasurementStats>(m, "MeasurementStats")
        .def_readonly("mean", &MeasurementStats::mean)
        .def_readonly("variance", &MeasurementStats::variance)
        .def_readonly("dmean_dC", &MeasurementStats::dmean_dC)
        .def_readonly("cfi_gaussian", &MeasurementStats::cfi_gaussian)
        .def_readonly("propagated_variance",
                      &MeasurementStats::propagated_variance)
        .def_readonly("insensitive", &MeasurementStats::insensitive);

    py::class_<ResultTable>(m, "ResultTable")
        .def_readonly("columns", &ResultTable::columns)
        .def_readonly("rows", &ResultTable::rows)
        .def("to_csv", &ResultTable::to_csv)
        .def("to_json", &ResultTable::to_json);

    py::class_<SucroseReport>(m, "SucroseReport")
        .def_readonly("coherent_dc_over_c", &SucroseReport::coherent_dc_over_c)
        .def_readonly("squeezed_dc_over_c", &SucroseReport::squeezed_dc_over_c)
        .def_readonly("precision_ratio", &SucroseReport::precision_ratio)
        .def_readonly("coherent_deviation_factor",
                      &SucroseReport::coherent_deviation_factor)
        .def("to_text", &SucroseReport::to_text)
        .def("to_table", &SucroseReport::to_table);

    py::class_<ValidationReport>(m, "ValidationReport")
        .def("passed", &ValidationReport::passed)
        .def("to_text", &ValidationReport::to_text);

    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def_readwrite("probe", &ScenarioConfig::probe)
        .def_readwrite("sample", &ScenarioConfig::sample)
        .def_readwrite("nu", &ScenarioConfig::nu);

    m.def("parse_scenario", &parse_scenario, py::arg("text"));
    m.def("serialize_scenario", &serialize_scenario, py::arg("config"));
    m.def("load_scenario", &load_scenario, py::arg("path"));

    m.def("qfi_birefringence", &qfi_closed_form_birefringence,
          py::arg("probe"), py::arg("sample"), py::arg("common_phase") = 0.0,
          py::arg("trials") = 1.0);
    m.def("qfi_dichroism", &qfi_report_dichroism, py::arg("probe"),
          py::arg("sample"), py::arg("trials") = 1.0);
    m.def("dilute_precision_enhancement", &dilute_precision_enhancement,
          py::arg("s"), py::arg("eta"));
    m.def("dichroism_improvement_ratio", &dichroism_improvement_ratio,
          py::arg("T"), py::arg("s"), py::arg("eta"));
    m.def("optimal_waveplate_angle", &optimal_waveplate_angle,
          py::arg("delta_phi"));
    m.def("balanced_detection_stats", &balanced_detection_stats,
          py::arg("probe"), py::arg("sample"), py::arg("xi"),
          py::arg("common_phase") = 0.0);
    m.def("dichroism_concentration_variance",
          &dichroism_concentration_variance, py::arg("probe"),
          py::arg("sample"));

    m.def(
        "oracle_qfi_birefringence",
        [](const ProbeSpec& probe, const ChiralSample& sample,
           double common_phase, int cutoff) {
            return oracle_qfi_birefringence(probe, sample, common_phase,
                                            cutoff)
                .qfi;
        },
        py::arg("probe"), py::arg("sample"), py::arg("common_phase") = 0.0,
        py::arg("cutoff") = 0);
    m.def(
        "oracle_qfi_dichroism",
        [](const ProbeSpec& probe, const ChiralSample& sample, int cutoff) {
            return oracle_qfi_dichroism(probe, sample, cutoff).qfi;
        },
        py::arg("probe"), py::arg("sample"), py::arg("cutoff") = 0);

    m.def("run_qfi", &run_qfi, py::arg("config"));
    m.def("run_fig2", &run_fig2);
    m.def("run_sucrose", &run_sucrose, py::arg("s") = 1.0,
          py::arg("eta") = 1.0, py::arg("alpha_sq") = 1e9);
    m.def("run_dichroism", &run_dichroism, py::arg("config"));
    m.def("run_simulate", &run_simulate, py::arg("config"));
    m.def("run_validate", &run_validate,
          py::call_guard<py::gil_scoped_release>());
}
