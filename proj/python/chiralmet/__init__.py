from ._core import (
    ChiralSample,
    ConcentrationUnit,
    MeasurementStats,
    PathLengthUnit,
    ProbeFamily,
    ProbeSpec,
    QfiReport,
    ResultTable,
    ScenarioConfig,
    SucroseReport,
    ValidationReport,
    balanced_detection_stats,
    dichroism_concentration_variance,
    dichroism_improvement_ratio,
    dilute_precision_enhancement,
    load_scenario,
    optimal_waveplate_angle,
    oracle_qfi_birefringence,
    oracle_qfi_dichroism,
    parse_scenario,
    qfi_birefringence,
    qfi_dichroism,
    run_dichroism,
    run_fig2,
    run_qfi,
    run_simulate,
    run_sucrose,
    run_validate,
    serialize_scenario,
)

__all__ = [
    "ChiralSample",
    "ConcentrationUnit",
    "MeasurementStats",
    "PathLengthUnit",
    "ProbeFamily",
    "ProbeSpec",
    "QfiReport",
    "ResultTable",
    "ScenarioConfig",
    "SucroseReport",
    "ValidationReport",
    "balanced_detection_stats",
    "dichroism_concentration_variance",
    "dichroism_improvement_ratio",
    "dilute_precision_enhancement",
    "load_scenario",
    "optimal_waveplate_angle",
    "oracle_qfi_birefringence",
    "oracle_qfi_dichroism",
    "parse_scenario",
    "qfi_birefringence",
    "qfi_dichroism",
    "run_dichroism",
    "run_fig2",
    "run_qfi",
    "run_simulate",
    "run_sucrose",
    "run_validate",
    "serialize_scenario",
]
