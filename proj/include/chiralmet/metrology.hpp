#pragma once

#include <functional>
#include <utility>

#include "chiralmet/channels.hpp"
#include "chiralmet/gaussian.hpp"

// Quantum and classical Fisher information for the two probing schemes.
//
// The concentration always enters through a channel family C -> state(C);
// a ParamDerivative carries (d d/dC, d Sigma/dC) alongside the state at the
// working point. The general QFI engine implements the two-mode Gaussian
// formula of Safranek (symplectic invariants of k*Sigma and the squared
// derivatives of its symplectic eigenvalues, plus the displacement term
// 2 ddot^dag Sigma^-1 ddot), with a dedicated pure-state path and a clamped
// evaluation for states within roundoff of purity.

namespace chiralmet {

enum class DerivMethod { analytic, central_difference };

struct ParamDerivative {
    Vec4 d_dot = Vec4::Zero();
    Mat4 sigma_dot = Mat4::Zero();
    DerivMethod method = DerivMethod::analytic;
    double step = 0.0;  // finite-difference step actually used (0 = analytic)
};

// ---------------------------------------------------------------------------
// Channel families parameterized by concentration.

// Probe through the rotation channel followed by uniform loss at the sample's
// efficiency, evaluated at the sample's concentration.
GaussianState birefringence_output(const GaussianState& probe,
                                   const ChiralSample& sample,
                                   double common_phase = 0.0);

// Probe through the two-arm attenuation channel followed by uniform loss.
GaussianState dichroism_output(const GaussianState& probe,
                               const ChiralSample& sample);

// Closed-form d/dC of the birefringence family above.
ParamDerivative analytic_derivatives_birefringence(const ProbeSpec& probe,
                                                   const ChiralSample& sample,
                                                   double common_phase = 0.0);

// Closed-form d/dC of the dichroism family above.
ParamDerivative analytic_derivatives_dichroism(const ProbeSpec& probe,
                                               const ChiralSample& sample);

// Five-point central difference with Richardson extrapolation,
// step = step_scale * max(|concentration|, 1).
ParamDerivative numerical_derivative(
    const std::function<GaussianState(double)>& family, double concentration,
    double step_scale = 1e-5);

// ---------------------------------------------------------------------------
// Quantum Fisher information.

// General entry point: dispatches between the mixed-state formula, the
// pure-state formula, and the clamped evaluation near purity.
double qfi_two_mode_gaussian(const GaussianState& state,
                             const ParamDerivative& deriv);

// The individual paths, exposed so tests can check their mutual agreement.
double qfi_pure(const GaussianState& state, const ParamDerivative& deriv);
double qfi_mixed(const GaussianState& state, const ParamDerivative& deriv);
// Evaluates the mixed formula with every symplectic eigenvalue lifted to at
// least 1 + epsilon (covariance and its derivative scaled accordingly).
double qfi_clamped(const GaussianState& state, const ParamDerivative& deriv,
                   double epsilon = 1e-7);

struct QfiReport {
    double qfi_numerical = 0.0;   // general-formula value, units 1/C^2
    double qfi_closed_form = 0.0; // vacuum_term + bright_term
    double vacuum_term = 0.0;
    double bright_term = 0.0;
    double sql = 0.0;             // coherent-probe benchmark at equal power
    double advantage_qfi = 0.0;   // qfi_closed_form / sql for the rotation
                                  // channel, qfi_numerical / sql otherwise
    double advantage_precision = 0.0;  // sqrt(advantage_qfi)
    double qcrb_variance = 0.0;        // 1 / (trials * qfi_numerical)
    double trials = 1.0;
};

// Report for the rotation channel. The closed-form decomposition follows the
// published expressions: bright term
//   eta |alpha|^2 l^2 dg^2 (D + eta |sin dphi| sinh 2s) / (D^2 - eta^2 sinh^2 2s),
// D = 1 - eta + eta cosh 2s (reducing at eta = 1 to the printed
// cosh 2s + |sin dphi| sinh 2s form), and vacuum term
//   4 eta^2 l^2 dg^2 sinh^2 2s / (1 - eta + eta^2 + (1 - eta) eta cosh 2s).
// qfi_numerical is always the general-formula value; the two can disagree
// (see the validate runner, which arbitrates against the number-state oracle).
QfiReport qfi_closed_form_birefringence(const ProbeSpec& probe,
                                        const ChiralSample& sample,
                                        double common_phase = 0.0,
                                        double trials = 1.0);

// Report for the attenuation channel. No closed-form decomposition is
// defined here: vacuum_term/bright_term are zero and qfi_closed_form repeats
// qfi_numerical; sql is the coherent-probe (s = 0) value at equal |alpha|.
QfiReport qfi_report_dichroism(const ProbeSpec& probe,
                               const ChiralSample& sample, double trials = 1.0);

// Precision enhancement over the coherent probe in the dilute limit
// (delta_phi -> 0) at fixed input power: sqrt(D / (D^2 - eta^2 sinh^2 2s)).
double dilute_precision_enhancement(double s, double eta);

// ---------------------------------------------------------------------------
// Measurements.

// Difference of the two port photocounts after a polarization rotation by xi:
// port1 = cos(xi) a_H + sin(xi) a_V, port2 = sin(xi) a_H - cos(xi) a_V.
GaussianState apply_waveplate(const GaussianState& state, double xi);

// Exact Gaussian-state photon counting moments for the two modes.
struct NumberStats {
    double mean1 = 0.0, mean2 = 0.0;
    double var1 = 0.0, var2 = 0.0;
    double cov = 0.0;
};
NumberStats photon_number_stats(const GaussianState& state);

// Waveplate setting that puts the mean at the steepest, zero-crossing point.
double optimal_waveplate_angle(double delta_phi);

// Squeezing angle that aligns the squeezed quadrature with the displacement
// (theta_eff = theta - 2 arg alpha = 0), which minimizes the detection
// variance regardless of the measurement-frame rotation.
double aligned_squeezing_angle(complexd alpha);

struct MeasurementStats {
    double mean = 0.0;
    double variance = 0.0;
    double dmean_dC = 0.0;
    double cfi_gaussian = 0.0;        // dmean_dC^2 / variance
    double propagated_variance = 0.0; // variance / dmean_dC^2 (per trial)
    bool bright_approximation_questionable = false;
    bool insensitive = false;  // dmean_dC = 0 at this setting
};

// Balanced difference detection behind the rotation channel in the bright
// regime: mean = eta |alpha|^2 cos(dphi - 2 xi), variance =
// eta |alpha|^2 (1 - eta + eta (cosh 2s - cos theta_eff sinh 2s)).
// The warning flag is set when |alpha|^2 < 100 sinh^2 2s.
MeasurementStats balanced_detection_stats(const ProbeSpec& probe,
                                          const ChiralSample& sample,
                                          double xi,
                                          double common_phase = 0.0);

// Per-arm photocount statistics behind the attenuation channel in the bright
// regime: mean_i = eta T_i (|alpha|^2 + sinh^2 s), variance_i =
// |alpha|^2 eta T_i (1 + 2 eta T_i sinh^2 s - eta T_i cos theta_eff sinh 2s).
// dmean_dC and the derived fields are zero/inf here (the transmissions carry
// no concentration dependence); use dichroism_concentration_variance for the
// estimator-level figure.
std::pair<MeasurementStats, MeasurementStats> dichroism_stats(
    const ProbeSpec& probe, const DichroismTransmissions& trans, double eta);

// Variance of the log-ratio concentration estimator,
//   beta [2(e^{-2s} - 1) + 1/(eta T_R) + 1/(eta T_L)],
// beta = (|alpha| delta_eps l_cm ln 10)^{-2}. Throws when eps_L = eps_R;
// +inf when an arm is fully opaque.
double dichroism_concentration_variance(const ProbeSpec& probe,
                                        const ChiralSample& sample);

// sqrt(variance ratio) of coherent over squeezed probes of equal power for
// equal-arm transmission T: sqrt(1 / (1 + eta T (e^{-2s} - 1))).
double dichroism_improvement_ratio(double T, double s, double eta);

// ---------------------------------------------------------------------------
// Cramer-Rao chain.

struct CrbChain {
    double qcrb_variance = 0.0;  // 1/(trials * qfi)
    double ccrb_variance = 0.0;  // 1/(trials * cfi)
    double tolerance = 1e-6;
    bool ordered = false;  // qcrb <= ccrb within tolerance
};

// Checks 1/(nu F) >= 1/(nu Q)(1 - tol). A violation is reported in the
// returned struct, never clipped.
CrbChain crb_chain(const QfiReport& qfi, const MeasurementStats& cfi,
                   double trials);

}  // namespace chiralmet
