#pragma once

#include <cstdint>
#include <optional>

#include "chiralmet/fock.hpp"
#include "chiralmet/metrology.hpp"

// Monte Carlo simulation of the two detection schemes.
//
// All randomness is counter-based: draw i of stream k under seed s is a
// splitmix64 hash of (s, k, i), so a run is reproducible bit for bit and
// independent of evaluation order. Normals use Box-Muller on two hashed
// uniforms per draw; finite distributions are sampled by inverse CDF.

namespace chiralmet {

enum class MeasurementScheme { balanced_difference, intensity_ratio };
enum class OutcomeModel { gaussian_bright, exact_fock };

struct ExperimentPlan {
    ProbeSpec probe;
    ChiralSample sample;
    MeasurementScheme scheme = MeasurementScheme::balanced_difference;
    double xi = 0.0;  // analyzer angle, balanced scheme only
    double common_phase = 0.0;
    std::uint64_t trials = 0;  // nu
    std::optional<std::uint64_t> seed;
    OutcomeModel model = OutcomeModel::gaussian_bright;
    int fock_cutoff = 0;  // <= 0 selects fock_auto_cutoff(probe)
};

struct OutcomeBatch {
    MeasurementScheme scheme = MeasurementScheme::balanced_difference;
    Eigen::VectorXd values;              // balanced: photocount difference
    Eigen::VectorXd counts_L, counts_R;  // intensity ratio: per-arm counts
};

struct EstimationResult {
    Eigen::VectorXd estimates;  // per-trial estimates (usable trials only)
    std::uint64_t trials = 0;
    std::uint64_t used_trials = 0;  // ratio drops trials with an empty arm
    double true_concentration = 0.0;
    double pooled_estimate = 0.0;  // balanced: inverted mean outcome;
                                   // ratio: log-ratio of summed counts
    double empirical_mean = 0.0;
    double empirical_variance = 0.0;  // of the nu-trial average
    double variance_se = 0.0;  // standard error of empirical_variance
    double bias = 0.0;         // pooled_estimate - true concentration
    double predicted_variance = 0.0;  // error propagation at nu trials
    double qcrb_variance = 0.0;       // 1/(nu * QFI)
    double ccrb_variance = 0.0;  // 1/(nu * CFI) for the bright balanced
                                 // model; error-propagation reference
                                 // otherwise
};

struct CrbVerdict {
    double empirical_variance = 0.0;
    double variance_se = 0.0;
    double qcrb_variance = 0.0;
    double ccrb_variance = 0.0;
    bool above_qcrb = false;      // empirical >= qcrb (1 - 3 relative se)
    bool saturates_ccrb = false;  // empirical within band of ccrb
    bool ok = false;              // no statistically significant violation
};

// Counter-based primitives, exposed for tests.
std::uint64_t counter_mix(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t counter);
// Uniform on (0, 1), consuming one counter.
double counter_uniform(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t counter);
// Standard normal for one trial, consuming counters 2*trial and 2*trial + 1.
double counter_normal(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t trial);

// Draws plan.trials outcomes at the sample's concentration. gaussian_bright
// draws normals at the scheme's bright-regime mean and variance; exact_fock
// samples the truncated number-state distribution of the channel output.
// Plans without a seed or with zero trials are rejected.
OutcomeBatch sample_outcomes(const ExperimentPlan& plan);

// Inverts outcomes into concentration estimates. Balanced scheme: local
// inversion of the mean response around the plan's operating point (throws
// when the response is insensitive there). Intensity ratio: per-trial
// log10(n_R / n_L) / (delta_eps l_cm) plus a pooled variant from the summed
// counts; an empty pooled arm throws, per-trial empty arms are dropped and
// counted in used_trials.
EstimationResult estimate_concentration(const ExperimentPlan& plan,
                                        const OutcomeBatch& batch);

EstimationResult run_experiment(const ExperimentPlan& plan);

// Compares the empirical variance against the Cramer-Rao references carried
// in the result. ok = false when the empirical variance sits below the QCRB
// by more than three standard errors.
CrbVerdict crb_verdict(const EstimationResult& result,
                       double saturation_tol = 0.15);

}  // namespace chiralmet
