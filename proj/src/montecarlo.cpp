#include "chiralmet/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace chiralmet {

namespace {

constexpr std::uint64_t kBalancedStream = 0;
constexpr std::uint64_t kLeftArmStream = 1;
constexpr std::uint64_t kRightArmStream = 2;
constexpr std::uint64_t kBalancedCdfStream = 3;
constexpr std::uint64_t kJointCdfStream = 4;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void validate_plan(const ExperimentPlan& plan) {
    if (!plan.seed.has_value())
        throw std::invalid_argument("plan must carry a seed");
    if (plan.trials < 1)
        throw std::invalid_argument("plan needs at least one trial");
}

std::vector<double> cumulative(const Eigen::VectorXd& probs) {
    std::vector<double> cum(probs.size());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        acc += std::max(0.0, probs(i));
        cum[static_cast<std::size_t>(i)] = acc;
    }
    if (!(acc > 0.0)) throw std::runtime_error("distribution has no mass");
    return cum;
}

std::size_t sample_index(const std::vector<double>& cum, double u) {
    const double target = u * cum.back();
    const auto it = std::lower_bound(cum.begin(), cum.end(), target);
    return std::min(cum.size() - 1,
                    static_cast<std::size_t>(it - cum.begin()));
}

int resolved_cutoff(const ExperimentPlan& plan) {
    return plan.fock_cutoff > 0 ? plan.fock_cutoff
                                : fock_auto_cutoff(plan.probe);
}

double ratio_denominator(const ChiralSample& sample) {
    const double delta_eps = sample.eps_L - sample.eps_R;
    if (delta_eps == 0.0)
        throw std::invalid_argument(
            "ratio estimator undefined for eps_L == eps_R");
    return delta_eps * sample.path_length_cm();
}

}  // namespace

std::uint64_t counter_mix(std::uint64_t seed, std::uint64_t stream,
                          std::uint64_t counter) {
    const std::uint64_t keyed =
        splitmix64(seed + 0x9e3779b97f4a7c15ULL * (stream + 1));
    return splitmix64(keyed ^ (counter + 0xd1b54a32d192ed03ULL));
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t counter) {
    const std::uint64_t bits = counter_mix(seed, stream, counter) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double counter_normal(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t trial) {
    const double u1 = counter_uniform(seed, stream, 2 * trial);
    const double u2 = counter_uniform(seed, stream, 2 * trial + 1);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

OutcomeBatch sample_outcomes(const ExperimentPlan& plan) {
    validate_plan(plan);
    const std::uint64_t seed = *plan.seed;
    const auto n = static_cast<Eigen::Index>(plan.trials);
    OutcomeBatch batch;
    batch.scheme = plan.scheme;

    if (plan.scheme == MeasurementScheme::balanced_difference) {
        batch.values.resize(n);
        if (plan.model == OutcomeModel::gaussian_bright) {
            const MeasurementStats stats = balanced_detection_stats(
                plan.probe, plan.sample, plan.xi, plan.common_phase);
            const double sd = std::sqrt(stats.variance);
            for (Eigen::Index i = 0; i < n; ++i)
                batch.values(i) =
                    stats.mean +
                    sd * counter_normal(seed, kBalancedStream,
                                        static_cast<std::uint64_t>(i));
        } else {
            const OutcomeDistribution dist = balanced_distribution_fock(
                birefringence_output_fock(plan.probe, plan.sample,
                                          plan.common_phase,
                                          resolved_cutoff(plan)),
                plan.xi);
            const auto cum = cumulative(dist.probs);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double u = counter_uniform(
                    seed, kBalancedCdfStream, static_cast<std::uint64_t>(i));
                batch.values(i) =
                    dist.values(static_cast<Eigen::Index>(sample_index(cum, u)));
            }
        }
        return batch;
    }

    batch.counts_L.resize(n);
    batch.counts_R.resize(n);
    if (plan.model == OutcomeModel::gaussian_bright) {
        const auto trans = transmissions_from_sample(plan.sample);
        const auto [left, right] =
            dichroism_stats(plan.probe, trans, plan.sample.efficiency);
        const double sd_l = std::sqrt(left.variance);
        const double sd_r = std::sqrt(right.variance);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto t = static_cast<std::uint64_t>(i);
            batch.counts_L(i) =
                left.mean + sd_l * counter_normal(seed, kLeftArmStream, t);
            batch.counts_R(i) =
                right.mean + sd_r * counter_normal(seed, kRightArmStream, t);
        }
    } else {
        const Eigen::MatrixXd joint = joint_number_distribution_fock(
            dichroism_output_fock(plan.probe, plan.sample,
                                  resolved_cutoff(plan)));
        const auto d = joint.rows();
        Eigen::VectorXd flat(d * d);
        for (Eigen::Index n1 = 0; n1 < d; ++n1)
            for (Eigen::Index n2 = 0; n2 < d; ++n2)
                flat(n1 * d + n2) = joint(n1, n2);
        const auto cum = cumulative(flat);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double u = counter_uniform(seed, kJointCdfStream,
                                             static_cast<std::uint64_t>(i));
            const auto idx = static_cast<Eigen::Index>(sample_index(cum, u));
            batch.counts_L(i) = static_cast<double>(idx / d);
            batch.counts_R(i) = static_cast<double>(idx % d);
        }
    }
    return batch;
}

EstimationResult estimate_concentration(const ExperimentPlan& plan,
                                        const OutcomeBatch& batch) {
    validate_plan(plan);
    if (batch.scheme != plan.scheme)
        throw std::invalid_argument("batch scheme does not match the plan");

    EstimationResult result;
    result.trials = plan.trials;
    result.true_concentration = plan.sample.concentration;

    if (plan.scheme == MeasurementScheme::balanced_difference) {
        if (batch.values.size() == 0)
            throw std::invalid_argument("batch carries no balanced outcomes");
        const MeasurementStats stats = balanced_detection_stats(
            plan.probe, plan.sample, plan.xi, plan.common_phase);
        if (stats.insensitive)
            throw std::invalid_argument(
                "balanced response is insensitive at the operating point");
        const double c0 = plan.sample.concentration;
        result.estimates =
            (c0 + (batch.values.array() - stats.mean) / stats.dmean_dC)
                .matrix();
        result.used_trials = static_cast<std::uint64_t>(batch.values.size());
        result.pooled_estimate =
            c0 + (batch.values.mean() - stats.mean) / stats.dmean_dC;

        const QfiReport rep = qfi_closed_form_birefringence(
            plan.probe, plan.sample, plan.common_phase,
            static_cast<double>(plan.trials));
        result.qcrb_variance = rep.qcrb_variance;
        const double nu = static_cast<double>(plan.trials);
        if (plan.model == OutcomeModel::gaussian_bright) {
            result.predicted_variance = stats.propagated_variance / nu;
            result.ccrb_variance = 1.0 / (nu * stats.cfi_gaussian);
        } else {
            const OutcomeDistribution dist = balanced_distribution_fock(
                birefringence_output_fock(plan.probe, plan.sample,
                                          plan.common_phase,
                                          resolved_cutoff(plan)),
                plan.xi);
            result.predicted_variance =
                dist.variance() / (stats.dmean_dC * stats.dmean_dC) / nu;
            result.ccrb_variance = result.predicted_variance;
        }
    } else {
        if (batch.counts_L.size() == 0 ||
            batch.counts_L.size() != batch.counts_R.size())
            throw std::invalid_argument("batch carries no paired arm counts");
        const double denom = ratio_denominator(plan.sample);
        const auto n = batch.counts_L.size();
        std::vector<double> usable;
        usable.reserve(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i)
            if (batch.counts_L(i) > 0.0 && batch.counts_R(i) > 0.0)
                usable.push_back(
                    std::log10(batch.counts_R(i) / batch.counts_L(i)) / denom);
        result.estimates = Eigen::Map<const Eigen::VectorXd>(
            usable.data(), static_cast<Eigen::Index>(usable.size()));
        result.used_trials = usable.size();

        const double sum_l = batch.counts_L.sum();
        const double sum_r = batch.counts_R.sum();
        if (!(sum_l > 0.0) || !(sum_r > 0.0))
            throw std::runtime_error("zero-count arm, ratio undefined");
        result.pooled_estimate = std::log10(sum_r / sum_l) / denom;

        const QfiReport rep = qfi_report_dichroism(
            plan.probe, plan.sample, static_cast<double>(plan.trials));
        result.qcrb_variance = rep.qcrb_variance;
        const double nu = static_cast<double>(plan.trials);
        result.predicted_variance =
            dichroism_concentration_variance(plan.probe, plan.sample) / nu;
        result.ccrb_variance = result.predicted_variance;
    }

    if (result.used_trials < 2)
        throw std::runtime_error("too few usable trials for statistics");
    const double n_used = static_cast<double>(result.used_trials);
    result.empirical_mean = result.estimates.mean();
    const double var_per_trial =
        (result.estimates.array() - result.empirical_mean).square().sum() /
        (n_used - 1.0);
    result.empirical_variance = var_per_trial / n_used;
    result.variance_se =
        result.empirical_variance * std::sqrt(2.0 / (n_used - 1.0));
    result.bias = result.pooled_estimate - result.true_concentration;
    return result;
}

EstimationResult run_experiment(const ExperimentPlan& plan) {
    return estimate_concentration(plan, sample_outcomes(plan));
}

CrbVerdict crb_verdict(const EstimationResult& result, double saturation_tol) {
    CrbVerdict verdict;
    verdict.empirical_variance = result.empirical_variance;
    verdict.variance_se = result.variance_se;
    verdict.qcrb_variance = result.qcrb_variance;
    verdict.ccrb_variance = result.ccrb_variance;
    const double rel_se =
        result.empirical_variance > 0.0
            ? result.variance_se / result.empirical_variance
            : std::numeric_limits<double>::infinity();
    verdict.above_qcrb = result.empirical_variance >=
                         result.qcrb_variance * (1.0 - 3.0 * rel_se);
    verdict.saturates_ccrb =
        std::abs(result.empirical_variance - result.ccrb_variance) <=
        saturation_tol * result.ccrb_variance + 3.0 * result.variance_se;
    verdict.ok = verdict.above_qcrb;
    return verdict;
}

}  // namespace chiralmet
