#include "chiralmet/metrology.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace chiralmet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPureGap = 1e-6;  // nu - 1 below this counts as pure

void require_efficiency(double eta) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::invalid_argument("efficiency must lie in [0, 1]");
}

Eigen::Matrix2cd rotation2(double half, double common) {
    Eigen::Matrix2cd b;
    b << std::cos(half), -std::sin(half), std::sin(half), std::cos(half);
    return std::exp(complexd(0.0, common)) * b;
}

Mat4 block_lift(const Eigen::Matrix2cd& b) {
    Mat4 m = Mat4::Zero();
    m.block<2, 2>(0, 0) = b;
    m.block<2, 2>(2, 2) = b.conjugate();
    return m;
}

}  // namespace

GaussianState birefringence_output(const GaussianState& probe,
                                   const ChiralSample& sample,
                                   double common_phase) {
    auto phases = phases_from_sample(sample, common_phase);
    return apply_external_loss(apply_birefringence(probe, phases),
                               sample.efficiency);
}

GaussianState dichroism_output(const GaussianState& probe,
                               const ChiralSample& sample) {
    auto trans = transmissions_from_sample(sample);
    return apply_external_loss(apply_dichroism(probe, trans),
                               sample.efficiency);
}

ParamDerivative analytic_derivatives_birefringence(const ProbeSpec& spec,
                                                   const ChiralSample& sample,
                                                   double common_phase) {
    auto probe = make_probe(spec);
    if (probe.labels != ModeLabels::hv)
        throw std::invalid_argument(
            "the rotation channel expects a probe in the H/V basis");
    require_efficiency(sample.efficiency);

    auto phases = phases_from_sample(sample, common_phase);
    const double half = 0.5 * phases.delta_phi();
    const double slope = sample.rotatory_power * sample.path_length_dm();

    const Eigen::Matrix2cd b = rotation2(half, common_phase);
    Eigen::Matrix2cd bdot;
    bdot << -std::sin(half), -std::cos(half), std::cos(half), -std::sin(half);
    bdot *= std::exp(complexd(0.0, common_phase)) * (0.5 * slope);

    const Mat4 m = block_lift(b);
    const Mat4 mdot = block_lift(bdot);
    const double root_eta = std::sqrt(sample.efficiency);

    ParamDerivative out;
    out.d_dot = root_eta * (mdot * probe.d);
    out.sigma_dot = sample.efficiency * (mdot * probe.sigma * m.adjoint() +
                                         m * probe.sigma * mdot.adjoint());
    out.method = DerivMethod::analytic;
    return out;
}

ParamDerivative analytic_derivatives_dichroism(const ProbeSpec& spec,
                                               const ChiralSample& sample) {
    auto probe = make_probe(spec);
    if (probe.labels != ModeLabels::lr)
        throw std::invalid_argument(
            "the attenuation channel expects a probe in the L/R basis");
    require_efficiency(sample.efficiency);

    auto trans = transmissions_from_sample(sample);
    const double lcm = sample.path_length_cm();
    const double ln10 = std::log(10.0);
    const double root_tl = std::sqrt(trans.T_L);
    const double root_tr = std::sqrt(trans.T_R);

    Mat4 x = Mat4::Zero();
    x(0, 0) = x(2, 2) = root_tl;
    x(1, 1) = x(3, 3) = root_tr;
    // d sqrt(T_i)/dC = -(ln10 eps_i l / 2) sqrt(T_i), finite down to T = 0
    Mat4 xdot = Mat4::Zero();
    xdot(0, 0) = xdot(2, 2) = -0.5 * ln10 * sample.eps_L * lcm * root_tl;
    xdot(1, 1) = xdot(3, 3) = -0.5 * ln10 * sample.eps_R * lcm * root_tr;

    const double eta = sample.efficiency;
    ParamDerivative out;
    out.d_dot = std::sqrt(eta) * (xdot * probe.d);
    out.sigma_dot = eta * (xdot * probe.sigma * x + x * probe.sigma * xdot -
                           2.0 * x * xdot);
    out.method = DerivMethod::analytic;
    return out;
}

ParamDerivative numerical_derivative(
    const std::function<GaussianState(double)>& family, double concentration,
    double step_scale) {
    const double h = step_scale * std::max(std::abs(concentration), 1.0);
    const auto fp = family(concentration + h);
    const auto fm = family(concentration - h);
    const auto fp2 = family(concentration + 2.0 * h);
    const auto fm2 = family(concentration - 2.0 * h);

    ParamDerivative out;
    out.d_dot = (8.0 * (fp.d - fm.d) - (fp2.d - fm2.d)) / (12.0 * h);
    out.sigma_dot =
        (8.0 * (fp.sigma - fm.sigma) - (fp2.sigma - fm2.sigma)) / (12.0 * h);
    out.method = DerivMethod::central_difference;
    out.step = h;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

double displacement_term(const GaussianState& st, const ParamDerivative& der) {
    Mat4 sinv = st.sigma.inverse();
    return 2.0 * der.d_dot.dot(sinv * der.d_dot).real();
}

}  // namespace

double qfi_pure(const GaussianState& st, const ParamDerivative& der) {
    Mat4 sinv = st.sigma.inverse();
    Mat4 m = sinv * der.sigma_dot;
    return 0.25 * (m * m).trace().real() + displacement_term(st, der);
}

double qfi_mixed(const GaussianState& st, const ParamDerivative& der) {
    const Mat4 a = symplectic_form() * st.sigma;
    const Mat4 adot = symplectic_form() * der.sigma_dot;

    // invariants of a: p = lambda1^2 + lambda2^2, q = lambda1^2 lambda2^2
    const double p = 0.5 * (a * a).trace().real();
    const double q = a.determinant().real();

    const Mat4 ainv = a.inverse();
    const Mat4 m1 = ainv * adot;
    const double term1 = q * (m1 * m1).trace().real();

    const Mat4 m2 = (Mat4::Identity() + a * a).inverse() * adot;
    const double term2 = (1.0 + p + q) * (m2 * m2).trace().real();

    // 4 (l1^2 - l2^2) [ l2dot^2/(l2^4 - 1) - l1dot^2/(l1^4 - 1) ] as a
    // rational function of (p, q, pdot, qdot): smooth through l1 = l2,
    // singular only at purity (handled by the other paths).
    const double pdot = (a * adot).trace().real();
    const double qdot = q * m1.trace().real();
    const double w = p * pdot - 2.0 * qdot;
    const double r2 = std::max(p * p - 4.0 * q, 0.0);
    const double num = pdot * pdot * r2 * (p * p - q - 1.0) -
                       2.0 * pdot * w * p * (p * p - 3.0 * q - 1.0) +
                       w * w * (p * p - q - 1.0);
    const double term3 = num / (4.0 * q * ((q + 1.0) * (q + 1.0) - p * p));

    return (term1 + term2 + term3) / (2.0 * (q - 1.0)) +
           displacement_term(st, der);
}

double qfi_clamped(const GaussianState& st, const ParamDerivative& der,
                   double epsilon) {
    const auto nu = symplectic_eigenvalues(st);
    const double scale = std::max(1.0, (1.0 + epsilon) / nu[1]);
    GaussianState lifted = st;
    lifted.sigma = scale * st.sigma;
    ParamDerivative lifted_der = der;
    lifted_der.sigma_dot = scale * der.sigma_dot;
    return qfi_mixed(lifted, lifted_der);
}

double qfi_two_mode_gaussian(const GaussianState& st,
                             const ParamDerivative& der) {
    if (std::abs(st.sigma.determinant()) < 1e-12)
        throw std::runtime_error("singular covariance");
    const auto nu = symplectic_eigenvalues(st);
    if (nu[1] < 1.0 - 1e-6)
        throw std::invalid_argument("unphysical covariance");
    if (nu[0] - 1.0 < kPureGap) return qfi_pure(st, der);
    if (nu[1] - 1.0 < kPureGap) return qfi_clamped(st, der);
    return qfi_mixed(st, der);
}

// ---------------------------------------------------------------------------

QfiReport qfi_closed_form_birefringence(const ProbeSpec& spec,
                                        const ChiralSample& sample,
                                        double common_phase, double trials) {
    require_efficiency(sample.efficiency);
    auto state = birefringence_output(make_probe(spec), sample, common_phase);
    auto deriv = analytic_derivatives_birefringence(spec, sample, common_phase);

    QfiReport rep;
    rep.trials = trials;
    rep.qfi_numerical = qfi_two_mode_gaussian(state, deriv);
    rep.qcrb_variance =
        rep.qfi_numerical > 0.0 ? 1.0 / (trials * rep.qfi_numerical) : kInf;

    const double eta = sample.efficiency;
    const double dgl = sample.rotatory_power * sample.path_length_dm();
    const double alpha_sq = std::norm(spec.alpha);
    const double ch = std::cosh(2.0 * spec.s);
    const double sh = std::sinh(2.0 * spec.s);
    const double dp = dgl * sample.concentration;
    const double bigd = 1.0 - eta + eta * ch;

    rep.bright_term = eta * alpha_sq * dgl * dgl *
                      (bigd + eta * std::abs(std::sin(dp)) * sh) /
                      (bigd * bigd - eta * eta * sh * sh);
    rep.vacuum_term = 4.0 * eta * eta * dgl * dgl * sh * sh /
                      (1.0 - eta + eta * eta + (1.0 - eta) * eta * ch);
    rep.sql = eta * alpha_sq * dgl * dgl;
    rep.qfi_closed_form = rep.vacuum_term + rep.bright_term;
    if (rep.sql > 0.0) {
        rep.advantage_qfi = rep.qfi_closed_form / rep.sql;
    } else {
        rep.advantage_qfi = rep.qfi_closed_form > 0.0 ? kInf : 1.0;
    }
    rep.advantage_precision = std::sqrt(rep.advantage_qfi);
    return rep;
}

QfiReport qfi_report_dichroism(const ProbeSpec& spec,
                               const ChiralSample& sample, double trials) {
    require_efficiency(sample.efficiency);
    auto state = dichroism_output(make_probe(spec), sample);
    auto deriv = analytic_derivatives_dichroism(spec, sample);

    QfiReport rep;
    rep.trials = trials;
    rep.qfi_numerical = qfi_two_mode_gaussian(state, deriv);
    rep.qfi_closed_form = rep.qfi_numerical;
    rep.qcrb_variance =
        rep.qfi_numerical > 0.0 ? 1.0 / (trials * rep.qfi_numerical) : kInf;

    ProbeSpec coherent = spec;
    coherent.s = 0.0;
    rep.sql = qfi_two_mode_gaussian(
        dichroism_output(make_probe(coherent), sample),
        analytic_derivatives_dichroism(coherent, sample));
    if (rep.sql > 0.0) {
        rep.advantage_qfi = rep.qfi_numerical / rep.sql;
    } else {
        rep.advantage_qfi = rep.qfi_numerical > 0.0 ? kInf : 1.0;
    }
    rep.advantage_precision = std::sqrt(rep.advantage_qfi);
    return rep;
}

double dilute_precision_enhancement(double s, double eta) {
    require_efficiency(eta);
    const double ch = std::cosh(2.0 * s);
    const double sh = std::sinh(2.0 * s);
    const double bigd = 1.0 - eta + eta * ch;
    return std::sqrt(bigd / (bigd * bigd - eta * eta * sh * sh));
}

// ---------------------------------------------------------------------------

GaussianState apply_waveplate(const GaussianState& st, double xi) {
    if (st.labels != ModeLabels::hv)
        throw std::invalid_argument(
            "the analyzer rotation is defined in the H/V basis");
    Eigen::Matrix2cd w;
    w << std::cos(xi), std::sin(xi), std::sin(xi), -std::cos(xi);
    const Mat4 m = block_lift(w);

    GaussianState out;
    out.labels = ModeLabels::hv;
    out.d = m * st.d;
    out.sigma = m * st.sigma * m.adjoint();
    return out;
}

NumberStats photon_number_stats(const GaussianState& st) {
    const double n1 = 0.5 * (st.sigma(0, 0).real() - 1.0);
    const double n2 = 0.5 * (st.sigma(1, 1).real() - 1.0);
    const complexd m1 = 0.5 * st.sigma(0, 2);
    const complexd m2 = 0.5 * st.sigma(1, 3);
    const complexd pair12 = 0.5 * st.sigma(0, 3);   // <da1 da2>
    const complexd cross12 = 0.5 * st.sigma(1, 0);  // <da1^dag da2>
    const complexd d1 = st.d(0);
    const complexd d2 = st.d(1);

    NumberStats out;
    out.mean1 = std::norm(d1) + n1;
    out.mean2 = std::norm(d2) + n2;
    out.var1 = std::norm(d1) * (2.0 * n1 + 1.0) +
               2.0 * std::real(std::conj(d1) * std::conj(d1) * m1) +
               n1 * n1 + n1 + std::norm(m1);
    out.var2 = std::norm(d2) * (2.0 * n2 + 1.0) +
               2.0 * std::real(std::conj(d2) * std::conj(d2) * m2) +
               n2 * n2 + n2 + std::norm(m2);
    out.cov = 2.0 * std::real(std::conj(d1) * std::conj(d2) * pair12) +
              2.0 * std::real(d1 * std::conj(d2) * cross12) +
              std::norm(pair12) + std::norm(cross12);
    return out;
}

double optimal_waveplate_angle(double delta_phi) {
    return 0.25 * (2.0 * delta_phi - std::numbers::pi);
}

double aligned_squeezing_angle(complexd alpha) { return 2.0 * std::arg(alpha); }

MeasurementStats balanced_detection_stats(const ProbeSpec& spec,
                                          const ChiralSample& sample,
                                          double xi, double common_phase) {
    if (spec.family != ProbeFamily::polarization_squeezed)
        throw std::invalid_argument(
            "balanced detection applies to the rotation scheme (H/V probe)");
    require_efficiency(sample.efficiency);

    const auto phases = phases_from_sample(sample, common_phase);
    const double eta = sample.efficiency;
    const double alpha_sq = std::norm(spec.alpha);
    const double theta_eff = spec.theta - aligned_squeezing_angle(spec.alpha);
    const double ch = std::cosh(2.0 * spec.s);
    const double sh = std::sinh(2.0 * spec.s);
    const double slope = sample.rotatory_power * sample.path_length_dm();
    const double phase = phases.delta_phi() - 2.0 * xi;

    MeasurementStats out;
    out.mean = eta * alpha_sq * std::cos(phase);
    out.variance =
        eta * alpha_sq * (1.0 - eta + eta * (ch - std::cos(theta_eff) * sh));
    out.dmean_dC = -eta * alpha_sq * std::sin(phase) * slope;
    out.bright_approximation_questionable = alpha_sq < 100.0 * sh * sh;
    out.insensitive = std::abs(std::sin(phase)) < 1e-12 || alpha_sq == 0.0;
    if (out.insensitive || out.variance <= 0.0) {
        out.cfi_gaussian = 0.0;
        out.propagated_variance = kInf;
    } else {
        out.cfi_gaussian = out.dmean_dC * out.dmean_dC / out.variance;
        out.propagated_variance = out.variance / (out.dmean_dC * out.dmean_dC);
    }
    return out;
}

std::pair<MeasurementStats, MeasurementStats> dichroism_stats(
    const ProbeSpec& spec, const DichroismTransmissions& trans, double eta) {
    if (spec.family != ProbeFamily::twin_amplitude_squeezed)
        throw std::invalid_argument(
            "per-arm counting applies to the attenuation scheme (L/R probe)");
    require_efficiency(eta);
    if (!(trans.T_L >= 0.0 && trans.T_L <= 1.0) ||
        !(trans.T_R >= 0.0 && trans.T_R <= 1.0))
        throw std::invalid_argument("transmissions must lie in [0, 1]");

    const double alpha_sq = std::norm(spec.alpha);
    const double theta_eff = spec.theta - aligned_squeezing_angle(spec.alpha);
    const double sh_sq = std::pow(std::sinh(spec.s), 2);
    const double sh2 = std::sinh(2.0 * spec.s);

    auto arm = [&](double t) {
        const double teff = eta * t;
        MeasurementStats out;
        out.mean = teff * (alpha_sq + sh_sq);
        out.variance =
            alpha_sq * teff *
            (1.0 + 2.0 * teff * sh_sq - teff * std::cos(theta_eff) * sh2);
        out.dmean_dC = 0.0;
        out.cfi_gaussian = 0.0;
        out.propagated_variance = kInf;
        out.bright_approximation_questionable = alpha_sq < 100.0 * sh2 * sh2;
        out.insensitive = true;
        return out;
    };
    return {arm(trans.T_L), arm(trans.T_R)};
}

double dichroism_concentration_variance(const ProbeSpec& spec,
                                        const ChiralSample& sample) {
    if (spec.family != ProbeFamily::twin_amplitude_squeezed)
        throw std::invalid_argument(
            "the ratio estimator applies to the attenuation scheme");
    require_efficiency(sample.efficiency);
    const double deps = sample.eps_L - sample.eps_R;
    if (deps == 0.0)
        throw std::invalid_argument(
            "equal molar absorptivities carry no chiral signal");

    const double alpha_sq = std::norm(spec.alpha);
    const auto trans = transmissions_from_sample(sample);
    if (alpha_sq == 0.0 || trans.T_L == 0.0 || trans.T_R == 0.0) return kInf;

    const double eta = sample.efficiency;
    const double kappa = deps * sample.path_length_cm() * std::log(10.0);
    const double beta = 1.0 / (alpha_sq * kappa * kappa);
    const double theta_eff = spec.theta - aligned_squeezing_angle(spec.alpha);
    const double noise = 2.0 * std::pow(std::sinh(spec.s), 2) -
                         std::cos(theta_eff) * std::sinh(2.0 * spec.s);
    return beta *
           (2.0 * noise + 1.0 / (eta * trans.T_L) + 1.0 / (eta * trans.T_R));
}

double dichroism_improvement_ratio(double T, double s, double eta) {
    require_efficiency(eta);
    if (!(T > 0.0 && T <= 1.0))
        throw std::invalid_argument("transmission must lie in (0, 1]");
    return std::sqrt(1.0 / (1.0 + eta * T * (std::exp(-2.0 * s) - 1.0)));
}

CrbChain crb_chain(const QfiReport& qfi, const MeasurementStats& cfi,
                   double trials) {
    if (trials < 1.0) throw std::invalid_argument("trials must be >= 1");
    CrbChain out;
    out.qcrb_variance =
        qfi.qfi_numerical > 0.0 ? 1.0 / (trials * qfi.qfi_numerical) : kInf;
    out.ccrb_variance =
        cfi.cfi_gaussian > 0.0 ? 1.0 / (trials * cfi.cfi_gaussian) : kInf;
    out.ordered =
        out.ccrb_variance >= out.qcrb_variance * (1.0 - out.tolerance);
    return out;
}

}  // namespace chiralmet
