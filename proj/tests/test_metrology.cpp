#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "chiralmet/channels.hpp"
#include "chiralmet/gaussian.hpp"
#include "chiralmet/metrology.hpp"

using namespace chiralmet;
using doctest::Approx;

namespace reference {

// Independent check in the quadrature representation (q1, p1, q2, p2),
// vacuum covariance normalized to the identity. Implemented directly from
// the symmetric-logarithmic-derivative superoperator, pseudo-inverted in a
// 16-dimensional eigenbasis; shares no code with the library paths.

Eigen::Matrix4cd quad_map() {
    const complexd im(0.0, 1.0);
    const double h = 1.0 / std::sqrt(2.0);
    Eigen::Matrix4cd s = Eigen::Matrix4cd::Zero();
    s(0, 0) = h;
    s(0, 2) = h;
    s(1, 0) = -im * h;
    s(1, 2) = im * h;
    s(2, 1) = h;
    s(2, 3) = h;
    s(3, 1) = -im * h;
    s(3, 3) = im * h;
    return s;
}

Eigen::Matrix4d to_quadrature(const Mat4& sigma) {
    Eigen::Matrix4cd x = Eigen::Matrix4cd::Zero();
    x(0, 2) = x(1, 3) = x(2, 0) = x(3, 1) = 1.0;
    const Eigen::Matrix4cd s = quad_map();
    return (s * sigma * x * s.transpose()).real();
}

Eigen::Vector4d to_quadrature(const Vec4& d) {
    return (quad_map() * d).real();
}

Eigen::Matrix4d quad_symplectic() {
    Eigen::Matrix4d om = Eigen::Matrix4d::Zero();
    om(0, 1) = om(2, 3) = 1.0;
    om(1, 0) = om(3, 2) = -1.0;
    return om;
}

Eigen::Matrix<double, 16, 16> kron4(const Eigen::Matrix4d& a,
                                    const Eigen::Matrix4d& b) {
    Eigen::Matrix<double, 16, 16> out;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out.block<4, 4>(4 * i, 4 * j) = a(i, j) * b;
    return out;
}

double qfi(const GaussianState& st, const Vec4& d_dot, const Mat4& sigma_dot) {
    const Eigen::Matrix4d v = to_quadrature(st.sigma);
    const Eigen::Matrix4d vdot = to_quadrature(sigma_dot);
    const Eigen::Vector4d rdot = to_quadrature(d_dot);
    const Eigen::Matrix4d om = quad_symplectic();

    const Eigen::Matrix<double, 16, 16> m = kron4(v, v) - kron4(om, om);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 16, 16>> es(m);
    Eigen::Matrix<double, 16, 1> rhs;
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r) rhs(4 * c + r) = vdot(r, c);
    const Eigen::Matrix<double, 16, 1> proj = es.eigenvectors().transpose() * rhs;
    const double cut = 1e-10 * es.eigenvalues().cwiseAbs().maxCoeff();
    double fcov = 0.0;
    for (int i = 0; i < 16; ++i)
        if (std::abs(es.eigenvalues()(i)) > cut)
            fcov += proj(i) * proj(i) / es.eigenvalues()(i);
    return 0.5 * fcov + 2.0 * rdot.dot(v.ldlt().solve(rdot));
}

}  // namespace reference

namespace {

ChiralSample sucrose_like() {
    ChiralSample s;
    s.concentration = 0.01;
    s.concentration_unit = ConcentrationUnit::grams_per_cm3;
    s.path_length = 1.0;
    s.path_length_unit = PathLengthUnit::centimeters;
    s.rotatory_power = 1.16;
    return s;
}

ChiralSample absorber_like() {
    ChiralSample s;
    s.concentration = 0.002;
    s.concentration_unit = ConcentrationUnit::moles_per_liter;
    s.path_length = 5.0;
    s.path_length_unit = PathLengthUnit::centimeters;
    s.eps_L = 120.0;
    s.eps_R = 70.0;
    return s;
}

GaussianState diag_state(double a, double b) {
    GaussianState st;
    st.sigma = Vec4(a, b, a, b).asDiagonal();
    return st;
}

}  // namespace

TEST_CASE("thermal family against the exact value") {
    const double nu1 = 1.7, nu2 = 1.3;
    GaussianState st = diag_state(nu1, nu2);
    ParamDerivative der;
    der.sigma_dot = Vec4(1, 0, 1, 0).asDiagonal();

    const double truth = 1.0 / (nu1 * nu1 - 1.0);
    CHECK(qfi_mixed(st, der) == Approx(truth).epsilon(1e-12));
    CHECK(qfi_two_mode_gaussian(st, der) == Approx(truth).epsilon(1e-12));
    CHECK(reference::qfi(st, Vec4::Zero(), der.sigma_dot) ==
          Approx(truth).epsilon(1e-8));
}

TEST_CASE("rotating squeezed thermal family against the exact value") {
    const double nu1 = 1.4, s = 0.35, nu2 = 1.9, theta = 0.6;
    auto at = [&](double th) {
        GaussianState st = diag_state(nu1 * std::cosh(2 * s), nu2);
        st.sigma(0, 2) = -nu1 * std::exp(complexd(0, th)) * std::sinh(2 * s);
        st.sigma(2, 0) = std::conj(st.sigma(0, 2));
        return st;
    };
    GaussianState st = at(theta);
    ParamDerivative der;
    der.sigma_dot(0, 2) =
        -complexd(0, 1) * nu1 * std::exp(complexd(0, theta)) * std::sinh(2 * s);
    der.sigma_dot(2, 0) = std::conj(der.sigma_dot(0, 2));

    const double sh = std::sinh(2 * s);
    const double truth = nu1 * nu1 * sh * sh / (nu1 * nu1 + 1.0);
    CHECK(qfi_two_mode_gaussian(st, der) == Approx(truth).epsilon(1e-10));
    CHECK(reference::qfi(st, Vec4::Zero(), der.sigma_dot) ==
          Approx(truth).epsilon(1e-8));

    auto num = numerical_derivative([&](double th) { return at(th); }, theta);
    CHECK(qfi_two_mode_gaussian(st, num) == Approx(truth).epsilon(1e-8));
}

TEST_CASE("pure squeezed vacuum phase family") {
    const double s = 0.8, theta0 = 0.3;
    auto at = [&](double phi) {
        GaussianState st = diag_state(std::cosh(2 * s), 1.0);
        st.sigma(0, 2) =
            -std::exp(complexd(0, theta0 + 2 * phi)) * std::sinh(2 * s);
        st.sigma(2, 0) = std::conj(st.sigma(0, 2));
        return st;
    };
    GaussianState st = at(0.0);
    ParamDerivative der;
    der.sigma_dot(0, 2) = complexd(0, 2) * st.sigma(0, 2);
    der.sigma_dot(2, 0) = std::conj(der.sigma_dot(0, 2));

    const double truth = 2.0 * std::pow(std::sinh(2 * s), 2);
    CHECK(qfi_pure(st, der) == Approx(truth).epsilon(1e-12));
    CHECK(qfi_two_mode_gaussian(st, der) == Approx(truth).epsilon(1e-12));

    const double clamped = qfi_clamped(st, der);
    CHECK(std::abs(clamped - truth) / truth < 1e-4);
    CHECK(std::abs(clamped - truth) / truth < 1e-5);
}

TEST_CASE("displaced thermal family") {
    GaussianState st = diag_state(1.5, 1.5);
    st.d = Vec4(0.7, 0, 0.7, 0);
    ParamDerivative der;
    der.d_dot = Vec4(1, 0, 1, 0);

    const double truth = 4.0 / 1.5;
    CHECK(qfi_mixed(st, der) == Approx(truth).epsilon(1e-12));
    CHECK(qfi_two_mode_gaussian(st, der) == Approx(truth).epsilon(1e-12));
    CHECK(reference::qfi(st, der.d_dot, der.sigma_dot) ==
          Approx(truth).epsilon(1e-10));
}

TEST_CASE("rotation channel against the quadrature reference") {
    ProbeSpec spec;
    spec.alpha = std::polar(1.3, 0.4);
    spec.s = 0.5;
    spec.theta = 0.9;
    ChiralSample sample = sucrose_like();
    sample.efficiency = 0.7;
    const double common = 0.25;

    auto state = birefringence_output(make_probe(spec), sample, common);
    auto an = analytic_derivatives_birefringence(spec, sample, common);
    auto num = numerical_derivative(
        [&](double c) {
            ChiralSample s2 = sample;
            s2.concentration = c;
            return birefringence_output(make_probe(spec), s2, common);
        },
        sample.concentration);

    CHECK((an.d_dot - num.d_dot).norm() < 1e-6 * an.d_dot.norm());
    CHECK((an.sigma_dot - num.sigma_dot).norm() < 1e-6);
    CHECK(an.sigma_dot.norm() < 1e-13);

    const double f_impl = qfi_two_mode_gaussian(state, an);
    const double f_ref = reference::qfi(state, an.d_dot, an.sigma_dot);
    CHECK(f_impl == Approx(f_ref).epsilon(1e-8));
    CHECK(qfi_two_mode_gaussian(state, num) == Approx(f_impl).epsilon(1e-6));

    const double eta = sample.efficiency;
    const double dgl = sample.rotatory_power * sample.path_length_dm();
    const double theta_eff = spec.theta - 2.0 * std::arg(spec.alpha);
    const double ch = std::cosh(2 * spec.s), sh = std::sinh(2 * spec.s);
    const double bigd = 1.0 - eta + eta * ch;
    const double expected = eta * std::norm(spec.alpha) * dgl * dgl *
                            (bigd + eta * std::cos(theta_eff) * sh) /
                            (bigd * bigd - eta * eta * sh * sh);
    CHECK(f_impl == Approx(expected).epsilon(1e-9));
}

TEST_CASE("rotation channel information over a parameter grid") {
    ChiralSample base = sucrose_like();
    for (complexd alpha : {std::polar(1.2, std::numbers::pi / 5), complexd(2.0, 0.0)})
        for (double s : {0.0, 0.4})
            for (double theta : {0.0, 0.7})
                for (double eta : {1.0, 0.8})
                    for (double conc : {0.01, 2.0}) {
                        ProbeSpec spec;
                        spec.alpha = alpha;
                        spec.s = s;
                        spec.theta = theta;
                        ChiralSample sample = base;
                        sample.concentration = conc;
                        sample.efficiency = eta;

                        auto state =
                            birefringence_output(make_probe(spec), sample);
                        auto an = analytic_derivatives_birefringence(spec, sample);
                        const double f = qfi_two_mode_gaussian(state, an);

                        const double dgl =
                            sample.rotatory_power * sample.path_length_dm();
                        const double theta_eff = theta - 2.0 * std::arg(alpha);
                        const double ch = std::cosh(2 * s), sh = std::sinh(2 * s);
                        const double bigd = 1.0 - eta + eta * ch;
                        const double expected =
                            eta * std::norm(alpha) * dgl * dgl *
                            (bigd + eta * std::cos(theta_eff) * sh) /
                            (bigd * bigd - eta * eta * sh * sh);
                        CHECK(f == Approx(expected).epsilon(1e-9));
                    }
}

TEST_CASE("dark rotation probe carries no information at fixed common phase") {
    for (double eta : {1.0, 0.75}) {
        ProbeSpec spec;
        spec.alpha = 0.0;
        spec.s = 0.6;
        ChiralSample sample = sucrose_like();
        sample.efficiency = eta;
        auto state = birefringence_output(make_probe(spec), sample);
        auto an = analytic_derivatives_birefringence(spec, sample);
        CHECK(std::abs(qfi_two_mode_gaussian(state, an)) < 1e-12);
    }
}

TEST_CASE("closed form report for the rotation channel") {
    ProbeSpec spec;
    spec.alpha = std::sqrt(1e9);
    spec.s = 1.0;
    spec.theta = 0.0;
    ChiralSample sample = sucrose_like();

    auto rep = qfi_closed_form_birefringence(spec, sample);
    const double dgl = 0.116;
    const double dphi = dgl * sample.concentration;
    const double sql = 1e9 * dgl * dgl;
    const double bright =
        1e9 * dgl * dgl * (std::cosh(2.0) + std::sin(dphi) * std::sinh(2.0));
    const double vac = 4.0 * dgl * dgl * std::pow(std::sinh(2.0), 2);

    CHECK(rep.sql == Approx(sql).epsilon(1e-12));
    CHECK(rep.bright_term == Approx(bright).epsilon(1e-12));
    CHECK(rep.vacuum_term == Approx(vac).epsilon(1e-12));
    CHECK(rep.qfi_closed_form == Approx(vac + bright).epsilon(1e-12));
    CHECK(rep.advantage_precision ==
          Approx(std::sqrt((vac + bright) / sql)).epsilon(1e-12));
    CHECK(rep.advantage_precision > 1.90);
    CHECK(rep.advantage_precision < 2.00);

    CHECK(rep.qfi_numerical ==
          Approx(1e9 * dgl * dgl * std::exp(2.0)).epsilon(1e-9));
    CHECK(rep.qcrb_variance == Approx(1.0 / rep.qfi_numerical).epsilon(1e-12));

    ProbeSpec coh = spec;
    coh.s = 0.0;
    auto rep0 = qfi_closed_form_birefringence(coh, sample);
    CHECK(rep0.vacuum_term == 0.0);
    CHECK(rep0.bright_term == Approx(rep0.sql).epsilon(1e-13));
    CHECK(rep0.advantage_qfi == Approx(1.0).epsilon(1e-13));
    CHECK(rep0.qfi_numerical == Approx(rep0.sql).epsilon(1e-10));
}

TEST_CASE("standard quantum limit recovery at zero squeezing") {
    ProbeSpec spec;
    spec.alpha = 50.0;
    ChiralSample sample = sucrose_like();
    const double dgl = sample.rotatory_power * sample.path_length_dm();
    for (int i = 1; i <= 20; ++i) {
        sample.efficiency = i / 20.0;
        auto rep = qfi_closed_form_birefringence(spec, sample);
        const double sql = sample.efficiency * 2500.0 * dgl * dgl;
        CHECK(rep.qfi_numerical == Approx(sql).epsilon(1e-10));
        CHECK(rep.qfi_closed_form == Approx(sql).epsilon(1e-10));
    }
}

TEST_CASE("information scales exactly with rotatory power and path length") {
    ProbeSpec spec;
    spec.alpha = 3.0;
    spec.s = 0.5;
    ChiralSample sample = sucrose_like();
    auto rep = qfi_closed_form_birefringence(spec, sample);

    ChiralSample rescaled = sample;
    rescaled.rotatory_power = sample.rotatory_power / 2.0;
    rescaled.path_length = sample.path_length * 2.0;
    auto rep2 = qfi_closed_form_birefringence(spec, rescaled);
    CHECK(rep2.qfi_numerical == rep.qfi_numerical);
    CHECK(rep2.qfi_closed_form == rep.qfi_closed_form);

    ChiralSample doubled = sample;
    doubled.rotatory_power = sample.rotatory_power * 2.0;
    auto rep4 = qfi_closed_form_birefringence(spec, doubled);
    CHECK(rep4.qfi_numerical == Approx(4.0 * rep.qfi_numerical).epsilon(1e-9));
}

TEST_CASE("information grows with the detection efficiency") {
    ProbeSpec spec;
    spec.alpha = 3.0;
    spec.s = 0.7;
    ChiralSample sample = sucrose_like();
    double prev = 0.0;
    for (double eta : {0.2, 0.4, 0.6, 0.8, 1.0}) {
        sample.efficiency = eta;
        auto rep = qfi_closed_form_birefringence(spec, sample);
        CHECK(rep.qfi_numerical > prev);
        prev = rep.qfi_numerical;
    }
}

TEST_CASE("dilute precision enhancement") {
    CHECK(dilute_precision_enhancement(1.73, 1.0) ==
          Approx(std::sqrt(std::cosh(3.46))).epsilon(1e-12));
    CHECK(dilute_precision_enhancement(1.73, 1.0) > 3.9);
    CHECK(dilute_precision_enhancement(1.73, 1.0) < 4.1);
    CHECK(dilute_precision_enhancement(0.0, 0.77) == Approx(1.0).epsilon(1e-15));

    double prev = 1e300;
    for (double eta : {1.0, 0.95, 0.9, 0.8, 0.5}) {
        const double g = dilute_precision_enhancement(1.73, eta);
        CHECK(g < prev);
        prev = g;
    }
    CHECK(dilute_precision_enhancement(1.73, 0.5) == Approx(1.0).epsilon(1e-12));
    CHECK(dilute_precision_enhancement(1.73, 0.3) < 1.0);
}

TEST_CASE("analyzer statistics agree with photon number moments") {
    ProbeSpec spec;
    spec.alpha = 60.0;
    spec.s = 0.6;
    ChiralSample sample = sucrose_like();
    sample.efficiency = 0.85;
    const double dphi = phases_from_sample(sample).delta_phi();
    auto state = birefringence_output(make_probe(spec), sample);

    const double eta = sample.efficiency;
    const double nbar = eta * (std::cosh(2 * spec.s) - 1.0) / 2.0;
    const double qpart = 2.0 * nbar * nbar + 2.0 * nbar +
                         eta * eta * std::pow(std::sinh(2 * spec.s), 2) / 2.0;

    double first_exact = 0.0;
    bool first = true;
    for (double xi : {optimal_waveplate_angle(dphi), 0.1, -0.37}) {
        auto out = apply_waveplate(state, xi);
        auto ns = photon_number_stats(out);
        auto bd = balanced_detection_stats(spec, sample, xi);

        CHECK(ns.mean1 - ns.mean2 == Approx(bd.mean).epsilon(1e-10));
        const double exact_var = ns.var1 + ns.var2 - 2.0 * ns.cov;
        CHECK(exact_var == Approx(bd.variance + qpart).epsilon(1e-9));
        CHECK(ns.mean1 + ns.mean2 ==
              Approx(eta * (3600.0 + 2.0 * std::pow(std::sinh(spec.s), 2)))
                  .epsilon(1e-10));
        if (first) {
            first_exact = exact_var;
            first = false;
        } else {
            CHECK(exact_var == Approx(first_exact).epsilon(1e-10));
        }
    }
}

TEST_CASE("balanced detection saturates the quantum bound when aligned") {
    ProbeSpec spec;
    spec.alpha = 1e4;
    spec.s = 0.8;
    spec.theta = 0.0;
    ChiralSample sample = sucrose_like();
    const double dphi = phases_from_sample(sample).delta_phi();
    const double xi = optimal_waveplate_angle(dphi);

    for (double eta : {1.0, 0.8}) {
        sample.efficiency = eta;
        auto rep = qfi_closed_form_birefringence(spec, sample);
        auto bd = balanced_detection_stats(spec, sample, xi);
        CHECK(bd.cfi_gaussian == Approx(rep.qfi_numerical).epsilon(1e-9));

        auto chain = crb_chain(rep, bd, 1e5);
        CHECK(chain.ordered);
        CHECK(chain.qcrb_variance ==
              Approx(1.0 / (1e5 * rep.qfi_numerical)).epsilon(1e-12));
        CHECK(chain.ccrb_variance >= chain.qcrb_variance * (1.0 - 1e-6));
    }

    sample.efficiency = 0.8;
    auto rep = qfi_closed_form_birefringence(spec, sample);
    auto off = balanced_detection_stats(spec, sample, xi + 0.3);
    CHECK(off.cfi_gaussian < rep.qfi_numerical);
    CHECK(crb_chain(rep, off, 1.0).ordered);
}

TEST_CASE("misaligned squeezing raises the analyzer noise floor") {
    ProbeSpec spec;
    spec.alpha = 200.0;
    spec.s = 0.9;
    ChiralSample sample = sucrose_like();
    const double xi =
        optimal_waveplate_angle(phases_from_sample(sample).delta_phi());

    spec.theta = aligned_squeezing_angle(spec.alpha);
    const double aligned = balanced_detection_stats(spec, sample, xi).variance;
    spec.theta = aligned_squeezing_angle(spec.alpha) + std::numbers::pi;
    const double anti = balanced_detection_stats(spec, sample, xi).variance;

    CHECK(aligned == Approx(4e4 * std::exp(-2 * spec.s)).epsilon(1e-12));
    CHECK(anti == Approx(4e4 * std::exp(2 * spec.s)).epsilon(1e-12));
    CHECK(aligned < anti);
}

TEST_CASE("optimal analyzer angle maximizes the signal slope") {
    const double dphi = 0.7;
    const double best = optimal_waveplate_angle(dphi);
    CHECK(std::abs(std::sin(dphi - 2.0 * best)) == Approx(1.0).epsilon(1e-15));

    ProbeSpec spec;
    spec.alpha = 40.0;
    ChiralSample sample = sucrose_like();
    sample.concentration = dphi / 0.116;
    const double at_best =
        std::abs(balanced_detection_stats(spec, sample, best).dmean_dC);
    for (double xi : {-0.9, -0.3, 0.0, 0.4, 1.1})
        CHECK(at_best >=
              std::abs(balanced_detection_stats(spec, sample, xi).dmean_dC));
    CHECK(std::abs(balanced_detection_stats(spec, sample, best).mean) <
          1e-10 * std::norm(spec.alpha));
}

TEST_CASE("balanced detection edge cases") {
    ChiralSample sample = sucrose_like();
    ProbeSpec spec;
    spec.alpha = 30.0;

    const double blind = 0.5 * phases_from_sample(sample).delta_phi();
    auto bd = balanced_detection_stats(spec, sample, blind);
    CHECK(bd.insensitive);
    CHECK(bd.cfi_gaussian == 0.0);
    CHECK(std::isinf(bd.propagated_variance));
    CHECK(bd.mean == Approx(900.0).epsilon(1e-12));

    spec.alpha = 0.0;
    CHECK(balanced_detection_stats(spec, sample, 0.2).insensitive);

    spec.alpha = 5.0;
    spec.s = 1.0;
    CHECK(balanced_detection_stats(spec, sample, 0.2)
              .bright_approximation_questionable);

    ProbeSpec twin;
    twin.family = ProbeFamily::twin_amplitude_squeezed;
    CHECK_THROWS_AS(balanced_detection_stats(twin, sample, 0.0),
                    std::invalid_argument);

    sample.efficiency = 1.2;
    spec.s = 0.0;
    CHECK_THROWS_AS(balanced_detection_stats(spec, sample, 0.0),
                    std::invalid_argument);
}

TEST_CASE("attenuation channel against the quadrature reference") {
    ProbeSpec spec;
    spec.family = ProbeFamily::twin_amplitude_squeezed;
    spec.alpha = std::polar(1.1, 0.3);
    spec.s = 0.45;
    spec.theta = 0.9;
    ChiralSample sample = absorber_like();
    sample.efficiency = 0.85;

    auto state = dichroism_output(make_probe(spec), sample);
    auto an = analytic_derivatives_dichroism(spec, sample);
    auto num = numerical_derivative(
        [&](double c) {
            ChiralSample s2 = sample;
            s2.concentration = c;
            return dichroism_output(make_probe(spec), s2);
        },
        sample.concentration);

    CHECK((an.d_dot - num.d_dot).norm() < 1e-6 * an.d_dot.norm());
    CHECK((an.sigma_dot - num.sigma_dot).norm() <
          1e-6 * an.sigma_dot.norm());

    const double f_impl = qfi_two_mode_gaussian(state, an);
    const double f_ref = reference::qfi(state, an.d_dot, an.sigma_dot);
    CHECK(f_impl == Approx(f_ref).epsilon(1e-8));
    CHECK(qfi_two_mode_gaussian(state, num) == Approx(f_impl).epsilon(1e-6));

    auto rep = qfi_report_dichroism(spec, sample);
    CHECK(rep.qfi_numerical == Approx(f_impl).epsilon(1e-12));
    CHECK(rep.qfi_closed_form == Approx(f_impl).epsilon(1e-12));
    CHECK(rep.sql > 0.0);
    CHECK(rep.advantage_qfi ==
          Approx(rep.qfi_numerical / rep.sql).epsilon(1e-12));
    CHECK(rep.qcrb_variance == Approx(1.0 / rep.qfi_numerical).epsilon(1e-12));
}

TEST_CASE("coherent attenuation report reduces to its own benchmark") {
    ProbeSpec spec;
    spec.family = ProbeFamily::twin_amplitude_squeezed;
    spec.alpha = 2.0;
    auto rep = qfi_report_dichroism(spec, absorber_like());
    CHECK(rep.advantage_qfi == Approx(1.0).epsilon(1e-12));
    CHECK(rep.advantage_precision == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("per arm counting statistics for the attenuation channel") {
    ProbeSpec spec;
    spec.family = ProbeFamily::twin_amplitude_squeezed;
    spec.alpha = 50.0;
    spec.s = 0.55;
    spec.theta = 0.0;
    DichroismTransmissions trans;
    trans.T_L = 0.64;
    trans.T_R = 0.25;
    const double eta = 0.9;

    auto [sl, sr] = dichroism_stats(spec, trans, eta);
    auto out = apply_external_loss(apply_dichroism(make_probe(spec), trans), eta);
    auto ns = photon_number_stats(out);

    CHECK(ns.mean1 == Approx(sl.mean).epsilon(1e-12));
    CHECK(ns.mean2 == Approx(sr.mean).epsilon(1e-12));

    auto leftover = [&](double t) {
        const double n = eta * t * std::pow(std::sinh(spec.s), 2);
        const double m = eta * t * std::sinh(2 * spec.s) / 2.0;
        return n * n + n + m * m;
    };
    CHECK(ns.var1 - sl.variance == Approx(leftover(trans.T_L)).epsilon(1e-9));
    CHECK(ns.var2 - sr.variance == Approx(leftover(trans.T_R)).epsilon(1e-9));

    ProbeSpec coh = spec;
    coh.s = 0.0;
    auto [cl, cr] = dichroism_stats(coh, trans, eta);
    CHECK(cl.variance == Approx(eta * trans.T_L * 2500.0).epsilon(1e-13));
    CHECK(cl.mean == Approx(eta * trans.T_L * 2500.0).epsilon(1e-13));
    CHECK(cr.variance == Approx(eta * trans.T_R * 2500.0).epsilon(1e-13));

    DichroismTransmissions unity;
    auto [ul, ur] = dichroism_stats(spec, unity, 1.0);
    CHECK(ul.variance == Approx(2500.0 * std::exp(-2 * spec.s)).epsilon(1e-12));
    ProbeSpec anti = spec;
    anti.theta = std::numbers::pi;
    auto [al, ar] = dichroism_stats(anti, unity, 1.0);
    CHECK(al.variance == Approx(2500.0 * std::exp(2 * spec.s)).epsilon(1e-12));

    ProbeSpec pol;
    CHECK_THROWS_AS(dichroism_stats(pol, trans, eta), std::invalid_argument);
    trans.T_L = 1.4;
    CHECK_THROWS_AS(dichroism_stats(spec, trans, eta), std::invalid_argument);
}

TEST_CASE("ratio estimator variance for the attenuation channel") {
    ChiralSample sample = absorber_like();
    sample.efficiency = 0.9;
    ProbeSpec spec;
    spec.family = ProbeFamily::twin_amplitude_squeezed;
    spec.alpha = 40.0;
    spec.s = 0.5;

    const double v = dichroism_concentration_variance(spec, sample);
    auto trans = transmissions_from_sample(sample);
    const double kappa = 50.0 * 5.0 * std::log(10.0);
    const double beta = 1.0 / (1600.0 * kappa * kappa);
    const double expected =
        beta * (2.0 * (std::exp(-1.0) - 1.0) + 1.0 / (0.9 * trans.T_L) +
                1.0 / (0.9 * trans.T_R));
    CHECK(v == Approx(expected).epsilon(1e-12));

    auto [sl, sr] = dichroism_stats(spec, trans, 0.9);
    const double bright_l = 0.9 * trans.T_L * 1600.0;
    const double bright_r = 0.9 * trans.T_R * 1600.0;
    const double composed = (sl.variance / (bright_l * bright_l) +
                             sr.variance / (bright_r * bright_r)) /
                            (kappa * kappa);
    CHECK(v == Approx(composed).epsilon(1e-10));

    double prev = 1e300;
    for (double s : {0.0, 0.5, 1.0, 2.0}) {
        ProbeSpec sq = spec;
        sq.s = s;
        const double vs = dichroism_concentration_variance(sq, sample);
        CHECK(vs < prev);
        prev = vs;
    }

    ProbeSpec anti = spec;
    anti.theta = std::numbers::pi;
    CHECK(dichroism_concentration_variance(anti, sample) > v);

    ChiralSample achiral = sample;
    achiral.eps_L = achiral.eps_R = 90.0;
    CHECK_THROWS_AS(dichroism_concentration_variance(spec, achiral),
                    std::invalid_argument);

    ChiralSample opaque = sample;
    opaque.eps_L = 40000.0;
    CHECK(std::isinf(dichroism_concentration_variance(spec, opaque)));
}

TEST_CASE("attenuation improvement ratio") {
    CHECK(dichroism_improvement_ratio(0.9, 3.0, 1.0) ==
          Approx(3.1275849).epsilon(1e-6));
    CHECK(dichroism_improvement_ratio(0.9, 3.0, 1.0) > 3.0);
    CHECK(dichroism_improvement_ratio(0.9, 3.0, 1.0) < 3.3);
    CHECK(dichroism_improvement_ratio(0.99, 3.0, 1.0) ==
          Approx(8.9607885).epsilon(1e-6));
    CHECK(dichroism_improvement_ratio(0.5, 0.0, 1.0) ==
          Approx(1.0).epsilon(1e-15));
    CHECK(dichroism_improvement_ratio(1e-6, 3.0, 1.0) ==
          Approx(1.0).epsilon(1e-5));

    double prev = 0.0;
    for (double s : {0.0, 0.5, 1.0, 2.0, 3.0}) {
        const double g = dichroism_improvement_ratio(0.9, s, 1.0);
        CHECK(g >= prev);
        prev = g;
    }
    CHECK_THROWS_AS(dichroism_improvement_ratio(0.0, 1.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("ratio estimator respects the quantum bound for bright probes") {
    ChiralSample sample = absorber_like();
    sample.efficiency = 0.9;
    ProbeSpec spec;
    spec.family = ProbeFamily::twin_amplitude_squeezed;
    spec.alpha = 200.0;
    spec.s = 0.5;
    spec.theta = 0.0;

    const double cfi = 1.0 / dichroism_concentration_variance(spec, sample);
    auto rep = qfi_report_dichroism(spec, sample);
    CHECK(cfi <= rep.qfi_numerical * (1.0 + 1e-6));
}

TEST_CASE("numerical derivative stencil") {
    auto family = [](double c) {
        GaussianState st = diag_state(1.0 + c * c, 1.0);
        st.d = Vec4(std::sin(c), 0, std::sin(c), 0);
        return st;
    };
    auto der = numerical_derivative(family, 0.3);
    CHECK(der.method == DerivMethod::central_difference);
    CHECK(der.step == Approx(1e-5).epsilon(1e-12));
    CHECK(der.d_dot(0).real() == Approx(std::cos(0.3)).epsilon(1e-10));
    CHECK(der.sigma_dot(0, 0).real() == Approx(0.6).epsilon(1e-9));

    auto der3 = numerical_derivative(family, 3.0);
    CHECK(der3.step == Approx(3e-5).epsilon(1e-12));
}

TEST_CASE("information functional rejects invalid input") {
    GaussianState bad;
    bad.sigma = 0.75 * Mat4::Identity();
    ParamDerivative der;
    CHECK_THROWS_AS(qfi_two_mode_gaussian(bad, der), std::invalid_argument);

    ProbeSpec twin;
    twin.family = ProbeFamily::twin_amplitude_squeezed;
    CHECK_THROWS_AS(analytic_derivatives_birefringence(twin, sucrose_like()),
                    std::invalid_argument);
    ProbeSpec pol;
    CHECK_THROWS_AS(analytic_derivatives_dichroism(pol, absorber_like()),
                    std::invalid_argument);

    QfiReport rep;
    rep.qfi_numerical = 1.0;
    MeasurementStats ms;
    CHECK_THROWS_AS(crb_chain(rep, ms, 0.5), std::invalid_argument);
}
