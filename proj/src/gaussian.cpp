#include "chiralmet/gaussian.hpp"

#include <algorithm>
#include <cmath>

namespace chiralmet {

Mat4 symplectic_form() {
    Mat4 k = Mat4::Zero();
    k(0, 0) = 1.0;
    k(1, 1) = 1.0;
    k(2, 2) = -1.0;
    k(3, 3) = -1.0;
    return k;
}

GaussianState vacuum(ModeLabels labels) {
    GaussianState st;
    st.labels = labels;
    return st;
}

namespace {

GaussianState squeezed_pair(complexd d0, complexd d1, double s, double theta,
                            ModeLabels labels) {
    GaussianState st;
    st.labels = labels;
    st.d(0) = d0;
    st.d(1) = d1;
    st.d(2) = std::conj(d0);
    st.d(3) = std::conj(d1);

    const double c2s = std::cosh(2.0 * s);
    const complexd off = -std::sinh(2.0 * s) * std::exp(complexd(0.0, theta));
    Mat4 sigma = Mat4::Zero();
    sigma(0, 0) = sigma(1, 1) = sigma(2, 2) = sigma(3, 3) = c2s;
    sigma(0, 2) = off;
    sigma(1, 3) = off;
    sigma(2, 0) = std::conj(off);
    sigma(3, 1) = std::conj(off);
    st.sigma = sigma;
    return st;
}

}  // namespace

GaussianState polarization_squeezed_probe(complexd alpha, double s, double theta) {
    return squeezed_pair(alpha, complexd(0.0, 0.0), s, theta, ModeLabels::hv);
}

GaussianState twin_amplitude_squeezed_probe(complexd alpha, double s, double theta) {
    return squeezed_pair(alpha, alpha, s, theta, ModeLabels::lr);
}

GaussianState make_probe(const ProbeSpec& spec) {
    switch (spec.family) {
        case ProbeFamily::polarization_squeezed:
            return polarization_squeezed_probe(spec.alpha, spec.s, spec.theta);
        case ProbeFamily::twin_amplitude_squeezed:
            return twin_amplitude_squeezed_probe(spec.alpha, spec.s, spec.theta);
    }
    return vacuum();
}

std::array<double, 2> symplectic_eigenvalues(const GaussianState& state) {
    Mat4 ks = symplectic_form() * state.sigma;
    Eigen::ComplexEigenSolver<Mat4> solver(ks, /*computeEigenvectors=*/false);
    std::array<double, 4> mags;
    for (int i = 0; i < 4; ++i) mags[i] = std::abs(solver.eigenvalues()(i));
    std::sort(mags.begin(), mags.end(), std::greater<double>());
    return {0.5 * (mags[0] + mags[1]), 0.5 * (mags[2] + mags[3])};
}

bool is_physical(const GaussianState& state, double tol) {
    auto nu = symplectic_eigenvalues(state);
    return nu[1] >= 1.0 - tol && conjugation_defect(state) <= tol;
}

bool is_pure(const GaussianState& state, double tol) {
    auto nu = symplectic_eigenvalues(state);
    return std::abs(nu[0] - 1.0) <= tol && std::abs(nu[1] - 1.0) <= tol;
}

double mean_photons(const GaussianState& state) {
    const double fluct =
        0.5 * (state.sigma(0, 0).real() + state.sigma(1, 1).real() - 2.0);
    return std::norm(state.d(0)) + std::norm(state.d(1)) + fluct;
}

double conjugation_defect(const GaussianState& state) {
    Mat4 x = Mat4::Zero();
    x(0, 2) = x(1, 3) = x(2, 0) = x(3, 1) = 1.0;
    const Mat4 mirrored = x * state.sigma.conjugate() * x;
    double defect = (state.sigma - mirrored).cwiseAbs().maxCoeff();
    defect = std::max(defect,
                      (state.sigma - state.sigma.adjoint()).cwiseAbs().maxCoeff());
    const Vec4 dm = x * state.d.conjugate();
    defect = std::max(defect, (state.d - dm).cwiseAbs().maxCoeff());
    return defect;
}

}  // namespace chiralmet
