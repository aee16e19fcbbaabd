#pragma once

#include <array>
#include <complex>

#include <Eigen/Dense>

// Two-mode Gaussian states in the annihilation/creation ordering
//   A = (a_1, a_2, a_1^dag, a_2^dag).
// The displacement vector is d_i = <A_i>; the covariance matrix is
//   Sigma_ij = <dA_i dA_j^dag + dA_j^dag dA_i>,   dA = A - <A>,
// normalized so that the vacuum covariance equals the identity.
// This ordering is the single program-wide convention; the two mode slots
// carry a basis label (horizontal/vertical or left/right circular) so that
// channel code can reject states expressed in the wrong basis.

namespace chiralmet {

using complexd = std::complex<double>;
using Vec4 = Eigen::Vector4cd;
using Mat4 = Eigen::Matrix4cd;

enum class ModeLabels { hv, lr };

struct GaussianState {
    Vec4 d = Vec4::Zero();
    Mat4 sigma = Mat4::Identity();
    ModeLabels labels = ModeLabels::hv;
};

// k = diag(1, 1, -1, -1); eigenvalues of k*Sigma come in +/- pairs whose
// magnitudes are the symplectic eigenvalues.
Mat4 symplectic_form();

enum class ProbeFamily { polarization_squeezed, twin_amplitude_squeezed };

struct ProbeSpec {
    ProbeFamily family = ProbeFamily::polarization_squeezed;
    complexd alpha{0.0, 0.0};
    double s = 0.0;      // squeezing factor, >= 0
    double theta = 0.0;  // squeezing angle, radians
};

GaussianState vacuum(ModeLabels labels = ModeLabels::hv);

// Displaced mode 1 plus identical single-mode squeezing on both modes,
// expressed in the H/V basis: d = (alpha, 0, alpha*, 0), diagonal cosh(2s),
// Sigma[0,2] = Sigma[1,3] = -sinh(2s) e^{i theta}.
GaussianState polarization_squeezed_probe(complexd alpha, double s, double theta);

// Both circular modes displaced by alpha and squeezed identically (L/R basis):
// d = (alpha, alpha, alpha*, alpha*), covariance as above.
GaussianState twin_amplitude_squeezed_probe(complexd alpha, double s, double theta);

GaussianState make_probe(const ProbeSpec& spec);

// Magnitudes of the two distinct eigenvalue pairs of k*Sigma, sorted
// descending. Physical states satisfy min >= 1 - tol; equality (both = 1)
// means a pure state.
std::array<double, 2> symplectic_eigenvalues(const GaussianState& state);

bool is_physical(const GaussianState& state, double tol = 1e-9);
bool is_pure(const GaussianState& state, double tol = 1e-9);

// Total mean photon number over both modes.
double mean_photons(const GaussianState& state);

// Largest deviation from the required conjugation symmetry
// Sigma = X Sigma* X with X swapping the annihilation/creation halves,
// and from Hermiticity of the reordered covariance. Zero for states built
// by the constructors in this header.
double conjugation_defect(const GaussianState& state);

}  // namespace chiralmet
