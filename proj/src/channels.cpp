#include "chiralmet/channels.hpp"

#include <cmath>
#include <stdexcept>

namespace chiralmet {

double ChiralSample::path_length_dm() const {
    return path_length_unit == PathLengthUnit::decimeters ? path_length
                                                          : 0.1 * path_length;
}

double ChiralSample::path_length_cm() const {
    return path_length_unit == PathLengthUnit::centimeters ? path_length
                                                           : 10.0 * path_length;
}

BirefringencePhases phases_from_sample(const ChiralSample& sample,
                                       double common_phase) {
    if (sample.concentration_unit != ConcentrationUnit::grams_per_cm3)
        throw std::invalid_argument(
            "rotatory power is defined for mass concentration (g/cm^3)");
    const double dp =
        sample.rotatory_power * sample.concentration * sample.path_length_dm();
    return {common_phase - 0.5 * dp, common_phase + 0.5 * dp};
}

DichroismTransmissions transmissions_from_sample(const ChiralSample& sample) {
    if (sample.concentration_unit != ConcentrationUnit::moles_per_liter)
        throw std::invalid_argument(
            "molar absorptivity is defined for molar concentration (mol/L)");
    const double cl = sample.concentration * sample.path_length_cm();
    DichroismTransmissions t;
    t.T_L = std::pow(10.0, -sample.eps_L * cl);
    t.T_R = std::pow(10.0, -sample.eps_R * cl);
    t.degenerate = (t.T_L == 0.0) || (t.T_R == 0.0);
    return t;
}

GaussianState apply_birefringence(const GaussianState& state,
                                  const BirefringencePhases& phases) {
    if (state.labels != ModeLabels::hv)
        throw std::invalid_argument(
            "birefringence acts on states in the H/V basis");
    const double half = 0.5 * phases.delta_phi();
    const complexd common = std::exp(complexd(0.0, phases.common_phase()));
    Eigen::Matrix2cd b;
    b << std::cos(half), -std::sin(half), std::sin(half), std::cos(half);
    b *= common;

    Mat4 m = Mat4::Zero();
    m.block<2, 2>(0, 0) = b;
    m.block<2, 2>(2, 2) = b.conjugate();

    GaussianState out;
    out.labels = ModeLabels::hv;
    out.d = m * state.d;
    out.sigma = m * state.sigma * m.adjoint();
    return out;
}

GaussianState apply_dichroism(const GaussianState& state,
                              const DichroismTransmissions& trans) {
    if (state.labels != ModeLabels::lr)
        throw std::invalid_argument("dichroism acts on states in the L/R basis");
    if (!(trans.T_L >= 0.0 && trans.T_L <= 1.0) ||
        !(trans.T_R >= 0.0 && trans.T_R <= 1.0))
        throw std::invalid_argument("transmissions must lie in [0, 1]");

    Mat4 x = Mat4::Zero();
    x(0, 0) = x(2, 2) = std::sqrt(trans.T_L);
    x(1, 1) = x(3, 3) = std::sqrt(trans.T_R);

    GaussianState out;
    out.labels = ModeLabels::lr;
    out.d = x * state.d;
    out.sigma = x * state.sigma * x + (Mat4::Identity() - x * x);
    return out;
}

GaussianState apply_external_loss(const GaussianState& state, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::invalid_argument("efficiency must lie in [0, 1]");
    GaussianState out;
    out.labels = state.labels;
    out.d = std::sqrt(eta) * state.d;
    out.sigma = eta * state.sigma + (1.0 - eta) * Mat4::Identity();
    return out;
}

}  // namespace chiralmet
