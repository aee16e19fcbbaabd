#pragma once

#include "chiralmet/gaussian.hpp"

// Optical channels for a chiral solution probed in transmission.
//
// Circular birefringence: the left/right circular modes pick up phases
// phi_L/phi_R; in the horizontal/vertical basis this is a rotation of the
// polarization plane by half their difference. Circular dichroism: the
// circular modes are attenuated with distinct Beer-Lambert transmissions.
// Circular modes are related to the linear ones by
//   a_L = (a_H - i a_V)/sqrt(2),   a_R = (a_H + i a_V)/sqrt(2).

namespace chiralmet {

enum class ConcentrationUnit { grams_per_cm3, moles_per_liter };
enum class PathLengthUnit { decimeters, centimeters };

// Sample parameters in the units conventional for each effect:
// rotatory power in rad cm^3 g^-1 dm^-1 with mass concentration (g/cm^3)
// and path length in dm; molar absorptivities in L mol^-1 cm^-1 with molar
// concentration (mol/L) and path length in cm.
struct ChiralSample {
    double concentration = 0.0;
    ConcentrationUnit concentration_unit = ConcentrationUnit::grams_per_cm3;
    double path_length = 0.0;
    PathLengthUnit path_length_unit = PathLengthUnit::decimeters;
    double rotatory_power = 0.0;  // delta-gamma
    double eps_L = 0.0;
    double eps_R = 0.0;
    double efficiency = 1.0;  // eta, overall transmission/detection efficiency

    double path_length_dm() const;
    double path_length_cm() const;
};

struct BirefringencePhases {
    double phi_L = 0.0;
    double phi_R = 0.0;
    double delta_phi() const { return phi_R - phi_L; }
    double common_phase() const { return 0.5 * (phi_L + phi_R); }
};

struct DichroismTransmissions {
    double T_L = 1.0;
    double T_R = 1.0;
    // Set when a transmission underflows to zero: that arm carries no light
    // and ratio-based estimators are undefined.
    bool degenerate = false;
};

// delta_phi = rotatory_power * concentration * path_length(dm), split
// symmetrically around a common phase. Requires mass concentration.
BirefringencePhases phases_from_sample(const ChiralSample& sample,
                                       double common_phase = 0.0);

// T_i = 10^(-eps_i * concentration * path_length(cm)), evaluated in log
// space so large absorbances underflow cleanly to zero. Requires molar
// concentration.
DichroismTransmissions transmissions_from_sample(const ChiralSample& sample);

// Polarization rotation in the H/V basis:
//   B = e^{i common} [[cos(dp/2), -sin(dp/2)], [sin(dp/2), cos(dp/2)]],
// dp = phi_R - phi_L, applied as d -> M d, Sigma -> M Sigma M^dag with
// M = blockdiag(B, B*). Input state must carry hv labels.
GaussianState apply_birefringence(const GaussianState& state,
                                  const BirefringencePhases& phases);

// Independent attenuation of the circular modes: d -> X d,
// Sigma -> X Sigma X + (I - X^2), X = diag(sqrt(T_L), sqrt(T_R)) per block.
// Input state must carry lr labels; transmissions outside [0, 1] throw.
GaussianState apply_dichroism(const GaussianState& state,
                              const DichroismTransmissions& trans);

// Uniform loss on both modes regardless of basis: Sigma -> eta Sigma +
// (1 - eta) I, d -> sqrt(eta) d. eta outside [0, 1] throws.
GaussianState apply_external_loss(const GaussianState& state, double eta);

}  // namespace chiralmet
