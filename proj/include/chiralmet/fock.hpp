#pragma once

#include <Eigen/Dense>
#include <functional>

#include "chiralmet/channels.hpp"
#include "chiralmet/gaussian.hpp"

namespace chiralmet {

// Truncated two-mode number basis, |n1, n2> stored at index n1*(cutoff+1)+n2.
// States are kept unnormalized: probability mass lost to the cutoff is
// tracked in trace_deficit instead of being renormalized away.

struct FockDensity {
    int cutoff = 0;
    Eigen::MatrixXcd rho;
    double trace_deficit = 0.0;
};

int fock_auto_cutoff(const ProbeSpec& probe);

// Probe vector from matrix exponentials of the displacement and squeeze
// generators, built with headroom above the cutoff and truncated back down;
// throws when the truncated mass exceeds leak_tol.
Eigen::VectorXcd probe_vector_fock(const ProbeSpec& probe, int cutoff,
                                   double leak_tol = 1e-8);
FockDensity build_probe_fock(const ProbeSpec& probe, int cutoff,
                             double leak_tol = 1e-8);

// Lift of a 2x2 mode map V (state convention <a> -> V <a>) to the truncated
// space, applied blockwise over total photon number.
Eigen::VectorXcd apply_passive_fock(const Eigen::VectorXcd& psi,
                                    const Eigen::Matrix2cd& v, int cutoff);

// Expects a state built in the H/V basis; same convention as `channels`.
FockDensity apply_birefringence_fock(const FockDensity& rho,
                                     const BirefringencePhases& phases);
FockDensity apply_loss_fock(const FockDensity& rho, double t1, double t2);
FockDensity apply_dichroism_fock(const FockDensity& rho,
                                 const DichroismTransmissions& trans);

bool is_physical_fock(const FockDensity& rho, double tol = 1e-9);
GaussianState moments_from_fock(const FockDensity& rho, ModeLabels labels);

struct OutcomeDistribution {
    Eigen::VectorXd values;
    Eigen::VectorXd probs;
    double total() const;
    double mean() const;
    double variance() const;
};

// rho = columns * columns^dagger; the working representation for lossy pure
// inputs (one column per retained two-mode loss branch).
struct LowRankState {
    int cutoff = 0;
    Eigen::MatrixXcd columns;
    double trace_deficit = 0.0;
};

LowRankState lossy_pure_fock(const Eigen::VectorXcd& psi, double t1, double t2,
                             int cutoff, double tail_tol = 1e-13);

// Channel outputs at the sample's concentration, as low-rank states; cutoff
// <= 0 selects fock_auto_cutoff(probe).
LowRankState birefringence_output_fock(const ProbeSpec& probe,
                                       const ChiralSample& sample,
                                       double common_phase = 0.0,
                                       int cutoff = 0);
LowRankState dichroism_output_fock(const ProbeSpec& probe,
                                   const ChiralSample& sample, int cutoff = 0);

OutcomeDistribution balanced_distribution_fock(const FockDensity& rho,
                                               double xi);
OutcomeDistribution balanced_distribution_fock(const LowRankState& rho,
                                               double xi);
Eigen::MatrixXd joint_number_distribution_fock(const FockDensity& rho);
Eigen::MatrixXd joint_number_distribution_fock(const LowRankState& rho);

struct SldResult {
    double qfi = 0.0;
    double qfi_coarse_floor = 0.0;  // same data, spectral floor x10
    double floor = 0.0;
    int rank = 0;
    double step = 0.0;
};

// Spectral symmetric-logarithmic-derivative information of a state family,
// derivative by Richardson-extrapolated central differences at dc.
SldResult qfi_sld(const std::function<FockDensity(double)>& family, double c,
                  double dc, double floor_scale = 1e-12);
SldResult qfi_sld_lowrank(const std::function<LowRankState(double)>& family,
                          double c, double dc, double floor_scale = 1e-12);

// Concentration-parameter oracle values for the two channels; cutoff <= 0
// selects fock_auto_cutoff(probe).
SldResult oracle_qfi_birefringence(const ProbeSpec& probe,
                                   const ChiralSample& sample,
                                   double common_phase = 0.0, int cutoff = 0);
SldResult oracle_qfi_dichroism(const ProbeSpec& probe,
                               const ChiralSample& sample, int cutoff = 0);

}  // namespace chiralmet
