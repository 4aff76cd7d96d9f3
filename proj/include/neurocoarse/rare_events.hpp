#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "neurocoarse/coarse.hpp"

namespace neurocoarse {

// Effective one-dimensional description of the density dynamics around a
// metastable fixed point p_node, in the reaction coordinate psi = p - p_node.
struct DriftDiffusionProfile {
  double p_node = 0;
  std::vector<double> psi;          // strictly increasing
  std::vector<double> drift;        // u(psi) per time step
  std::vector<double> diffusion;    // D(psi) per time step, > 0
  std::vector<double> free_energy;  // beta*G(psi); empty until computed
  int copies = 0;
  int delta_T = 1;
  bool diffusion_floored = false;  // a degenerate point was floored
};

struct EscapeEstimate {
  enum class Method { kramers, direct };
  double tau = 0;  // mean escape time in time steps
  double psi_stable = 0;
  double psi_unstable = 0;
  Method method = Method::kramers;
  long long censored = 0;
  bool barrier_warning = false;  // beta-G barrier below 2
};

// Per grid point: lift at p_node + psi through `map`, run delta_T steps, and
// read drift and diffusion off the first two moments of the per-copy density
// increment: u = <dpsi>/dT, D = var(dpsi)/(2 dT).
DriftDiffusionProfile estimate_drift_diffusion(const CoarseMap& map,
                                               double p_node,
                                               std::span<const double> psi_grid,
                                               double epsilon, int delta_T,
                                               std::uint64_t seed);

// Network convenience: manifold-conditioned lifts, `copies` realizations.
DriftDiffusionProfile estimate_drift_diffusion(double p_node,
                                               std::span<const double> psi_grid,
                                               double epsilon,
                                               const Network& net, int delta_T,
                                               int copies,
                                               const ManifoldLiftConfig& lift,
                                               std::uint64_t seed,
                                               int threads = 0);

// beta*G(psi) = -int_0^psi u/D + ln D + const, cumulative trapezoid from
// psi = 0 (inserted by linear interpolation when the grid lacks it), with the
// constant fixed so the minimum sits at zero. Fills profile.free_energy in
// place.
void free_energy(DriftDiffusionProfile& profile);

// Mean escape time over the free-energy barrier:
//   tau ~ [int_{stable..unstable} exp(bG)] * [int_{well side} exp(-bG)/D],
// both trapezoidal on the grid, exponentials shifted so that adding any
// constant to bG cancels exactly. The well-side integral runs from the
// unstable point to the grid end that contains the minimum. Requires an
// interior minimum and maximum of the free energy.
EscapeEstimate kramers_escape_time(const DriftDiffusionProfile& profile);

// Validation by brute force: uniform lifts at p_start evolved until the
// density first drops below exit_threshold. Runs hitting max_steps are
// counted as censored; tau averages the uncensored escapes. Throws when every
// run is censored.
EscapeEstimate direct_mfpt(double p_start, double epsilon, const Network& net,
                           double exit_threshold, int escapes,
                           long long max_steps, std::uint64_t seed,
                           int threads = 0);

}  // namespace neurocoarse
