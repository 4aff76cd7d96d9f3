#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "neurocoarse/coarse.hpp"

namespace neurocoarse {

// One converged fixed point of the coarse map at a parameter value.
struct BranchPoint {
  double epsilon = 0;
  double p_star = 0;
  double lambda = 0;  // dPhi/dp at the fixed point
  bool stable = false;
  double residual = 0;  // |p_star - Phi(p_star)|
};

struct ContinuationConfig {
  double delta_s = 0.01;    // arc-length step
  double fd_delta = 1e-2;   // finite-difference perturbation
  double newton_tol = 5e-4;
  int max_newton_iters = 12;
  double epsilon_min = 0.02;  // trace window
  double epsilon_max = 0.45;
  int max_points = 200;
  std::uint64_t seed = 1;  // base for per-step common-random-number clusters
};

struct NewtonNoConvergence : std::runtime_error {
  NewtonNoConvergence(double p, double g)
      : std::runtime_error("newton_solve: no convergence"),
        last_p(p),
        last_residual(g) {}
  double last_p;
  double last_residual;
};

struct SingularDerivative : std::runtime_error {
  explicit SingularDerivative(double lam)
      : std::runtime_error(
            "newton_solve: |1 - lambda| too small (near a fold; use "
            "arc-length continuation)"),
        lambda(lam) {}
  double lambda;
};

struct DerivativeEstimate {
  double lambda = 0;
  bool noisy = false;  // difference below 4x its combined standard error
};

// Central difference (Phi(p+d) - Phi(p-d)) / 2d with both evaluations on the
// same seed; falls back to a one-sided difference at the p = 0 / p = 1
// boundary.
DerivativeEstimate dphi_dp(const CoarseMap& map, double p, double epsilon,
                           const ContinuationConfig& cfg,
                           std::uint64_t cluster_seed);

// Same in the parameter direction, respecting the open interval (0, 0.5).
double dphi_depsilon(const CoarseMap& map, double p, double epsilon,
                     const ContinuationConfig& cfg,
                     std::uint64_t cluster_seed);

// Damped Newton on G(p) = p - Phi(p, eps). All map evaluations in one solve
// share cluster_seed, which makes G effectively deterministic during the
// iteration. Iterates are clipped to [0, 1]; an overshooting step is halved.
BranchPoint newton_solve(const CoarseMap& map, double p_guess, double epsilon,
                         const ContinuationConfig& cfg,
                         std::uint64_t cluster_seed);

inline BranchPoint newton_solve(const CoarseMap& map, double p_guess,
                                double epsilon,
                                const ContinuationConfig& cfg) {
  return newton_solve(map, p_guess, epsilon, cfg, cfg.seed);
}

struct Branch {
  std::vector<BranchPoint> points;
  bool aborted = false;  // corrector gave up after step halving
};

// Pseudo-arc-length predictor/corrector on the bordered system
// { G(p, eps) = 0, N(p, eps) = 0 } with the secant tangent from the two
// previous solutions. Each continuation step runs on a fresh seed cluster;
// within a step all evaluations share the cluster seed. Traces through folds;
// stops when eps leaves the trace window or max_points is reached; on
// persistent corrector failure the partial branch is returned with `aborted`
// set.
Branch arclength_trace(const CoarseMap& map, const BranchPoint& seed_a,
                       const BranchPoint& seed_b,
                       const ContinuationConfig& cfg);

struct CriticalPoint {
  enum class Kind { fold, transcritical };
  Kind kind;
  double epsilon;
};

// Folds: sign change of the eps increment along the branch, located by a
// local quadratic fit of eps against arc index. Transcritical points: on the
// p = 0 branch, (1 - lambda) changes sign; eps interpolated where lambda
// crosses 1.
std::vector<CriticalPoint> locate_critical_points(const Branch& branch);

}  // namespace neurocoarse
