#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "neurocoarse/graph.hpp"
#include "neurocoarse/micro.hpp"
#include "neurocoarse/rng.hpp"

namespace neurocoarse {

struct AnnealSchedule {
  double initial_temp = -1.0;      // < 0: start at 0.1 x initial energy
  double cooling_factor = 0.95;    // per sweep
  int sweeps = 200;
  long long swaps_per_sweep = -1;  // < 0: one proposal per neuron
  double tolerance = 1e-3;         // stop early at this moment distance
};

// Fast-variable target: rho11 at pair level; include the six path classes to
// condition third-order moments as well.
struct MomentTarget {
  double rho11 = 0;
  std::optional<TripleDensities> triples;
};

struct AnnealResult {
  double residual = 0;
  long long proposals = 0;
  long long accepted = 0;
  long long uphill_accepted = 0;
  int sweeps_used = 0;
};

// Exactly round(p_target * n) neurons active, uniformly placed. Consumes
// draws proportional to the active count, monotonically coupled in p_target:
// lifts from one stream at nearby targets share their leading selections.
MicroState random_lift(double p_target, const Network& net, rng::Stream& rs);

// Metropolis conditioning of the fast moments at fixed density. Proposals
// swap the states of one random active and one random inactive neuron, so the
// activation count never changes. Pseudoenergy is the Euclidean distance of
// the tracked fast variables from `target`; uphill moves are accepted with
// probability exp(-dE/Temp). An unreachable target is reported through the
// returned residual, never thrown.
AnnealResult anneal_to_moments(MicroState& state, const Network& net,
                               const MomentTarget& target,
                               const AnnealSchedule& schedule, rng::Stream& rs);

struct ManifoldLiftConfig {
  int dT = 1;          // burst length between restrictions
  int k_max = 8;       // outer iterations; the off-manifold transient is ~3 steps
  double moment_tol = 1e-3;
  bool use_triples = false;
  // The restriction anneal starts from the post-burst state, which already
  // carries the target moments up to the density pin, so a near-greedy
  // low-temperature schedule converges in a few thousand proposals. The
  // general-purpose default schedule would random-walk here for ~100 sweeps.
  AnnealSchedule schedule{1e-5, 0.9, 25, 4000, 5e-4};
};

struct ManifoldEnsemble {
  std::vector<MicroState> states;
  MomentTarget manifold_estimate;
  bool converged = false;
  int iterations = 0;
};

// Burst-and-restrict loop: evolve every copy dT steps, measure the
// ensemble-mean fast variables, then pin each copy back to the target density
// and anneal it toward that measurement. Stops when successive measurements
// move less than moment_tol in sup norm. Copy i draws only from streams[i].
ManifoldEnsemble converge_to_manifold(double p_target, double epsilon,
                                      const Network& net,
                                      const ManifoldLiftConfig& cfg,
                                      std::span<rng::Stream> streams,
                                      int threads = 0);

// Same loop, seeded with caller-prepared states (they are re-pinned to
// p_target before the first burst).
ManifoldEnsemble converge_to_manifold(std::vector<MicroState> states,
                                      double p_target, double epsilon,
                                      const Network& net,
                                      const ManifoldLiftConfig& cfg,
                                      std::span<rng::Stream> streams,
                                      int threads = 0);

// Convenience: `copies` fresh streams derived from (seed, copy index).
ManifoldEnsemble converge_to_manifold(double p_target, double epsilon,
                                      const Network& net, int copies,
                                      const ManifoldLiftConfig& cfg,
                                      std::uint64_t seed, int threads = 0);

}  // namespace neurocoarse
