#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "neurocoarse/graph.hpp"
#include "neurocoarse/lifting.hpp"
#include "neurocoarse/micro.hpp"

namespace neurocoarse {

enum class LiftMode { uniform, manifold };
enum class GraphPolicy { shared, fresh_per_copy };

struct EnsembleConfig {
  int copies = 10000;
  int horizon_T = 5;
  std::uint64_t master_seed = 0;
  LiftMode lift_mode = LiftMode::uniform;
  ManifoldLiftConfig manifold;
  GraphPolicy graph_policy = GraphPolicy::shared;
  bool record_observables = true;
  bool with_triples = false;
  int threads = 0;
};

struct CoarseResult {
  double mean_p = 0;
  double std_error = 0;      // sample sd of per_copy_p / sqrt(copies)
  double p0_realized = 0;    // round(p0 * n) / n, the exact lifted density
  std::vector<double> per_copy_p;
  std::optional<CoarseObservables> observables_T;  // ensemble mean at T
  bool lift_warning = false;  // manifold conditioning hit k_max
};

// One evaluation of the coarse map: lift at p0 (uniform or
// manifold-conditioned), run horizon_T synchronous steps per copy, restrict
// by averaging the final densities. Copy i draws only from streams derived
// from (master_seed, i) and the reduction runs in copy order, so the result
// is bit-identical for any thread count.
//
// Evaluations that enter a finite-difference derivative must share their
// master_seed: lifting and the per-(step, neuron) draws are then aligned
// across the perturbed runs, which cancels most of the Monte Carlo noise in
// the difference.
CoarseResult coarse_timestep(double p0, double epsilon, const Network& net,
                             const EnsembleConfig& cfg);

// Black-box coarse map for the solvers. Implementations must honor the
// common-random-number contract: the same seed reproduces the same noise.
class CoarseMap {
 public:
  virtual ~CoarseMap() = default;
  virtual CoarseResult evaluate(double p0, double epsilon,
                                std::uint64_t seed) const = 0;
};

class NetworkCoarseMap final : public CoarseMap {
 public:
  NetworkCoarseMap(const Network& net, EnsembleConfig cfg)
      : net_(&net), cfg_(std::move(cfg)) {}
  CoarseResult evaluate(double p0, double epsilon,
                        std::uint64_t seed) const override {
    EnsembleConfig cfg = cfg_;
    cfg.master_seed = seed;
    return coarse_timestep(p0, epsilon, *net_, cfg);
  }
  const EnsembleConfig& config() const { return cfg_; }

 private:
  const Network* net_;
  EnsembleConfig cfg_;
};

struct PortraitPoint {
  int t = 0;
  double p = 0;
  double rho10 = 0;
};

struct PortraitSeries {
  int series_id = 0;
  double rho11_target = 0;
  std::vector<PortraitPoint> points;  // ensemble means, t = 0..steps
};

// One ensemble-averaged (p, rho10) trajectory per initial pair-density
// target, all lifted at the same p0 and conditioned by annealing. Targets
// above p0 violate rho11 <= p and are rejected up front.
std::vector<PortraitSeries> phase_portrait(double p0,
                                           std::span<const double> rho11_targets,
                                           double epsilon, const Network& net,
                                           int steps, int copies,
                                           std::uint64_t seed,
                                           const AnnealSchedule& schedule = {},
                                           int threads = 0);

}  // namespace neurocoarse
