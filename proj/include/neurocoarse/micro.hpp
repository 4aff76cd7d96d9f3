#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "neurocoarse/graph.hpp"
#include "neurocoarse/rng.hpp"

namespace neurocoarse {

// Binary activation vector, one entry per neuron (1 = activated).
using MicroState = std::vector<std::uint8_t>;

struct PairDensities {
  double rho11 = 0, rho10 = 0, rho01 = 0, rho00 = 1;
};

// Directed length-2 path classes: 000, 100/001, 010, 110/011, 101, 111.
using TripleDensities = std::array<double, 6>;
inline constexpr int kTriple000 = 0;
inline constexpr int kTriple100 = 1;
inline constexpr int kTriple010 = 2;
inline constexpr int kTriple110 = 3;
inline constexpr int kTriple101 = 4;
inline constexpr int kTriple111 = 5;

// First- and second-order (optionally third-order) spatial moments of a state.
// On a d-regular graph: rho11 + rho10 = p, rho00 + rho01 = 1 - p and
// rho10 = rho01 hold exactly.
struct CoarseObservables {
  double p = 0;
  double rho11 = 0, rho10 = 0, rho01 = 0, rho00 = 1;
  std::optional<TripleDensities> triples;
};

// Probability that a neuron changes state this step. The decision counts the
// neuron's own state among its "activated links": with c = active_neighbors +
// (own state) and threshold (d+1)/2, an inactive neuron activates with eps
// when 1 <= c < threshold and with 1-eps when c >= threshold; an active
// neuron deactivates with 1-eps below threshold and eps at or above it. An
// inactive neuron with no active neighbor never activates, which makes the
// all-off state absorbing.
double flip_probability(bool active, int active_neighbors, int d,
                        double epsilon);

// flip_probability tabulated over (state, active neighbor count)
class FlipTable {
 public:
  FlipTable(int d, double epsilon);
  double operator()(bool active, int k) const {
    return prob_[(active ? d_ + 1 : 0) + k];
  }
  int degree() const { return d_; }
  double epsilon() const { return eps_; }

 private:
  int d_;
  double eps_;
  std::vector<double> prob_;
};

// Synchronous update: every neuron decides on the old state. Exactly one
// uniform is drawn per neuron in index order, so the draw sequence is
// identical for any two states of the same size (common-random-number
// coupling between perturbed runs). Returns the active count of `next`.
int synchronous_step_into(MicroState& next, const MicroState& cur,
                          const Network& net, const FlipTable& table,
                          rng::Stream& rs);

MicroState synchronous_step(const MicroState& state, const Network& net,
                            double epsilon, rng::Stream& rs);

// `steps` synchronous updates; when `trajectory` is given it receives
// steps + 1 entries (state at t = 0 included).
MicroState evolve(MicroState state, const Network& net, double epsilon,
                  int steps, rng::Stream& rs,
                  std::vector<CoarseObservables>* trajectory = nullptr,
                  bool with_triples = false);

double density(const MicroState& state);

// Counts over all n*d directed links.
PairDensities pair_densities(const MicroState& state, const Network& net);

// Counts over all n*d*(d-1) directed paths (a, b, c) with a != c neighbors
// of b; the six classes sum to 1.
TripleDensities triple_densities(const MicroState& state, const Network& net);

CoarseObservables observe(const MicroState& state, const Network& net,
                          bool with_triples = false);

}  // namespace neurocoarse
