#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "neurocoarse/graph.hpp"
#include "neurocoarse/micro.hpp"

namespace neurocoarse {

// Full 2^n x 2^n synchronous transition matrix for desk-scale networks.
// States are encoded as integers with bit i = neuron i.
struct ExactChain {
  int n = 0;
  std::vector<double> matrix;  // row-major, row = source state

  std::size_t size() const { return std::size_t{1} << n; }
  const double* row(std::size_t s) const { return matrix.data() + s * size(); }
};

inline constexpr int kExactChainMaxNeurons = 12;

// Entry (s -> s') is the product over neurons of the flip/stay probability
// evaluated on the old state s. Throws when n exceeds the size cap.
ExactChain exact_transition_matrix(const Network& net, double epsilon);

// t matrix-vector products from `initial` (a distribution over states);
// returns E[p](0), ..., E[p](t).
std::vector<double> exact_density_evolution(const ExactChain& chain,
                                            std::span<const double> initial,
                                            int t);

// Binomial-closure one-step map: endpoint-independence ansatz for the
// neighbor states. Diagnostic only; the network dynamics carry pair
// correlations this map neglects.
double mean_field_map(double p, double epsilon, int d);

// Pearson chi-square against expected counts; cells with expectation below
// min_expected are pooled into one bin. Passes when the statistic stays below
// the (1 - significance) quantile.
struct ChiSquareResult {
  double statistic = 0;
  int dof = 0;
  double critical = 0;
  bool pass = false;
};
ChiSquareResult chi_square_vs_expected(std::span<const long long> counts,
                                       std::span<const double> expected,
                                       double significance,
                                       double min_expected = 5.0);

// One-step distribution check: `samples` Monte Carlo steps from `start`
// against the exact transition row. `table_override` lets tests inject a
// corrupted rule as a negative control.
ChiSquareResult one_step_chi_square(const Network& net, const MicroState& start,
                                    double epsilon, int samples,
                                    std::uint64_t seed, double significance,
                                    const FlipTable* table_override = nullptr);

struct EquivalenceReport {
  std::string label;
  ChiSquareResult chi;
  bool mean_pass = false;
  double max_abs_z = 0;  // worst |MC - exact| / SE over t <= t_max
  bool pass() const { return chi.pass && mean_pass; }
};

// The standard desk-scale validation set: 4- and 8-rings (d = 2) plus an
// 8-vertex cubic graph, at eps in {0.1, 0.3}.
std::vector<EquivalenceReport> run_equivalence_suite(
    std::uint64_t seed, int one_step_samples = 100000,
    int trajectory_realizations = 20000, int t_max = 5,
    double significance = 0.01);

}  // namespace neurocoarse
