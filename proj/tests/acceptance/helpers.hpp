#pragma once

#include <cmath>
#include <cstdio>
#include <vector>

#include "neurocoarse/coarse.hpp"
#include "neurocoarse/graph.hpp"
#include "neurocoarse/micro.hpp"
#include "neurocoarse/numerics.hpp"
#include "neurocoarse/parallel.hpp"

namespace acceptance {

using namespace neurocoarse;

inline void report(int criterion, const char* name, bool pass,
                   const std::string& detail) {
  std::printf("[criterion %d] %-28s %s  (%s)\n", criterion, name,
              pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

// one paper-scale graph shared by the heavy criteria
inline const Network& paper_network() {
  static const Network net = generate_regular_graph(20000, 4, 42);
  return net;
}

// long-run density of one realization; mean and spread over the tail third
struct LongRunLevel {
  double mean = 0;
  double se = 0;  // standard error over realizations
};

inline LongRunLevel long_run_level(const Network& net, double epsilon,
                                   double p0, int steps, int realizations,
                                   std::uint64_t seed) {
  const FlipTable table(net.degree, epsilon);
  std::vector<double> levels(realizations);
  parallel_for(realizations, 0, [&](std::size_t r) {
    rng::Stream rs(rng::derive(seed, r));
    MicroState state = random_lift(p0, net, rs);
    MicroState next(state.size());
    double acc = 0;
    int count = 0;
    int active = 0;
    for (int t = 1; t <= steps; ++t) {
      active = synchronous_step_into(next, state, net, table, rs);
      state.swap(next);
      if (3 * t > 2 * steps) {
        acc += static_cast<double>(active) / net.n_neurons;
        ++count;
      }
    }
    levels[r] = acc / count;
  });
  LongRunLevel out;
  for (const double v : levels) out.mean += v;
  out.mean /= realizations;
  double ss = 0;
  for (const double v : levels) ss += (v - out.mean) * (v - out.mean);
  out.se = std::sqrt(ss / (realizations - 1) / realizations);
  return out;
}

// newton seed from a settled direct simulation, as the front end does it
inline double settle(const Network& net, double epsilon, double p0, int steps,
                     std::uint64_t seed) {
  const FlipTable table(net.degree, epsilon);
  rng::Stream rs(seed);
  MicroState state = random_lift(p0, net, rs);
  MicroState next(state.size());
  double acc = 0;
  int count = 0;
  int active = 0;
  for (int t = 1; t <= steps; ++t) {
    active = synchronous_step_into(next, state, net, table, rs);
    state.swap(next);
    if (3 * t > 2 * steps) {
      acc += static_cast<double>(active) / net.n_neurons;
      ++count;
    }
  }
  return acc / count;
}

// bisection for the unstable fixed point between the all-off basin and the
// node, on a single seed so the drift is a fixed function
inline double bisect_unstable(const CoarseMap& map, double epsilon,
                              double p_node, std::uint64_t seed) {
  auto g = [&](double p) { return p - map.evaluate(p, epsilon, seed).mean_p; };
  double lo = 0.05;
  double hi = 0.92 * p_node;
  if (!(g(lo) > 0 && g(hi) < 0))
    throw std::runtime_error("bisect_unstable: bracket failed");
  for (int it = 0; it < 24 && hi - lo > 1e-4; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace acceptance
