#include "neurocoarse/rare_events.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "neurocoarse/errors.hpp"
#include "neurocoarse/parallel.hpp"
#include "neurocoarse/rng.hpp"

namespace neurocoarse {

DriftDiffusionProfile estimate_drift_diffusion(const CoarseMap& map,
                                               double p_node,
                                               std::span<const double> psi_grid,
                                               double epsilon, int delta_T,
                                               std::uint64_t seed) {
  if (psi_grid.empty())
    throw std::invalid_argument("estimate_drift_diffusion: empty grid");
  if (delta_T < 1)
    throw std::invalid_argument("estimate_drift_diffusion: delta_T >= 1");
  for (std::size_t j = 0; j < psi_grid.size(); ++j) {
    if (j > 0 && !(psi_grid[j] > psi_grid[j - 1]))
      throw std::invalid_argument(
          "estimate_drift_diffusion: grid must be strictly increasing");
    const double p = p_node + psi_grid[j];
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument(
          "estimate_drift_diffusion: p_node + psi outside [0, 1]");
  }

  DriftDiffusionProfile prof;
  prof.p_node = p_node;
  prof.psi.assign(psi_grid.begin(), psi_grid.end());
  prof.delta_T = delta_T;
  prof.drift.resize(psi_grid.size());
  prof.diffusion.resize(psi_grid.size());

  for (std::size_t j = 0; j < psi_grid.size(); ++j) {
    const CoarseResult res =
        map.evaluate(p_node + psi_grid[j], epsilon, rng::derive(seed, j));
    const auto m = static_cast<double>(res.per_copy_p.size());
    prof.copies = static_cast<int>(res.per_copy_p.size());
    double sum = 0;
    for (const double p : res.per_copy_p) sum += p - res.p0_realized;
    const double mean = sum / m;
    double ss = 0;
    for (const double p : res.per_copy_p) {
      const double d = (p - res.p0_realized) - mean;
      ss += d * d;
    }
    const double var = m > 1 ? ss / (m - 1) : 0.0;
    prof.drift[j] = mean / delta_T;
    if (var > 0) {
      prof.diffusion[j] = var / (2.0 * delta_T);
    } else {
      prof.diffusion[j] = std::numeric_limits<double>::min();
      prof.diffusion_floored = true;
    }
  }
  return prof;
}

DriftDiffusionProfile estimate_drift_diffusion(double p_node,
                                               std::span<const double> psi_grid,
                                               double epsilon,
                                               const Network& net, int delta_T,
                                               int copies,
                                               const ManifoldLiftConfig& lift,
                                               std::uint64_t seed,
                                               int threads) {
  EnsembleConfig cfg;
  cfg.copies = copies;
  cfg.horizon_T = delta_T;
  cfg.lift_mode = LiftMode::manifold;
  cfg.manifold = lift;
  cfg.record_observables = false;
  cfg.threads = threads;
  const NetworkCoarseMap map(net, cfg);
  return estimate_drift_diffusion(map, p_node, psi_grid, epsilon, delta_T,
                                  seed);
}

void free_energy(DriftDiffusionProfile& prof) {
  const std::size_t n0 = prof.psi.size();
  if (n0 < 2 || prof.drift.size() != n0 || prof.diffusion.size() != n0)
    throw std::invalid_argument("free_energy: drift/diffusion not populated");

  // make sure psi = 0 is a grid point; quadrature anchors there
  std::size_t zero = n0;
  for (std::size_t j = 0; j < n0; ++j)
    if (prof.psi[j] == 0.0) zero = j;
  if (zero == n0) {
    if (prof.psi.front() > 0.0 || prof.psi.back() < 0.0)
      throw std::invalid_argument("free_energy: grid does not bracket psi = 0");
    std::size_t hi = 1;
    while (prof.psi[hi] < 0.0) ++hi;
    const double w =
        (0.0 - prof.psi[hi - 1]) / (prof.psi[hi] - prof.psi[hi - 1]);
    const double u0 = prof.drift[hi - 1] + w * (prof.drift[hi] - prof.drift[hi - 1]);
    const double d0 =
        prof.diffusion[hi - 1] + w * (prof.diffusion[hi] - prof.diffusion[hi - 1]);
    prof.psi.insert(prof.psi.begin() + hi, 0.0);
    prof.drift.insert(prof.drift.begin() + hi, u0);
    prof.diffusion.insert(prof.diffusion.begin() + hi, d0);
    zero = hi;
  }

  const std::size_t n = prof.psi.size();
  std::vector<double> ratio(n);
  for (std::size_t j = 0; j < n; ++j) ratio[j] = prof.drift[j] / prof.diffusion[j];

  std::vector<double> integral(n, 0.0);
  for (std::size_t j = zero + 1; j < n; ++j)
    integral[j] = integral[j - 1] + 0.5 * (ratio[j - 1] + ratio[j]) *
                                        (prof.psi[j] - prof.psi[j - 1]);
  for (std::size_t j = zero; j-- > 0;)
    integral[j] = integral[j + 1] - 0.5 * (ratio[j] + ratio[j + 1]) *
                                        (prof.psi[j + 1] - prof.psi[j]);

  prof.free_energy.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    prof.free_energy[j] = -integral[j] + std::log(prof.diffusion[j]);
  const double floor =
      *std::min_element(prof.free_energy.begin(), prof.free_energy.end());
  for (double& g : prof.free_energy) g -= floor;
}

EscapeEstimate kramers_escape_time(const DriftDiffusionProfile& prof) {
  const std::size_t n = prof.psi.size();
  if (prof.free_energy.size() != n || n < 3)
    throw std::invalid_argument("kramers_escape_time: free energy not computed");

  const auto& g = prof.free_energy;
  const std::size_t i_st =
      std::min_element(g.begin(), g.end()) - g.begin();
  const std::size_t i_un =
      std::max_element(g.begin(), g.end()) - g.begin();
  if (i_st == 0 || i_st == n - 1)
    throw std::invalid_argument(
        "kramers_escape_time: free-energy minimum (stable point) sits on the "
        "grid edge; extend the grid");
  if (i_un == 0 || i_un == n - 1)
    throw std::invalid_argument(
        "kramers_escape_time: free-energy maximum (unstable point) sits on "
        "the grid edge; extend the grid");

  EscapeEstimate est;
  est.method = EscapeEstimate::Method::kramers;
  est.psi_stable = prof.psi[i_st];
  est.psi_unstable = prof.psi[i_un];
  est.barrier_warning = (g[i_un] - g[i_st]) < 2.0;

  // shift by the well value; any constant added to bG moves the shift by the
  // same amount, so tau is exactly shift-invariant
  const double shift = g[i_st];

  const std::size_t lo = std::min(i_st, i_un);
  const std::size_t hi = std::max(i_st, i_un);
  double outer = 0;
  for (std::size_t j = lo + 1; j <= hi; ++j)
    outer += 0.5 *
             (std::exp(g[j - 1] - shift) + std::exp(g[j] - shift)) *
             (prof.psi[j] - prof.psi[j - 1]);

  // well-side integral: from the barrier to the grid end holding the well
  std::size_t wlo, whi;
  if (i_un < i_st) {
    wlo = i_un;
    whi = n - 1;
  } else {
    wlo = 0;
    whi = i_un;
  }
  double inner = 0;
  for (std::size_t j = wlo + 1; j <= whi; ++j) {
    const double f1 = std::exp(-(g[j - 1] - shift)) / prof.diffusion[j - 1];
    const double f2 = std::exp(-(g[j] - shift)) / prof.diffusion[j];
    inner += 0.5 * (f1 + f2) * (prof.psi[j] - prof.psi[j - 1]);
  }

  est.tau = outer * inner;
  return est;
}

EscapeEstimate direct_mfpt(double p_start, double epsilon, const Network& net,
                           double exit_threshold, int escapes,
                           long long max_steps, std::uint64_t seed,
                           int threads) {
  if (escapes < 1)
    throw std::invalid_argument("direct_mfpt: need escapes >= 1");
  if (!(exit_threshold > 0.0 && exit_threshold < 1.0))
    throw std::invalid_argument("direct_mfpt: exit_threshold outside (0, 1)");
  const FlipTable table(net.degree, epsilon);
  const int n = net.n_neurons;
  const long long exit_count =
      static_cast<long long>(std::ceil(exit_threshold * n));  // p < threshold

  std::vector<long long> times(escapes, -1);
  parallel_for(escapes, threads, [&](std::size_t r) {
    rng::Stream rs(rng::derive(seed, r));
    MicroState state = random_lift(p_start, net, rs);
    long long active = std::llround(p_start * n);
    if (active < exit_count) {
      times[r] = 0;
      return;
    }
    MicroState next(state.size());
    for (long long t = 1; t <= max_steps; ++t) {
      active = synchronous_step_into(next, state, net, table, rs);
      state.swap(next);
      if (active < exit_count) {
        times[r] = t;
        return;
      }
    }
  });

  EscapeEstimate est;
  est.method = EscapeEstimate::Method::direct;
  long long observed = 0;
  double sum = 0;
  for (const long long t : times) {
    if (t < 0) {
      ++est.censored;
    } else {
      ++observed;
      sum += static_cast<double>(t);
    }
  }
  if (observed == 0)
    throw AllRunsCensored(
        "direct_mfpt: every run was censored at max_steps");
  est.tau = sum / static_cast<double>(observed);
  return est;
}

}  // namespace neurocoarse
