#include <doctest.h>

#include <cmath>
#include <vector>

#include "neurocoarse/graph.hpp"
#include "neurocoarse/rare_events.hpp"
#include "support/surrogates.hpp"

using namespace neurocoarse;
using neurocoarse::testing::DoubleWell;
using neurocoarse::testing::OUMap;
using neurocoarse::testing::direct_escape_time_1d;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

DriftDiffusionProfile closed_form_profile(const DoubleWell& dw, double lo,
                                          double hi, int n) {
  DriftDiffusionProfile prof;
  prof.p_node = dw.x_node;
  prof.psi = linspace(lo, hi, n);
  prof.copies = 0;
  prof.delta_T = 1;
  for (const double psi : prof.psi) {
    prof.drift.push_back(dw.drift(dw.x_node + psi));
    prof.diffusion.push_back(dw.D0);
  }
  return prof;
}

}  // namespace

TEST_CASE("OU surrogate: drift slope and diffusion recovered within 5%") {
  const double kappa = 0.1, D0 = 1e-5;
  const OUMap map(0.5, kappa, D0, 100000);
  const std::vector<double> grid = linspace(-0.1, 0.1, 21);
  const DriftDiffusionProfile prof =
      estimate_drift_diffusion(map, 0.5, grid, 0.1, 1, 99);

  // least-squares slope of u against psi
  double sxx = 0, sxy = 0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    sxx += grid[j] * grid[j];
    sxy += grid[j] * prof.drift[j];
  }
  const double slope = sxy / sxx;
  CHECK(std::abs(slope - (-kappa)) <= 0.05 * kappa);

  double mean_d = 0;
  for (const double d : prof.diffusion) {
    CHECK(d > 0.0);
    mean_d += d;
  }
  mean_d /= static_cast<double>(prof.diffusion.size());
  CHECK(std::abs(mean_d - D0) <= 0.05 * D0);

  // zero drift at the fixed point, within 3 standard errors of the mean
  const double se_u = std::sqrt(2.0 * D0 / 100000.0);
  CHECK(std::abs(prof.drift[10]) <= 3.0 * se_u);
}

TEST_CASE("OU free energy is the quadratic well kappa psi^2 / (2 D0)") {
  const double kappa = 0.1, D0 = 1e-5;
  const OUMap map(0.5, kappa, D0, 100000);
  const std::vector<double> grid = linspace(-0.1, 0.1, 21);
  DriftDiffusionProfile prof =
      estimate_drift_diffusion(map, 0.5, grid, 0.1, 1, 17);
  free_energy(prof);
  REQUIRE(prof.free_energy.size() == prof.psi.size());
  // curvature read at the endpoints relative to the minimum
  const double expect = kappa * 0.1 * 0.1 / (2.0 * D0);
  const double min_g =
      *std::min_element(prof.free_energy.begin(), prof.free_energy.end());
  CHECK(min_g == 0.0);
  CHECK(std::abs(prof.free_energy.front() - expect) <= 0.05 * expect);
  CHECK(std::abs(prof.free_energy.back() - expect) <= 0.05 * expect);
}

TEST_CASE("constant drift-free profile normalizes to zero free energy") {
  DriftDiffusionProfile prof;
  prof.p_node = 0.5;
  prof.psi = linspace(-0.2, 0.2, 11);
  prof.drift.assign(11, 0.0);
  prof.diffusion.assign(11, 3e-4);
  free_energy(prof);
  for (const double g : prof.free_energy) CHECK(g == doctest::Approx(0.0));
}

TEST_CASE("free energy inserts psi = 0 when the grid lacks it") {
  DriftDiffusionProfile prof;
  prof.p_node = 0.5;
  prof.psi = {-0.15, -0.05, 0.05, 0.15};
  prof.drift = {0.01, 0.01, -0.01, -0.01};
  prof.diffusion.assign(4, 1e-4);
  free_energy(prof);
  CHECK(prof.psi.size() == 5);
  CHECK(prof.psi[2] == 0.0);
  CHECK(prof.free_energy.size() == 5);

  DriftDiffusionProfile off;
  off.p_node = 0.5;
  off.psi = {0.1, 0.2};
  off.drift = {0.0, 0.0};
  off.diffusion = {1e-4, 1e-4};
  CHECK_THROWS_AS(free_energy(off), std::invalid_argument);
}

TEST_CASE("kramers escape requires interior extrema") {
  DriftDiffusionProfile prof;
  prof.p_node = 0.5;
  prof.psi = linspace(-0.2, 0.2, 11);
  for (const double psi : prof.psi) {
    prof.drift.push_back(-0.05 * psi);  // single well, no barrier
    prof.diffusion.push_back(1e-4);
  }
  free_energy(prof);
  CHECK_THROWS_WITH_AS(kramers_escape_time(prof),
                       doctest::Contains("maximum"), std::invalid_argument);
}

TEST_CASE("kramers time is exactly invariant under free-energy shifts") {
  const DoubleWell dw;
  DriftDiffusionProfile prof = closed_form_profile(dw, -0.14, 0.035, 41);
  free_energy(prof);
  const double tau = kramers_escape_time(prof).tau;
  for (double& g : prof.free_energy) g += 37.5;
  const double tau_shifted = kramers_escape_time(prof).tau;
  CHECK(std::abs(tau_shifted - tau) <= 1e-12 * tau);
}

TEST_CASE("double well: kramers within 20% of the direct 1-d simulation") {
  DoubleWell dw;  // wells at 0.4 and 0.6, barrier at 0.5, barrier height 5 D0
  // escape from the lower well (psi = -w) over the barrier at psi = 0:
  // grid spans past the barrier on the right, deep into the well on the left
  DriftDiffusionProfile prof = closed_form_profile(dw, -0.14, 0.035, 41);
  free_energy(prof);
  const EscapeEstimate est = kramers_escape_time(prof);
  CHECK(est.psi_stable == doctest::Approx(-dw.w).epsilon(0.05));
  CHECK(est.psi_unstable == doctest::Approx(0.0).epsilon(0.05));
  CHECK(est.psi_stable < est.psi_unstable);
  CHECK_FALSE(est.barrier_warning);

  const double tau_direct =
      direct_escape_time_1d(dw, dw.x_node - dw.w, dw.x_node, 400, 2025);
  CHECK(est.tau == doctest::Approx(tau_direct).epsilon(0.20));

  // mirrored orientation: escape from the upper well, barrier below it
  DriftDiffusionProfile mirror = closed_form_profile(dw, -0.035, 0.14, 41);
  free_energy(mirror);
  const EscapeEstimate mest = kramers_escape_time(mirror);
  CHECK(mest.psi_stable == doctest::Approx(dw.w).epsilon(0.05));
  CHECK(mest.psi_unstable == doctest::Approx(0.0).epsilon(0.05));
  CHECK(mest.psi_unstable < mest.psi_stable);
  CHECK(mest.tau == doctest::Approx(tau_direct).epsilon(0.20));
}

TEST_CASE("kramers time is stable under grid refinement") {
  const DoubleWell dw;
  DriftDiffusionProfile coarse = closed_form_profile(dw, -0.14, 0.035, 41);
  DriftDiffusionProfile fine = closed_form_profile(dw, -0.14, 0.035, 81);
  free_energy(coarse);
  free_energy(fine);
  const double tc = kramers_escape_time(coarse).tau;
  const double tf = kramers_escape_time(fine).tau;
  CHECK(std::abs(tc - tf) <= 0.10 * tf);
}

TEST_CASE("a degenerate grid point floors the diffusion and sets the flag") {
  // the absorbing density has zero spread; the profile keeps a positive
  // (floored) diffusion entry instead of breaking the quadrature
  const Network net = generate_regular_graph(500, 4, 9);
  ManifoldLiftConfig lift;
  const std::vector<double> psi{-0.5, -0.25, 0.0};
  const DriftDiffusionProfile prof =
      estimate_drift_diffusion(0.5, psi, 0.2, net, 1, 50, lift, 4);
  CHECK(prof.diffusion_floored);
  CHECK(prof.diffusion[0] > 0.0);
  CHECK(prof.drift[0] == 0.0);
  CHECK(prof.diffusion[2] > 1e-8);
}

TEST_CASE("a shallow barrier raises the validity warning") {
  DriftDiffusionProfile prof;
  prof.p_node = 0.5;
  prof.psi = linspace(-0.3, 0.1, 9);
  prof.drift.assign(9, 0.0);  // unused once the free energy is present
  prof.diffusion.assign(9, 1e-4);
  prof.free_energy = {1.0, 1.2, 1.5, 1.2, 0.8, 0.4, 0.0, 0.2, 0.5};
  const EscapeEstimate est = kramers_escape_time(prof);
  CHECK(est.barrier_warning);  // barrier is 1.5 < 2
  CHECK(est.psi_unstable < est.psi_stable);
}

TEST_CASE("estimate_drift_diffusion validates its grid") {
  const OUMap map(0.5, 0.1, 1e-5, 100);
  const std::vector<double> bad{0.1, 0.1, 0.2};
  CHECK_THROWS_AS(estimate_drift_diffusion(map, 0.5, bad, 0.1, 1, 1),
                  std::invalid_argument);
  const std::vector<double> outside{0.4, 0.6};
  CHECK_THROWS_AS(estimate_drift_diffusion(map, 0.5, outside, 0.1, 1, 1),
                  std::invalid_argument);
}

TEST_CASE("direct_mfpt basics on the network model") {
  const Network net = generate_regular_graph(2000, 4, 12);
  SUBCASE("starting below the threshold escapes at step zero") {
    const EscapeEstimate est = direct_mfpt(0.0, 0.2, net, 0.05, 10, 100, 3);
    CHECK(est.tau == 0.0);
    CHECK(est.censored == 0);
    CHECK(est.method == EscapeEstimate::Method::direct);
  }
  SUBCASE("a stable attractor above the threshold censors every run") {
    CHECK_THROWS_AS(direct_mfpt(0.5, 0.4, net, 0.05, 5, 50, 4),
                    std::runtime_error);
  }
}
