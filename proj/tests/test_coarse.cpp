#include <doctest.h>

#include <cmath>

#include "neurocoarse/coarse.hpp"
#include "neurocoarse/graph.hpp"

using namespace neurocoarse;

TEST_CASE("the absorbing state maps to itself with zero spread") {
  const Network net = generate_regular_graph(1000, 4, 1);
  EnsembleConfig cfg;
  cfg.copies = 50;
  cfg.horizon_T = 5;
  for (const double eps : {0.1, 0.3}) {
    const CoarseResult r = coarse_timestep(0.0, eps, net, cfg);
    CHECK(r.mean_p == 0.0);
    CHECK(r.std_error == 0.0);
    for (const double p : r.per_copy_p) CHECK(p == 0.0);
    REQUIRE(r.observables_T.has_value());
    CHECK(r.observables_T->rho00 == 1.0);
  }
}

TEST_CASE("one step from all-active: mean is 1 - eps") {
  const Network net = generate_regular_graph(1000, 4, 2);
  EnsembleConfig cfg;
  cfg.copies = 2000;
  cfg.horizon_T = 1;
  cfg.master_seed = 5;
  const double eps = 0.25;
  const CoarseResult r = coarse_timestep(1.0, eps, net, cfg);
  CHECK(std::abs(r.mean_p - (1.0 - eps)) <= 4.0 * r.std_error);
}

TEST_CASE("bit-identical results for any thread count") {
  const Network net = generate_regular_graph(500, 4, 3);
  for (const LiftMode mode : {LiftMode::uniform, LiftMode::manifold}) {
    EnsembleConfig cfg;
    cfg.copies = 40;
    cfg.horizon_T = 3;
    cfg.master_seed = 77;
    cfg.lift_mode = mode;
    cfg.threads = 1;
    const CoarseResult a = coarse_timestep(0.5, 0.2, net, cfg);
    cfg.threads = 2;
    const CoarseResult b = coarse_timestep(0.5, 0.2, net, cfg);
    CHECK(a.per_copy_p == b.per_copy_p);
    CHECK(a.mean_p == b.mean_p);
  }
}

TEST_CASE("standard error scales like 1/sqrt(copies)") {
  const Network net = generate_regular_graph(2000, 4, 4);
  EnsembleConfig cfg;
  cfg.horizon_T = 3;
  cfg.master_seed = 9;
  cfg.copies = 100;
  const double se100 = coarse_timestep(0.6, 0.3, net, cfg).std_error;
  cfg.copies = 400;
  const double se400 = coarse_timestep(0.6, 0.3, net, cfg).std_error;
  const double ratio = se100 / se400;
  CHECK(ratio > 2.0 * 0.8);
  CHECK(ratio < 2.0 * 1.2);
}

TEST_CASE("manifold and uniform lifts agree better as the horizon grows") {
  // near the stable state the coarse map contracts, so the lift-induced
  // difference heals; near the unstable point it would grow instead
  const Network net = generate_regular_graph(5000, 4, 5);
  const double eps = 0.14, p0 = 0.80;
  double gap[3];
  double se[3];
  int idx = 0;
  for (const int T : {1, 3, 5}) {
    EnsembleConfig uni;
    uni.copies = 400;
    uni.horizon_T = T;
    uni.master_seed = 21;
    uni.record_observables = false;
    EnsembleConfig man = uni;
    man.lift_mode = LiftMode::manifold;
    const CoarseResult ru = coarse_timestep(p0, eps, net, uni);
    const CoarseResult rm = coarse_timestep(p0, eps, net, man);
    gap[idx] = std::abs(ru.mean_p - rm.mean_p);
    se[idx] = std::hypot(ru.std_error, rm.std_error);
    ++idx;
  }
  CHECK(gap[1] <= gap[0] + 2.0 * std::hypot(se[0], se[1]));
  CHECK(gap[2] <= gap[1] + 2.0 * std::hypot(se[1], se[2]));
}

TEST_CASE("fresh graph per copy is supported") {
  const Network net = generate_regular_graph(200, 4, 6);
  EnsembleConfig cfg;
  cfg.copies = 8;
  cfg.horizon_T = 2;
  cfg.graph_policy = GraphPolicy::fresh_per_copy;
  const CoarseResult r = coarse_timestep(0.5, 0.3, net, cfg);
  CHECK(r.per_copy_p.size() == 8);
}

TEST_CASE("lifting non-convergence surfaces as a warning") {
  const Network net = generate_regular_graph(2000, 4, 7);
  EnsembleConfig cfg;
  cfg.copies = 50;
  cfg.horizon_T = 2;
  cfg.lift_mode = LiftMode::manifold;
  cfg.manifold.k_max = 1;
  cfg.manifold.moment_tol = 1e-9;
  const CoarseResult r = coarse_timestep(0.5, 0.2, net, cfg);
  CHECK(r.lift_warning);
}

TEST_CASE("phase portrait: degenerate and invalid targets") {
  const Network net = generate_regular_graph(500, 4, 8);
  SUBCASE("p0 = 1 has the single feasible target rho11 = 1") {
    const double target = 1.0;
    const auto series =
        phase_portrait(1.0, std::span(&target, 1), 0.2, net, 3, 20, 1);
    REQUIRE(series.size() == 1);
    CHECK(series[0].points.size() == 4);
    CHECK(series[0].points[0].p == 1.0);
    CHECK(series[0].points[0].rho10 == 0.0);
  }
  SUBCASE("a target above p0 is rejected up front") {
    const double target = 0.6;
    CHECK_THROWS_AS(
        phase_portrait(0.5, std::span(&target, 1), 0.2, net, 3, 20, 1),
        std::invalid_argument);
  }
}

TEST_CASE("phase portrait conditions the initial pair density") {
  const Network net = generate_regular_graph(5000, 4, 9);
  const std::vector<double> targets{0.30, 0.36, 0.42};
  const auto series =
      phase_portrait(0.6, targets, 0.2, net, 2, 30, 77, AnnealSchedule{});
  REQUIRE(series.size() == 3);
  for (std::size_t s = 0; s < 3; ++s) {
    // rho10 = p - rho11 exactly, so the t = 0 row reflects the target
    const double rho10_expected = 0.6 - targets[s];
    CHECK(std::abs(series[s].points[0].rho10 - rho10_expected) <= 2e-3);
    CHECK(series[s].points[0].t == 0);
    CHECK(series[s].series_id == static_cast<int>(s));
  }
}
