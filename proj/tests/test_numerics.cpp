#include <doctest.h>

#include <cmath>

#include "neurocoarse/numerics.hpp"
#include "support/surrogates.hpp"

using namespace neurocoarse;
using neurocoarse::testing::AnalyticMap;

namespace {

ContinuationConfig fast_cfg() {
  ContinuationConfig cfg;
  cfg.newton_tol = 1e-9;
  cfg.fd_delta = 1e-4;
  cfg.epsilon_min = 0.02;
  cfg.epsilon_max = 0.45;
  return cfg;
}

}  // namespace

TEST_CASE("dphi_dp is exact on a linear map") {
  const AnalyticMap map([](double p, double) { return 0.5 * p; });
  ContinuationConfig cfg;
  cfg.fd_delta = 1e-2;
  const DerivativeEstimate est = dphi_dp(map, 0.4, 0.1, cfg, 1);
  CHECK(est.lambda == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_FALSE(est.noisy);
}

TEST_CASE("dphi_dp flags a difference buried in noise") {
  const AnalyticMap map([](double p, double) { return 0.5 * p; }, 0.0, 1.0);
  ContinuationConfig cfg;
  cfg.fd_delta = 1e-2;
  CHECK(dphi_dp(map, 0.4, 0.1, cfg, 1).noisy);
}

TEST_CASE("newton_solve on affine maps") {
  const ContinuationConfig cfg = fast_cfg();
  SUBCASE("contraction to zero") {
    const AnalyticMap map([](double p, double) { return 0.5 * p; });
    const BranchPoint bp = newton_solve(map, 0.7, 0.1, cfg);
    CHECK(bp.p_star == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(bp.lambda == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(bp.stable);
    CHECK(bp.residual <= cfg.newton_tol);
  }
  SUBCASE("p_guess = 0 on an absorbing map returns immediately") {
    const AnalyticMap map([](double p, double) { return 0.5 * p; });
    const BranchPoint bp = newton_solve(map, 0.0, 0.1, cfg);
    CHECK(bp.p_star == 0.0);
    CHECK(map.calls() == 3);  // one residual check plus the two-sided lambda
  }
  SUBCASE("interior fixed point") {
    const AnalyticMap map([](double p, double e) { return e + 0.5 * p; });
    const BranchPoint bp = newton_solve(map, 0.9, 0.15, cfg);
    CHECK(bp.p_star == doctest::Approx(0.30).epsilon(1e-9));
  }
}

TEST_CASE("newton_solve error paths") {
  const ContinuationConfig cfg = fast_cfg();
  SUBCASE("singular derivative near a fold") {
    const AnalyticMap map([](double p, double) { return p + 0.001; });
    CHECK_THROWS_AS(newton_solve(map, 0.5, 0.1, cfg), SingularDerivative);
  }
  SUBCASE("iteration budget exhausted") {
    ContinuationConfig tight = cfg;
    tight.max_newton_iters = 0;
    const AnalyticMap map([](double p, double) { return 0.5 * p; });
    CHECK_THROWS_AS(newton_solve(map, 0.9, 0.1, tight), NewtonNoConvergence);
  }
}

TEST_CASE("common random numbers: noisy map is solvable, fresh-seed residual stays small") {
  // noise keyed to the seed only; within one solve it is a constant offset
  const double amp = 4e-4;
  const AnalyticMap map([](double p, double e) { return e + 0.5 * p; }, amp);
  ContinuationConfig cfg = fast_cfg();
  cfg.newton_tol = 5e-4;
  const BranchPoint bp = newton_solve(map, 0.9, 0.15, cfg, 12345);
  CHECK(bp.residual <= cfg.newton_tol);
  // re-assert the fixed point on fresh seeds at 3x tolerance
  for (const std::uint64_t fresh : {777ull, 888ull, 999ull}) {
    const double g = bp.p_star - map.evaluate(bp.p_star, 0.15, fresh).mean_p;
    CHECK(std::abs(g) <= 3.0 * cfg.newton_tol);
  }
}

TEST_CASE("arclength on the exact line p = 2 eps") {
  const AnalyticMap map([](double p, double e) { return e + 0.5 * p; });
  ContinuationConfig cfg = fast_cfg();
  cfg.delta_s = 0.02;
  cfg.epsilon_max = 0.20;
  const BranchPoint a = newton_solve(map, 0.2, 0.10, cfg);
  const BranchPoint b = newton_solve(map, 0.2, 0.11, cfg);
  const Branch br = arclength_trace(map, a, b, cfg);
  CHECK_FALSE(br.aborted);
  CHECK(br.points.size() >= 8);
  for (const auto& bp : br.points) {
    CHECK(bp.p_star == doctest::Approx(2.0 * bp.epsilon).epsilon(1e-7));
    CHECK(bp.lambda == doctest::Approx(0.5).epsilon(1e-7));
  }
  CHECK(br.points.back().epsilon > 0.20);
  CHECK(locate_critical_points(br).empty());
}

TEST_CASE("arclength traces through a fold and reports it") {
  // fixed points p = c +- sqrt((b - eps)/a): fold at (eps, p) = (b, c)
  const double a_coef = 2.0, b_fold = 0.165, c_mid = 0.5;
  const AnalyticMap map([=](double p, double e) {
    return p + 0.5 * ((b_fold - e) - a_coef * (p - c_mid) * (p - c_mid));
  });
  ContinuationConfig cfg = fast_cfg();
  cfg.delta_s = 0.01;
  cfg.epsilon_min = 0.09;
  const double e0 = 0.12;
  const BranchPoint s1 =
      newton_solve(map, c_mid + std::sqrt((b_fold - e0) / a_coef), e0, cfg);
  const BranchPoint s2 = newton_solve(map, s1.p_star, e0 + 0.005, cfg);
  const Branch br = arclength_trace(map, s1, s2, cfg);
  REQUIRE(br.points.size() >= 10);

  // the branch turns: stability flips from the upper to the lower half
  CHECK(br.points.front().stable);
  CHECK_FALSE(br.points.back().stable);

  const auto cps = locate_critical_points(br);
  REQUIRE(cps.size() == 1);
  CHECK(cps[0].kind == CriticalPoint::Kind::fold);
  CHECK(cps[0].epsilon == doctest::Approx(b_fold).epsilon(0.02));

  // at the detected fold the eigenvalue interpolates through 1
  double closest = 1e9;
  double lam_at_fold = 0;
  for (const auto& bp : br.points) {
    if (std::abs(bp.epsilon - cps[0].epsilon) < closest) {
      closest = std::abs(bp.epsilon - cps[0].epsilon);
      lam_at_fold = bp.lambda;
    }
  }
  CHECK(std::abs(lam_at_fold - 1.0) <= 0.05);

  // tangent normalization is preserved along the branch
  for (std::size_t i = 1; i < br.points.size(); ++i) {
    const double dp = br.points[i].p_star - br.points[i - 1].p_star;
    const double de = br.points[i].epsilon - br.points[i - 1].epsilon;
    const double norm = std::hypot(dp, de);
    CHECK(norm > 0);
    CHECK(std::abs(dp / norm * (dp / norm) + de / norm * (de / norm) - 1.0) <=
          1e-10);
  }
}

TEST_CASE("transcritical detection on the p = 0 branch") {
  // lambda(eps) = eps / 0.22 crosses 1 at eps = 0.22
  const AnalyticMap map(
      [](double p, double e) { return (e / 0.22) * p + 0.3 * p * p; });
  ContinuationConfig cfg = fast_cfg();
  cfg.delta_s = 0.01;
  cfg.fd_delta = 1e-2;
  cfg.epsilon_max = 0.28;
  const BranchPoint s1 = newton_solve(map, 0.0, 0.18, cfg);
  const BranchPoint s2 = newton_solve(map, 0.0, 0.19, cfg);
  const Branch br = arclength_trace(map, s1, s2, cfg);
  for (const auto& bp : br.points) CHECK(std::abs(bp.p_star) <= 1e-12);
  const auto cps = locate_critical_points(br);
  REQUIRE(cps.size() == 1);
  CHECK(cps[0].kind == CriticalPoint::Kind::transcritical);
  // one-sided difference carries an O(fd_delta) bias through the quadratic term
  CHECK(cps[0].epsilon == doctest::Approx(0.22).epsilon(0.01));
}

TEST_CASE("corrector abort returns the partial branch") {
  // fixed points exist only for eps < 0.15; beyond the wall the corrector
  // cannot converge, so step halving runs out and the trace gives up
  const AnalyticMap map([](double p, double e) {
    if (e >= 0.15) return 10.0;
    return e + 0.5 * p;
  });
  ContinuationConfig cfg = fast_cfg();
  cfg.delta_s = 0.02;
  cfg.max_points = 60;
  const BranchPoint s1 = newton_solve(map, 0.2, 0.10, cfg);
  const BranchPoint s2 = newton_solve(map, 0.2, 0.11, cfg);
  const Branch br = arclength_trace(map, s1, s2, cfg);
  CHECK(br.aborted);
  CHECK(br.points.back().epsilon < 0.15);
  for (const auto& bp : br.points)
    CHECK(bp.p_star == doctest::Approx(2.0 * bp.epsilon).epsilon(1e-6));
}

TEST_CASE("locate_critical_points on hand-built branches") {
  Branch monotone;
  for (int i = 0; i < 6; ++i)
    monotone.points.push_back({0.1 + 0.01 * i, 0.2 + 0.01 * i, 0.5, true, 0});
  CHECK(locate_critical_points(monotone).empty());

  Branch two_point;
  two_point.points = {{0.1, 0.2, 0.5, true, 0}, {0.12, 0.22, 0.5, true, 0}};
  CHECK(locate_critical_points(two_point).empty());
}
