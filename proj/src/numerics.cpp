#include "neurocoarse/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "neurocoarse/rng.hpp"

namespace neurocoarse {

namespace {

constexpr double kEpsPhysLo = 1e-3;
constexpr double kEpsPhysHi = 0.499;

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

DerivativeEstimate dphi_dp(const CoarseMap& map, double p, double epsilon,
                           const ContinuationConfig& cfg,
                           std::uint64_t cluster_seed) {
  const double d = cfg.fd_delta;
  const double lo = std::max(0.0, p - d);
  const double hi = std::min(1.0, p + d);
  const CoarseResult rlo = map.evaluate(lo, epsilon, cluster_seed);
  const CoarseResult rhi = map.evaluate(hi, epsilon, cluster_seed);
  DerivativeEstimate est;
  est.lambda = (rhi.mean_p - rlo.mean_p) / (hi - lo);
  const double se = std::sqrt(rhi.std_error * rhi.std_error +
                              rlo.std_error * rlo.std_error);
  est.noisy = std::abs(rhi.mean_p - rlo.mean_p) < 4.0 * se;
  return est;
}

double dphi_depsilon(const CoarseMap& map, double p, double epsilon,
                     const ContinuationConfig& cfg,
                     std::uint64_t cluster_seed) {
  const double d = cfg.fd_delta;
  const double lo = std::max(kEpsPhysLo, epsilon - d);
  const double hi = std::min(kEpsPhysHi, epsilon + d);
  const CoarseResult rlo = map.evaluate(p, lo, cluster_seed);
  const CoarseResult rhi = map.evaluate(p, hi, cluster_seed);
  return (rhi.mean_p - rlo.mean_p) / (hi - lo);
}

BranchPoint newton_solve(const CoarseMap& map, double p_guess, double epsilon,
                         const ContinuationConfig& cfg,
                         std::uint64_t cluster_seed) {
  double p = clamp01(p_guess);
  double g = 0;
  for (int iter = 0; iter <= cfg.max_newton_iters; ++iter) {
    const CoarseResult r = map.evaluate(p, epsilon, cluster_seed);
    g = p - r.mean_p;
    if (std::abs(g) <= cfg.newton_tol) {
      const DerivativeEstimate deriv = dphi_dp(map, p, epsilon, cfg, cluster_seed);
      BranchPoint bp;
      bp.epsilon = epsilon;
      bp.p_star = p;
      bp.lambda = deriv.lambda;
      bp.stable = std::abs(deriv.lambda) < 1.0;
      bp.residual = std::abs(g);
      return bp;
    }
    if (iter == cfg.max_newton_iters) break;
    const DerivativeEstimate deriv = dphi_dp(map, p, epsilon, cfg, cluster_seed);
    const double gp = 1.0 - deriv.lambda;
    if (std::abs(gp) < 1e-3) throw SingularDerivative(deriv.lambda);
    double step = g / gp;
    double next = p - step;
    int halved = 0;
    while ((next < 0.0 || next > 1.0) && halved < 60) {
      step *= 0.5;
      next = p - step;
      ++halved;
    }
    p = clamp01(next);
  }
  throw NewtonNoConvergence(p, g);
}

namespace {

struct Tangent {
  double dp = 0, de = 0;
};

Tangent secant_tangent(const BranchPoint& a, const BranchPoint& b) {
  Tangent t{b.p_star - a.p_star, b.epsilon - a.epsilon};
  const double norm = std::hypot(t.dp, t.de);
  if (norm < 1e-14) return t;
  t.dp /= norm;
  t.de /= norm;
  return t;
}

// Newton on {G, N} from the predicted point. The Jacobian uses one-sided
// differences sharing the center evaluation (3 map calls per iteration); the
// emitted lambda is re-measured with the central-difference rule at the
// accepted location.
bool bordered_correct(const CoarseMap& map, const ContinuationConfig& cfg,
                      const BranchPoint& anchor, const Tangent& t, double ds,
                      double p, double e, std::uint64_t cluster_seed,
                      BranchPoint& out) {
  for (int iter = 0; iter <= cfg.max_newton_iters; ++iter) {
    const CoarseResult r = map.evaluate(p, e, cluster_seed);
    const double g = p - r.mean_p;
    const double nres = t.dp * (p - anchor.p_star) +
                        t.de * (e - anchor.epsilon) - ds;
    if (std::abs(g) <= cfg.newton_tol && std::abs(nres) <= cfg.newton_tol) {
      const DerivativeEstimate deriv = dphi_dp(map, p, e, cfg, cluster_seed);
      out.epsilon = e;
      out.p_star = p;
      out.lambda = deriv.lambda;
      out.stable = std::abs(deriv.lambda) < 1.0;
      out.residual = std::abs(g);
      return true;
    }
    if (iter == cfg.max_newton_iters) break;
    const double dp_step = p + cfg.fd_delta <= 1.0 ? cfg.fd_delta : -cfg.fd_delta;
    const double de_step =
        e + cfg.fd_delta <= kEpsPhysHi ? cfg.fd_delta : -cfg.fd_delta;
    const double phi_p =
        (map.evaluate(p + dp_step, e, cluster_seed).mean_p - r.mean_p) / dp_step;
    const double phi_e =
        (map.evaluate(p, e + de_step, cluster_seed).mean_p - r.mean_p) / de_step;
    const double a = 1.0 - phi_p, b = -phi_e;
    const double c = t.dp, d = t.de;
    const double det = a * d - b * c;
    if (std::abs(det) < 1e-12) return false;
    const double dp = (-g * d + b * nres) / det;
    const double de = (-a * nres + g * c) / det;
    p = clamp01(p + dp);
    e = std::clamp(e + de, kEpsPhysLo, kEpsPhysHi);
  }
  return false;
}

}  // namespace

Branch arclength_trace(const CoarseMap& map, const BranchPoint& seed_a,
                       const BranchPoint& seed_b,
                       const ContinuationConfig& cfg) {
  Branch br;
  br.points.push_back(seed_a);
  BranchPoint b = seed_b;
  if (std::abs(b.epsilon - seed_a.epsilon) < 1e-12) {
    // coincident parameter values leave the secant undefined; displace the
    // second seed a tenth of a step in eps and re-solve
    b = newton_solve(map, b.p_star, seed_a.epsilon + cfg.delta_s / 10.0, cfg,
                     rng::derive(cfg.seed, 0xB00));
  }
  br.points.push_back(b);

  Tangent t = secant_tangent(br.points[br.points.size() - 2], br.points.back());
  if (std::hypot(t.dp, t.de) < 0.5) {
    br.aborted = true;  // seeds coincide entirely
    return br;
  }

  double step = cfg.delta_s;
  int step_index = 0;
  while (static_cast<int>(br.points.size()) < cfg.max_points) {
    ++step_index;
    const std::uint64_t cluster = rng::derive(cfg.seed, step_index);
    const BranchPoint& last = br.points.back();
    const double p_pred = clamp01(last.p_star + step * t.dp);
    const double e_pred =
        std::clamp(last.epsilon + step * t.de, kEpsPhysLo, kEpsPhysHi);
    BranchPoint next;
    if (bordered_correct(map, cfg, last, t, step, p_pred, e_pred, cluster,
                         next)) {
      br.points.push_back(next);
      t = secant_tangent(br.points[br.points.size() - 2], br.points.back());
      step = cfg.delta_s;
      if (next.epsilon < cfg.epsilon_min || next.epsilon > cfg.epsilon_max)
        break;
    } else {
      step *= 0.5;
      if (step < cfg.delta_s / 16.0 * (1.0 - 1e-12)) {
        br.aborted = true;
        break;
      }
    }
  }
  return br;
}

std::vector<CriticalPoint> locate_critical_points(const Branch& branch) {
  const auto& pts = branch.points;
  std::vector<CriticalPoint> out;
  if (pts.size() < 3) return out;

  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    const double d1 = pts[i].epsilon - pts[i - 1].epsilon;
    const double d2 = pts[i + 1].epsilon - pts[i].epsilon;
    if (d1 * d2 < 0) {
      // eps(x) through x = -1, 0, 1; vertex of the parabola
      const double alpha =
          0.5 * (pts[i - 1].epsilon + pts[i + 1].epsilon) - pts[i].epsilon;
      const double beta = 0.5 * (pts[i + 1].epsilon - pts[i - 1].epsilon);
      double eps_fold = pts[i].epsilon;
      if (std::abs(alpha) > 1e-15)
        eps_fold = pts[i].epsilon - beta * beta / (4.0 * alpha);
      out.push_back({CriticalPoint::Kind::fold, eps_fold});
    }
  }

  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (std::abs(pts[i].p_star) > 1e-9 || std::abs(pts[i + 1].p_star) > 1e-9)
      continue;
    const double f1 = 1.0 - pts[i].lambda;
    const double f2 = 1.0 - pts[i + 1].lambda;
    if (f1 * f2 < 0) {
      const double dlam = pts[i + 1].lambda - pts[i].lambda;
      const double eps_tc =
          pts[i].epsilon +
          f1 * (pts[i + 1].epsilon - pts[i].epsilon) / dlam;
      out.push_back({CriticalPoint::Kind::transcritical, eps_tc});
    }
  }
  return out;
}

}  // namespace neurocoarse
