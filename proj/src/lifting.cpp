#include "neurocoarse/lifting.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "neurocoarse/parallel.hpp"

namespace neurocoarse {

namespace {

// Incremental pair/triple moment bookkeeping plus uniform sampling of
// active/inactive neurons. Pair identities reduce the pair level to the
// directed {11} count; triples aggregate per path center, so toggling v only
// touches v and its neighbors.
class MomentTracker {
 public:
  MomentTracker(MicroState& state, const Network& net, bool with_triples)
      : st_(&state), net_(&net), with_triples_(with_triples) {
    const int n = net.n_neurons;
    k_.assign(n, 0);
    pos_.assign(n, -1);
    active_.reserve(n);
    inactive_.reserve(n);
    for (int v = 0; v < n; ++v) {
      int k = 0;
      for (const std::int32_t w : net.neighbors(v)) k += state[w];
      k_[v] = k;
      if (state[v]) {
        n11_ += k;
        ++n_act_;
        pos_[v] = static_cast<int>(active_.size());
        active_.push_back(v);
      } else {
        pos_[v] = static_cast<int>(inactive_.size());
        inactive_.push_back(v);
      }
      if (with_triples_) center_update(state[v], k, +1);
    }
  }

  long long active_count() const { return n_act_; }
  long long inactive_count() const {
    return static_cast<long long>(st_->size()) - n_act_;
  }

  int pick_active(rng::Stream& rs) const {
    return active_[rs.below(static_cast<std::uint32_t>(active_.size()))];
  }
  int pick_inactive(rng::Stream& rs) const {
    return inactive_[rs.below(static_cast<std::uint32_t>(inactive_.size()))];
  }

  // toggle uniformly chosen surplus-side neurons until the count is m
  void pin_active_count(long long m, rng::Stream& rs) {
    while (n_act_ > m) flip(pick_active(rs));
    while (n_act_ < m) flip(pick_inactive(rs));
  }

  double density() const {
    return static_cast<double>(n_act_) / net_->n_neurons;
  }

  double rho11() const {
    return static_cast<double>(n11_) /
           (static_cast<double>(net_->n_neurons) * net_->degree);
  }

  TripleDensities triples() const {
    const double total = static_cast<double>(net_->n_neurons) * net_->degree *
                         (net_->degree - 1);
    TripleDensities out;
    for (int c = 0; c < 6; ++c) out[c] = static_cast<double>(tri_[c]) / total;
    return out;
  }

  double energy(const MomentTarget& target) const {
    double e2 = (rho11() - target.rho11) * (rho11() - target.rho11);
    if (target.triples) {
      const TripleDensities t = triples();
      for (int c = 0; c < 6; ++c)
        e2 += (t[c] - (*target.triples)[c]) * (t[c] - (*target.triples)[c]);
    }
    return std::sqrt(e2);
  }

  void flip(int v) {
    MicroState& st = *st_;
    const int s = st[v];
    if (with_triples_) {
      center_update(s, k_[v], -1);
      for (const std::int32_t w : net_->neighbors(v))
        center_update(st[w], k_[w], -1);
    }
    n11_ += s ? -2LL * k_[v] : 2LL * k_[v];
    st[v] = static_cast<std::uint8_t>(1 - s);
    n_act_ += s ? -1 : 1;
    const int dk = s ? -1 : 1;
    for (const std::int32_t w : net_->neighbors(v)) k_[w] += dk;
    if (with_triples_) {
      center_update(st[v], k_[v], +1);
      for (const std::int32_t w : net_->neighbors(v))
        center_update(st[w], k_[w], +1);
    }
    // move v between the index lists
    auto& from = s ? active_ : inactive_;
    auto& to = s ? inactive_ : active_;
    const int at = pos_[v];
    const int moved = from.back();
    from[at] = moved;
    pos_[moved] = at;
    from.pop_back();
    pos_[v] = static_cast<int>(to.size());
    to.push_back(v);
  }

 private:
  void center_update(int s_center, int k, int sign) {
    const int d = net_->degree;
    const long long both = static_cast<long long>(k) * (k - 1) * sign;
    const long long mixed = 2LL * k * (d - k) * sign;
    const long long none = static_cast<long long>(d - k) * (d - k - 1) * sign;
    if (s_center) {
      tri_[kTriple111] += both;
      tri_[kTriple110] += mixed;
      tri_[kTriple010] += none;
    } else {
      tri_[kTriple101] += both;
      tri_[kTriple100] += mixed;
      tri_[kTriple000] += none;
    }
  }

  MicroState* st_;
  const Network* net_;
  bool with_triples_;
  std::vector<int> k_;
  std::vector<int> pos_;
  std::vector<std::int32_t> active_, inactive_;
  long long n_act_ = 0;
  long long n11_ = 0;
  std::array<long long, 6> tri_{};
};

long long target_active_count(double p_target, int n) {
  if (!(p_target >= 0.0 && p_target <= 1.0))
    throw std::invalid_argument("lift: p_target outside [0, 1]");
  return std::llround(p_target * n);
}

AnnealResult anneal_with_tracker(MomentTracker& tracker,
                                 const MomentTarget& target,
                                 const AnnealSchedule& schedule, int n_neurons,
                                 rng::Stream& rs) {
  if (!(schedule.cooling_factor > 0.0 && schedule.cooling_factor < 1.0))
    throw std::invalid_argument("anneal: cooling_factor outside (0, 1)");
  if (schedule.initial_temp == 0.0)
    throw std::invalid_argument("anneal: initial_temp must be positive");

  AnnealResult res;
  double energy = tracker.energy(target);
  res.residual = energy;
  if (energy <= schedule.tolerance) return res;
  // degenerate densities have no legal swap
  if (tracker.active_count() == 0 || tracker.inactive_count() == 0) return res;

  double temp =
      schedule.initial_temp > 0 ? schedule.initial_temp : 0.1 * energy;
  const long long swaps =
      schedule.swaps_per_sweep > 0 ? schedule.swaps_per_sweep : n_neurons;
  for (int sweep = 0; sweep < schedule.sweeps; ++sweep) {
    res.sweeps_used = sweep + 1;
    for (long long j = 0; j < swaps; ++j) {
      const int a = tracker.pick_active(rs);
      const int b = tracker.pick_inactive(rs);
      tracker.flip(a);
      tracker.flip(b);
      const double cand = tracker.energy(target);
      ++res.proposals;
      bool accept = cand <= energy;
      if (!accept)
        accept = rs.uniform() < std::exp(-(cand - energy) / temp);
      if (accept) {
        ++res.accepted;
        if (cand > energy) ++res.uphill_accepted;
        energy = cand;
        if (energy <= schedule.tolerance) break;
      } else {
        tracker.flip(b);
        tracker.flip(a);
      }
    }
    if (energy <= schedule.tolerance) break;
    temp *= schedule.cooling_factor;
  }
  res.residual = energy;
  return res;
}

double target_distance(const MomentTarget& a, const MomentTarget& b) {
  double dist = std::abs(a.rho11 - b.rho11);
  if (a.triples && b.triples)
    for (int c = 0; c < 6; ++c)
      dist = std::max(dist, std::abs((*a.triples)[c] - (*b.triples)[c]));
  return dist;
}

// Ensemble fast variables read at the pin density: each fast variable is
// regressed on the per-copy density and evaluated at p_target. After a burst
// the copies sit on the slow manifold at their own densities, so the raw
// ensemble mean belongs to the post-burst density, not the pinned one;
// restricting to the raw value makes the outer loop converge as a damped
// oscillation. The regression correction vanishes at the loop's fixed point.
MomentTarget slope_corrected_target(
    const std::vector<std::optional<MomentTracker>>& trackers, double p_target,
    bool use_triples) {
  const int copies = static_cast<int>(trackers.size());
  std::vector<double> p(copies), rho(copies);
  std::vector<TripleDensities> tri(use_triples ? copies : 0);
  for (int i = 0; i < copies; ++i) {
    p[i] = trackers[i]->density();
    rho[i] = trackers[i]->rho11();
    if (use_triples) tri[i] = trackers[i]->triples();
  }
  double mean_p = 0;
  for (int i = 0; i < copies; ++i) mean_p += p[i];
  mean_p /= copies;
  double var_p = 0;
  for (int i = 0; i < copies; ++i) var_p += (p[i] - mean_p) * (p[i] - mean_p);

  auto at_target = [&](const auto& value_of) {
    double mean = 0;
    for (int i = 0; i < copies; ++i) mean += value_of(i);
    mean /= copies;
    if (var_p < 1e-12) return mean;
    double cov = 0;
    for (int i = 0; i < copies; ++i)
      cov += (p[i] - mean_p) * (value_of(i) - mean);
    return mean + cov / var_p * (p_target - mean_p);
  };

  MomentTarget out;
  out.rho11 = at_target([&](int i) { return rho[i]; });
  if (use_triples) {
    TripleDensities adj{};
    for (int c = 0; c < 6; ++c)
      adj[c] = at_target([&](int i) { return tri[i][c]; });
    out.triples = adj;
  }
  return out;
}

ManifoldEnsemble manifold_loop(std::vector<MicroState> states, double p_target,
                               double epsilon, const Network& net,
                               const ManifoldLiftConfig& cfg,
                               std::span<rng::Stream> streams, int threads) {
  if (cfg.dT < 1 || cfg.k_max < 1 || !(cfg.moment_tol > 0))
    throw std::invalid_argument("converge_to_manifold: bad config");
  const int copies = static_cast<int>(streams.size());
  if (copies < 1)
    throw std::invalid_argument("converge_to_manifold: need copies >= 1");
  const long long m = target_active_count(p_target, net.n_neurons);
  const FlipTable table(net.degree, epsilon);

  std::vector<std::optional<MomentTracker>> trackers(copies);
  parallel_for(copies, threads, [&](std::size_t i) {
    trackers[i].emplace(states[i], net, cfg.use_triples);
    trackers[i]->pin_active_count(m, streams[i]);
  });

  ManifoldEnsemble out;
  MomentTarget u_prev = slope_corrected_target(trackers, p_target, cfg.use_triples);
  for (int k = 1; k <= cfg.k_max; ++k) {
    out.iterations = k;
    parallel_for(copies, threads, [&](std::size_t i) {
      trackers[i].reset();  // the burst rewrites the whole state
      MicroState next(states[i].size());
      for (int t = 0; t < cfg.dT; ++t) {
        synchronous_step_into(next, states[i], net, table, streams[i]);
        states[i].swap(next);
      }
      trackers[i].emplace(states[i], net, cfg.use_triples);
    });
    const MomentTarget u_k =
        slope_corrected_target(trackers, p_target, cfg.use_triples);
    parallel_for(copies, threads, [&](std::size_t i) {
      trackers[i]->pin_active_count(m, streams[i]);
      anneal_with_tracker(*trackers[i], u_k, cfg.schedule, net.n_neurons,
                          streams[i]);
    });
    const double change = target_distance(u_k, u_prev);
    u_prev = u_k;
    if (change < cfg.moment_tol) {
      out.converged = true;
      break;
    }
  }
  out.states = std::move(states);
  out.manifold_estimate = u_prev;
  return out;
}

}  // namespace

MicroState random_lift(double p_target, const Network& net, rng::Stream& rs) {
  const int n = net.n_neurons;
  const long long m = target_active_count(p_target, n);
  MicroState state(n, 0);
  // partial Fisher-Yates: the first m entries of a uniform permutation
  std::vector<std::int32_t> idx(n);
  for (int v = 0; v < n; ++v) idx[v] = v;
  for (long long j = 0; j < m; ++j) {
    const std::uint32_t r = static_cast<std::uint32_t>(j) +
                            rs.below(static_cast<std::uint32_t>(n - j));
    std::swap(idx[j], idx[r]);
    state[idx[j]] = 1;
  }
  return state;
}

AnnealResult anneal_to_moments(MicroState& state, const Network& net,
                               const MomentTarget& target,
                               const AnnealSchedule& schedule,
                               rng::Stream& rs) {
  MomentTracker tracker(state, net, target.triples.has_value());
  return anneal_with_tracker(tracker, target, schedule, net.n_neurons, rs);
}

ManifoldEnsemble converge_to_manifold(double p_target, double epsilon,
                                      const Network& net,
                                      const ManifoldLiftConfig& cfg,
                                      std::span<rng::Stream> streams,
                                      int threads) {
  std::vector<MicroState> states(streams.size());
  parallel_for(streams.size(), threads, [&](std::size_t i) {
    states[i] = random_lift(p_target, net, streams[i]);
  });
  return manifold_loop(std::move(states), p_target, epsilon, net, cfg, streams,
                       threads);
}

ManifoldEnsemble converge_to_manifold(std::vector<MicroState> states,
                                      double p_target, double epsilon,
                                      const Network& net,
                                      const ManifoldLiftConfig& cfg,
                                      std::span<rng::Stream> streams,
                                      int threads) {
  if (states.size() != streams.size())
    throw std::invalid_argument(
        "converge_to_manifold: states/streams size mismatch");
  for (const auto& s : states)
    if (static_cast<int>(s.size()) != net.n_neurons)
      throw std::invalid_argument("converge_to_manifold: state size mismatch");
  return manifold_loop(std::move(states), p_target, epsilon, net, cfg, streams,
                       threads);
}

ManifoldEnsemble converge_to_manifold(double p_target, double epsilon,
                                      const Network& net, int copies,
                                      const ManifoldLiftConfig& cfg,
                                      std::uint64_t seed, int threads) {
  std::vector<rng::Stream> streams;
  streams.reserve(copies);
  for (int i = 0; i < copies; ++i)
    streams.emplace_back(rng::derive(seed, static_cast<std::uint64_t>(i)));
  return converge_to_manifold(p_target, epsilon, net, cfg,
                              std::span<rng::Stream>(streams), threads);
}

}  // namespace neurocoarse
