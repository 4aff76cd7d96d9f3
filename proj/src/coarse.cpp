#include "neurocoarse/coarse.hpp"

#include <cmath>
#include <stdexcept>

#include "neurocoarse/parallel.hpp"

namespace neurocoarse {

namespace {

constexpr std::uint64_t kLiftSalt = 0x11f7;
constexpr std::uint64_t kRunSalt = 0x2e60;
constexpr std::uint64_t kGraphSalt = 0x36a9;

void finalize_stats(CoarseResult& res) {
  const std::size_t m = res.per_copy_p.size();
  double sum = 0;
  for (const double p : res.per_copy_p) sum += p;
  res.mean_p = sum / static_cast<double>(m);
  if (m > 1) {
    double ss = 0;
    for (const double p : res.per_copy_p) {
      const double d = p - res.mean_p;
      ss += d * d;
    }
    res.std_error = std::sqrt(ss / static_cast<double>(m - 1) /
                              static_cast<double>(m));
  } else {
    res.std_error = 0;
  }
}

CoarseObservables mean_observables(const std::vector<CoarseObservables>& obs) {
  CoarseObservables mean;
  mean.rho00 = 0;
  const double m = static_cast<double>(obs.size());
  bool triples = !obs.empty() && obs.front().triples.has_value();
  TripleDensities tri{};
  for (const auto& o : obs) {
    mean.p += o.p;
    mean.rho11 += o.rho11;
    mean.rho10 += o.rho10;
    mean.rho01 += o.rho01;
    mean.rho00 += o.rho00;
    if (triples && o.triples)
      for (int c = 0; c < 6; ++c) tri[c] += (*o.triples)[c];
  }
  mean.p /= m;
  mean.rho11 /= m;
  mean.rho10 /= m;
  mean.rho01 /= m;
  mean.rho00 /= m;
  if (triples) {
    for (int c = 0; c < 6; ++c) tri[c] /= m;
    mean.triples = tri;
  }
  return mean;
}

}  // namespace

CoarseResult coarse_timestep(double p0, double epsilon, const Network& net,
                             const EnsembleConfig& cfg) {
  if (!(p0 >= 0.0 && p0 <= 1.0))
    throw std::invalid_argument("coarse_timestep: p0 outside [0, 1]");
  if (cfg.copies < 1 || cfg.horizon_T < 1)
    throw std::invalid_argument("coarse_timestep: need copies, horizon_T >= 1");
  const int n = net.n_neurons;
  const long long m_active = std::llround(p0 * n);

  CoarseResult res;
  res.p0_realized = static_cast<double>(m_active) / n;
  res.per_copy_p.assign(cfg.copies, 0.0);

  // The all-off state is absorbing: nothing to simulate.
  if (m_active == 0) {
    if (cfg.record_observables) {
      CoarseObservables obs;
      obs.p = 0;
      obs.rho00 = 1;
      if (cfg.with_triples) {
        TripleDensities tri{};
        tri[kTriple000] = 1.0;
        obs.triples = tri;
      }
      res.observables_T = obs;
    }
    return res;
  }

  const FlipTable table(net.degree, epsilon);

  std::vector<rng::Stream> lift_streams, run_streams;
  lift_streams.reserve(cfg.copies);
  run_streams.reserve(cfg.copies);
  const std::uint64_t lift_base = rng::derive(cfg.master_seed, kLiftSalt);
  const std::uint64_t run_base = rng::derive(cfg.master_seed, kRunSalt);
  for (int i = 0; i < cfg.copies; ++i) {
    lift_streams.emplace_back(rng::derive(lift_base, i));
    run_streams.emplace_back(rng::derive(run_base, i));
  }

  std::vector<Network> fresh;  // per-copy graphs when requested
  if (cfg.graph_policy == GraphPolicy::fresh_per_copy) {
    fresh.resize(cfg.copies);
    const std::uint64_t graph_base = rng::derive(cfg.master_seed, kGraphSalt);
    parallel_for(cfg.copies, cfg.threads, [&](std::size_t i) {
      fresh[i] = generate_regular_graph(net.n_neurons, net.degree,
                                        rng::derive(graph_base, i));
    });
  }
  auto graph_of = [&](std::size_t i) -> const Network& {
    return fresh.empty() ? net : fresh[i];
  };

  std::vector<MicroState> states(cfg.copies);
  if (cfg.lift_mode == LiftMode::manifold &&
      cfg.graph_policy == GraphPolicy::shared) {
    ManifoldEnsemble ens =
        converge_to_manifold(p0, epsilon, net, cfg.manifold,
                             std::span<rng::Stream>(lift_streams), cfg.threads);
    res.lift_warning = !ens.converged;
    states = std::move(ens.states);
  } else if (cfg.lift_mode == LiftMode::manifold) {
    // fresh graphs cannot share an ensemble-mean target across topologies;
    // condition each copy against its own graph
    parallel_for(cfg.copies, cfg.threads, [&](std::size_t i) {
      std::span<rng::Stream> one(&lift_streams[i], 1);
      ManifoldEnsemble ens = converge_to_manifold(p0, epsilon, graph_of(i),
                                                  cfg.manifold, one, 1);
      states[i] = std::move(ens.states.front());
    });
  } else {
    parallel_for(cfg.copies, cfg.threads, [&](std::size_t i) {
      states[i] = random_lift(p0, graph_of(i), lift_streams[i]);
    });
  }

  std::vector<CoarseObservables> finals(
      cfg.record_observables ? cfg.copies : 0);
  parallel_for(cfg.copies, cfg.threads, [&](std::size_t i) {
    MicroState next(states[i].size());
    int active = 0;
    for (int t = 0; t < cfg.horizon_T; ++t) {
      active = synchronous_step_into(next, states[i], graph_of(i), table,
                                     run_streams[i]);
      states[i].swap(next);
    }
    res.per_copy_p[i] = static_cast<double>(active) / n;
    if (cfg.record_observables)
      finals[i] = observe(states[i], graph_of(i), cfg.with_triples);
  });

  finalize_stats(res);
  if (cfg.record_observables) res.observables_T = mean_observables(finals);
  return res;
}

std::vector<PortraitSeries> phase_portrait(double p0,
                                           std::span<const double> rho11_targets,
                                           double epsilon, const Network& net,
                                           int steps, int copies,
                                           std::uint64_t seed,
                                           const AnnealSchedule& schedule,
                                           int threads) {
  if (!(p0 >= 0.0 && p0 <= 1.0))
    throw std::invalid_argument("phase_portrait: p0 outside [0, 1]");
  if (steps < 1 || copies < 1)
    throw std::invalid_argument("phase_portrait: need steps, copies >= 1");
  for (const double target : rho11_targets)
    if (target > p0 + 1e-12)
      throw std::invalid_argument(
          "phase_portrait: infeasible pair-density target (rho11 <= p must "
          "hold)");

  const FlipTable table(net.degree, epsilon);
  std::vector<PortraitSeries> series(rho11_targets.size());
  for (std::size_t s = 0; s < rho11_targets.size(); ++s) {
    PortraitSeries& ser = series[s];
    ser.series_id = static_cast<int>(s);
    ser.rho11_target = rho11_targets[s];
    const std::uint64_t series_seed = rng::derive(seed, 1000 + s);

    // accumulate ensemble sums per time step; copy-major loop keeps memory
    // flat, the reduction below restores copy order determinism
    std::vector<std::vector<double>> p_acc(copies), r_acc(copies);
    parallel_for(copies, threads, [&](std::size_t i) {
      rng::Stream lift(rng::derive(rng::derive(series_seed, kLiftSalt), i));
      rng::Stream run(rng::derive(rng::derive(series_seed, kRunSalt), i));
      MicroState state = random_lift(p0, net, lift);
      MomentTarget target;
      target.rho11 = rho11_targets[s];
      anneal_to_moments(state, net, target, schedule, lift);
      auto& ps = p_acc[i];
      auto& rs_ = r_acc[i];
      ps.resize(steps + 1);
      rs_.resize(steps + 1);
      PairDensities pd = pair_densities(state, net);
      ps[0] = density(state);
      rs_[0] = pd.rho10;
      MicroState next(state.size());
      for (int t = 1; t <= steps; ++t) {
        synchronous_step_into(next, state, net, table, run);
        state.swap(next);
        pd = pair_densities(state, net);
        ps[t] = density(state);
        rs_[t] = pd.rho10;
      }
    });
    ser.points.resize(steps + 1);
    for (int t = 0; t <= steps; ++t) {
      double psum = 0, rsum = 0;
      for (int i = 0; i < copies; ++i) {
        psum += p_acc[i][t];
        rsum += r_acc[i][t];
      }
      ser.points[t] = {t, psum / copies, rsum / copies};
    }
  }
  return series;
}

}  // namespace neurocoarse
