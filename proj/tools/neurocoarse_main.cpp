// Command-line front end: deterministic reproduction runs for the coarse
// analysis of the stochastic neuron network. Each subcommand writes its data
// files plus a manifest that `rerun` replays bit-exactly.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "neurocoarse/coarse.hpp"
#include "neurocoarse/errors.hpp"
#include "neurocoarse/graph.hpp"
#include "neurocoarse/io.hpp"
#include "neurocoarse/lifting.hpp"
#include "neurocoarse/micro.hpp"
#include "neurocoarse/numerics.hpp"
#include "neurocoarse/oracle.hpp"
#include "neurocoarse/rare_events.hpp"
#include "neurocoarse/rng.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace neurocoarse;
using cli::RunConfig;

namespace {

constexpr std::uint64_t kGraphSalt = 1;
constexpr std::uint64_t kSimulateSalt = 2;
constexpr std::uint64_t kPortraitSalt = 3;
constexpr std::uint64_t kContinuationSalt = 4;
constexpr std::uint64_t kSeedSimSalt = 5;
constexpr std::uint64_t kRareSalt = 6;
constexpr std::uint64_t kMfptSalt = 7;
constexpr std::uint64_t kCoarseSalt = 8;

Network build_network(const RunConfig& cfg) {
  return generate_regular_graph(cfg.n_neurons, cfg.degree,
                                rng::derive(cfg.master_seed, kGraphSalt));
}

EnsembleConfig ensemble_config(const RunConfig& cfg, bool observables) {
  EnsembleConfig ens;
  ens.copies = cfg.copies;
  ens.horizon_T = cfg.horizon_T;
  ens.master_seed = cfg.master_seed;
  if (cfg.lift_mode == "manifold")
    ens.lift_mode = LiftMode::manifold;
  else if (cfg.lift_mode == "uniform")
    ens.lift_mode = LiftMode::uniform;
  else
    throw std::invalid_argument("lift_mode must be 'manifold' or 'uniform'");
  ens.manifold.dT = cfg.dT;
  ens.record_observables = observables;
  ens.threads = cfg.threads;
  return ens;
}

ContinuationConfig continuation_config(const RunConfig& cfg) {
  ContinuationConfig cc;
  cc.delta_s = cfg.delta_s;
  cc.fd_delta = cfg.fd_delta;
  cc.newton_tol = cfg.newton_tol;
  cc.max_newton_iters = cfg.max_newton_iters;
  cc.epsilon_min = cfg.epsilon_min;
  cc.epsilon_max = cfg.epsilon_max;
  cc.max_points = cfg.max_points;
  cc.seed = rng::derive(cfg.master_seed, kContinuationSalt);
  return cc;
}

fs::path out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return fs::path(cfg.out_dir) / name;
}

// long-run density from a single realization; mean over the last third
double settle_density(const Network& net, double epsilon, double p0, int steps,
                      rng::Stream& rs) {
  const FlipTable table(net.degree, epsilon);
  MicroState state = random_lift(p0, net, rs);
  MicroState next(state.size());
  double sum = 0;
  int count = 0;
  int active = 0;
  for (int t = 1; t <= steps; ++t) {
    active = synchronous_step_into(next, state, net, table, rs);
    state.swap(next);
    if (3 * t > 2 * steps) {
      sum += static_cast<double>(active) / net.n_neurons;
      ++count;
    }
  }
  return sum / count;
}

// The coarse drift changes sign exactly once between the all-off basin and
// the metastable node; bisect on one seed so G is a fixed function. The upper
// bracket end starts well inside the node's basin, where the uphill drift is
// clearly resolved against the ensemble noise, and falls back closer to the
// node when the basin is narrow.
double bisect_unstable(const CoarseMap& map, double epsilon, double p_node,
                       std::uint64_t seed) {
  auto g = [&](double p) { return p - map.evaluate(p, epsilon, seed).mean_p; };
  double lo = 0.05;
  if (!(g(lo) > 0))
    throw std::invalid_argument(
        "rare-events: no unstable point bracketed between the all-off state "
        "and the node (is epsilon inside the bistable window?)");
  double hi = -1;
  for (const double candidate : {0.92 * p_node, p_node - 1e-3}) {
    if (candidate > lo && g(candidate) < 0) {
      hi = candidate;
      break;
    }
  }
  if (hi < 0)
    throw std::invalid_argument(
        "rare-events: no unstable point bracketed between the all-off state "
        "and the node (is epsilon inside the bistable window?)");
  for (int it = 0; it < 24 && hi - lo > 1e-4; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

int cmd_simulate(const RunConfig& cfg) {
  const Network net = build_network(cfg);
  for (std::size_t i = 0; i < cfg.p0_list.size(); ++i) {
    rng::Stream rs(rng::derive(rng::derive(cfg.master_seed, kSimulateSalt), i));
    MicroState state = random_lift(cfg.p0_list[i], net, rs);
    std::vector<CoarseObservables> trajectory;
    evolve(std::move(state), net, cfg.epsilon, cfg.steps, rs, &trajectory);
    write_trajectory_csv(
        out_path(cfg, "trajectory_" + std::to_string(i) + ".csv"), trajectory);
  }
  write_manifest(out_path(cfg, "manifest.json"), "simulate", cfg);
  return 0;
}

int cmd_portrait(const RunConfig& cfg) {
  const Network net = build_network(cfg);
  const auto series = phase_portrait(
      cfg.p0, cfg.rho11_targets, cfg.epsilon, net, cfg.portrait_steps,
      cfg.portrait_copies, rng::derive(cfg.master_seed, kPortraitSalt),
      AnnealSchedule{}, cfg.threads);
  write_portrait_csv(out_path(cfg, "portrait.csv"), series);
  write_manifest(out_path(cfg, "manifest.json"), "portrait", cfg);
  return 0;
}

int cmd_coarse_step(const RunConfig& cfg) {
  const Network net = build_network(cfg);
  const EnsembleConfig ens = ensemble_config(cfg, true);
  const CoarseResult res = coarse_timestep(cfg.p0, cfg.epsilon, net, ens);
  if (res.lift_warning)
    std::cerr << "warning: manifold conditioning hit its iteration cap\n";
  write_coarse_step_json(out_path(cfg, "coarse_step.json"), cfg.p0, cfg.epsilon,
                         cfg.horizon_T, cfg.copies, res, cfg.master_seed);
  write_manifest(out_path(cfg, "manifest.json"), "coarse-step", cfg);
  return 0;
}

int cmd_bifurcate(const RunConfig& cfg) {
  const Network net = build_network(cfg);
  const NetworkCoarseMap map(net, ensemble_config(cfg, false));
  const ContinuationConfig cc = continuation_config(cfg);
  std::vector<CriticalPoint> critical;

  // all-off branch: p* = 0 across the window, lambda decides its stability
  {
    const BranchPoint a =
        newton_solve(map, 0.0, cfg.epsilon_min, cc, rng::derive(cc.seed, 1));
    const BranchPoint b = newton_solve(map, 0.0, cfg.epsilon_min + cfg.delta_s,
                                       cc, rng::derive(cc.seed, 2));
    const Branch zero = arclength_trace(map, a, b, cc);
    write_branch_csv(out_path(cfg, "branch_zero.csv"), zero);
    for (const auto& cp : locate_critical_points(zero)) critical.push_back(cp);
  }

  // nonzero branch: seed on the attractor found by direct simulation, then
  // trace through the fold onto the unstable sub-branch
  {
    rng::Stream rs(rng::derive(cfg.master_seed, kSeedSimSalt));
    const double p_hat = settle_density(net, cfg.epsilon_min, 0.8, 300, rs);
    if (p_hat > 0.05) {
      const BranchPoint a =
          newton_solve(map, p_hat, cfg.epsilon_min, cc, rng::derive(cc.seed, 3));
      const BranchPoint b = newton_solve(
          map, a.p_star, cfg.epsilon_min + cfg.delta_s, cc,
          rng::derive(cc.seed, 4));
      const Branch upper = arclength_trace(map, a, b, cc);
      if (upper.aborted)
        std::cerr << "warning: upper-branch corrector aborted; partial branch "
                     "written\n";
      write_branch_csv(out_path(cfg, "branch_upper.csv"), upper);
      for (const auto& cp : locate_critical_points(upper))
        critical.push_back(cp);
    } else {
      std::cerr << "note: no nonzero attractor at epsilon_min; upper branch "
                   "skipped\n";
    }
  }

  // low-activity branch beyond the transcritical point, traced downward
  {
    rng::Stream rs(rng::derive(cfg.master_seed, kSeedSimSalt) + 1);
    const double p_hat = settle_density(net, cfg.epsilon_max, 0.5, 300, rs);
    if (p_hat > 0.05) {
      const BranchPoint a =
          newton_solve(map, p_hat, cfg.epsilon_max, cc, rng::derive(cc.seed, 5));
      const BranchPoint b = newton_solve(
          map, a.p_star, cfg.epsilon_max - cfg.delta_s, cc,
          rng::derive(cc.seed, 6));
      const Branch low = arclength_trace(map, a, b, cc);
      if (low.aborted)
        std::cerr << "warning: low-branch corrector aborted; partial branch "
                     "written\n";
      write_branch_csv(out_path(cfg, "branch_low.csv"), low);
      for (const auto& cp : locate_critical_points(low)) critical.push_back(cp);
    }
  }

  write_critical_points_json(out_path(cfg, "critical_points.json"), critical);
  write_manifest(out_path(cfg, "manifest.json"), "bifurcate", cfg);
  return 0;
}

int cmd_rare_events(const RunConfig& cfg) {
  const Network net = build_network(cfg);
  const NetworkCoarseMap map(net, ensemble_config(cfg, false));
  const ContinuationConfig cc = continuation_config(cfg);

  double p_node = cfg.p_node;
  if (p_node < 0) {
    rng::Stream rs(rng::derive(cfg.master_seed, kSeedSimSalt));
    const double p_hat = settle_density(net, cfg.epsilon, 0.8, 300, rs);
    if (p_hat < 0.05)
      throw std::invalid_argument(
          "rare-events: no metastable state at this epsilon");
    p_node =
        newton_solve(map, p_hat, cfg.epsilon, cc, rng::derive(cc.seed, 10))
            .p_star;
  }
  const double p_un =
      bisect_unstable(map, cfg.epsilon, p_node, rng::derive(cc.seed, 11));
  const double gap = p_node - p_un;

  if (cfg.direct) {
    const double threshold =
        cfg.exit_threshold > 0 ? cfg.exit_threshold : 0.5 * p_un;
    const EscapeEstimate direct = direct_mfpt(
        p_node, cfg.epsilon, net, threshold, cfg.escapes, cfg.max_steps,
        rng::derive(cfg.master_seed, kMfptSalt), cfg.threads);
    write_escape_json(out_path(cfg, "escape_direct.json"), cfg.epsilon, direct);
    std::printf("direct tau = %.6g steps (%lld escapes, %lld censored)\n",
                direct.tau, static_cast<long long>(cfg.escapes) - direct.censored,
                direct.censored);
  }

  std::vector<double> psi(cfg.psi_points);
  const double lo = -gap * (1.0 + cfg.psi_below);
  const double hi = gap * cfg.psi_above;
  for (int j = 0; j < cfg.psi_points; ++j)
    psi[j] = lo + (hi - lo) * j / (cfg.psi_points - 1);

  ManifoldLiftConfig lift;
  lift.dT = cfg.dT;
  DriftDiffusionProfile prof = estimate_drift_diffusion(
      p_node, psi, cfg.epsilon, net, cfg.delta_T, cfg.copies, lift,
      rng::derive(cfg.master_seed, kRareSalt), cfg.threads);
  free_energy(prof);
  write_profile_csv(out_path(cfg, "profile.csv"), prof);

  const EscapeEstimate kram = kramers_escape_time(prof);
  if (kram.barrier_warning)
    std::cerr << "warning: free-energy barrier below 2; the escape-time "
                 "formula is outside its validity regime\n";
  write_escape_json(out_path(cfg, "escape_kramers.json"), cfg.epsilon, kram);
  std::printf("kramers tau = %.6g steps (psi_stable %.4f, psi_unstable %.4f)\n",
              kram.tau, kram.psi_stable, kram.psi_unstable);

  write_manifest(out_path(cfg, "manifest.json"), "rare-events", cfg);
  return 0;
}

int cmd_oracle_check(const RunConfig& cfg) {
  if (cfg.oracle_n > 0 && cfg.oracle_n > kExactChainMaxNeurons)
    throw std::invalid_argument(
        "oracle-check: n exceeds the exact-chain size cap (" +
        std::to_string(kExactChainMaxNeurons) + ")");
  const auto reports = run_equivalence_suite(
      cfg.master_seed, cfg.oracle_samples, cfg.oracle_realizations, 5);
  bool all_pass = true;
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& rep : reports) {
    const bool ok = rep.pass();
    all_pass = all_pass && ok;
    std::printf("%-24s chi2 %8.2f (crit %8.2f, dof %3d)  max|z| %5.2f  %s\n",
                rep.label.c_str(), rep.chi.statistic, rep.chi.critical,
                rep.chi.dof, rep.max_abs_z, ok ? "ok" : "FAIL");
    nlohmann::ordered_json item;
    item["label"] = rep.label;
    item["chi2"] = rep.chi.statistic;
    item["chi2_critical"] = rep.chi.critical;
    item["dof"] = rep.chi.dof;
    item["max_abs_z"] = rep.max_abs_z;
    item["pass"] = ok;
    out.push_back(item);
  }
  if (cfg.oracle_n > 0) {
    const Network ring = make_ring(cfg.oracle_n);
    MicroState start(cfg.oracle_n, 0);
    for (int i = 0; i < cfg.oracle_n / 2; ++i) start[i] = 1;
    const ChiSquareResult extra =
        one_step_chi_square(ring, start, 0.2, cfg.oracle_samples,
                            rng::derive(cfg.master_seed, 99), 0.01);
    all_pass = all_pass && extra.pass;
    std::printf("ring n=%-17d chi2 %8.2f (crit %8.2f, dof %3d)           %s\n",
                cfg.oracle_n, extra.statistic, extra.critical, extra.dof,
                extra.pass ? "ok" : "FAIL");
  }
  {
    std::ofstream f(out_path(cfg, "oracle_report.json"));
    if (!f) throw IoError("cannot write oracle_report.json");
    f << out.dump(2) << '\n';
  }
  write_manifest(out_path(cfg, "manifest.json"), "oracle-check", cfg);
  return all_pass ? 0 : 2;
}

int dispatch(const std::string& command, const RunConfig& cfg) {
  if (command == "simulate") return cmd_simulate(cfg);
  if (command == "portrait") return cmd_portrait(cfg);
  if (command == "coarse-step") return cmd_coarse_step(cfg);
  if (command == "bifurcate") return cmd_bifurcate(cfg);
  if (command == "rare-events") return cmd_rare_events(cfg);
  if (command == "oracle-check") return cmd_oracle_check(cfg);
  throw std::invalid_argument("unknown command in manifest: " + command);
}

void add_common_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--n_neurons", cfg.n_neurons, "network size");
  cmd->add_option("--degree", cfg.degree, "connectivity degree");
  cmd->add_option("--master_seed", cfg.master_seed, "seed of every stream");
  cmd->add_option("--epsilon", cfg.epsilon, "activation probability");
  cmd->add_option("--threads", cfg.threads,
                  "worker threads (0 = NEUROCOARSE_THREADS or hardware)");
  cmd->add_option("--out_dir", cfg.out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;

  // the config file seeds the defaults, explicit flags override it
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") {
      try {
        cli::load_config_file(argv[i + 1], cfg);
      } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
      }
    }

  CLI::App app{
      "Equation-free coarse analysis of a stochastic neuron network on a "
      "random regular graph"};
  app.require_subcommand(1);
  std::string config_path, manifest_path;

  auto* sim = app.add_subcommand("simulate", "single-realization trajectories");
  add_common_options(sim, cfg);
  sim->add_option("--config", config_path, "flat key = value config file");
  sim->add_option("--p0", cfg.p0_list, "initial densities")->delimiter(',');
  sim->add_option("--steps", cfg.steps, "time steps");

  auto* por = app.add_subcommand(
      "portrait", "ensemble (p, rho10) trajectories from conditioned lifts");
  add_common_options(por, cfg);
  por->add_option("--config", config_path, "flat key = value config file");
  por->add_option("--p0", cfg.p0, "initial density");
  por->add_option("--rho11_targets", cfg.rho11_targets,
                  "initial pair-density targets")
      ->delimiter(',');
  por->add_option("--steps", cfg.portrait_steps, "time steps");
  por->add_option("--copies", cfg.portrait_copies, "realizations per series");

  auto* cst = app.add_subcommand("coarse-step",
                                 "one coarse timestep evaluation to JSON");
  add_common_options(cst, cfg);
  cst->add_option("--config", config_path, "flat key = value config file");
  cst->add_option("--p0", cfg.p0, "initial density");
  cst->add_option("--copies", cfg.copies, "realizations");
  cst->add_option("--horizon_T", cfg.horizon_T, "coarse horizon");
  cst->add_option("--lift_mode", cfg.lift_mode, "uniform | manifold");

  auto* bif = app.add_subcommand(
      "bifurcate", "trace fixed-point branches and locate critical points");
  add_common_options(bif, cfg);
  bif->add_option("--config", config_path, "flat key = value config file");
  bif->add_option("--copies", cfg.copies, "realizations per evaluation");
  bif->add_option("--horizon_T", cfg.horizon_T, "coarse horizon");
  bif->add_option("--lift_mode", cfg.lift_mode, "uniform | manifold");
  bif->add_option("--epsilon_min", cfg.epsilon_min, "trace window lower end");
  bif->add_option("--epsilon_max", cfg.epsilon_max, "trace window upper end");
  bif->add_option("--delta_s", cfg.delta_s, "arc-length step");
  bif->add_option("--fd_delta", cfg.fd_delta, "finite-difference perturbation");
  bif->add_option("--newton_tol", cfg.newton_tol, "residual tolerance");
  bif->add_option("--max_points", cfg.max_points, "points per branch");

  auto* rar = app.add_subcommand(
      "rare-events", "drift/diffusion profile, free energy and escape time");
  add_common_options(rar, cfg);
  rar->add_option("--config", config_path, "flat key = value config file");
  rar->add_option("--copies", cfg.copies, "realizations per grid point");
  rar->add_option("--p_node", cfg.p_node,
                  "metastable density (computed when negative)");
  rar->add_option("--psi_points", cfg.psi_points, "grid size");
  rar->add_option("--psi_below", cfg.psi_below,
                  "grid margin past the unstable point, in gap units");
  rar->add_option("--psi_above", cfg.psi_above,
                  "grid margin above the node, in gap units");
  rar->add_option("--delta_T", cfg.delta_T, "burst length");
  rar->add_flag("--direct", cfg.direct, "also run direct escape simulations");
  rar->add_option("--escapes", cfg.escapes, "direct escape runs");
  rar->add_option("--max_steps", cfg.max_steps, "censoring cap per run");
  rar->add_option("--exit_threshold", cfg.exit_threshold,
                  "escape threshold (half the unstable density when negative)");
  rar->add_option("--newton_tol", cfg.newton_tol, "residual tolerance");

  auto* orc = app.add_subcommand("oracle-check",
                                 "exact-chain equivalence test suite");
  add_common_options(orc, cfg);
  orc->add_option("--config", config_path, "flat key = value config file");
  orc->add_option("--samples", cfg.oracle_samples, "one-step samples");
  orc->add_option("--realizations", cfg.oracle_realizations,
                  "trajectory realizations");
  orc->add_option("--n", cfg.oracle_n, "extra ring case size");

  auto* rer = app.add_subcommand("rerun", "replay a run from its manifest");
  rer->add_option("--manifest", manifest_path, "manifest.json of a past run")
      ->required();
  rer->add_option("--out_dir", cfg.out_dir, "output directory");
  rer->add_option("--threads", cfg.threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (rer->parsed()) {
      const std::string out_dir = cfg.out_dir;
      const int threads = cfg.threads;
      const std::string command = cli::load_manifest(manifest_path, cfg);
      cfg.out_dir = out_dir;
      cfg.threads = threads;
      return dispatch(command, cfg);
    }
    if (sim->parsed()) return cmd_simulate(cfg);
    if (por->parsed()) return cmd_portrait(cfg);
    if (cst->parsed()) return cmd_coarse_step(cfg);
    if (bif->parsed()) return cmd_bifurcate(cfg);
    if (rar->parsed()) return cmd_rare_events(cfg);
    if (orc->parsed()) return cmd_oracle_check(cfg);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const AllRunsCensored& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const NewtonNoConvergence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const SingularDerivative& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
