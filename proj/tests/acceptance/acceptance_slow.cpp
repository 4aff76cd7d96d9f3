// Paper-scale escape-time criterion. Escape times grow exponentially with the
// network size, so this must run at the full 20000 neurons with 1e5
// realizations per grid point; expect hours. Disabled in the default ctest
// run; enable with -DNEUROCOARSE_ENABLE_SLOW_TESTS=ON or run this binary
// directly.

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "neurocoarse/rare_events.hpp"

using namespace neurocoarse;
using namespace acceptance;

TEST_CASE("criterion 9: paper-scale mean first-passage time") {
  const Network& net = paper_network();
  const double eps = 0.162;

  EnsembleConfig ens;
  ens.copies = 2000;
  ens.horizon_T = 5;
  ens.lift_mode = LiftMode::manifold;
  ens.record_observables = false;
  const NetworkCoarseMap map(net, ens);
  ContinuationConfig cc;

  const double p_hat = settle(net, eps, 0.8, 300, 90001);
  const BranchPoint node = newton_solve(map, p_hat, eps, cc, 90002);
  const double p_un = bisect_unstable(map, eps, node.p_star, 90003);
  const double gap = node.p_star - p_un;
  std::printf("[criterion 9] node %.4f unstable %.4f\n", node.p_star, p_un);

  std::vector<double> psi(41);
  for (int j = 0; j < 41; ++j)
    psi[j] = -gap * 1.3 + (gap * 1.3 + gap * 0.25) * j / 40.0;

  ManifoldLiftConfig lift;
  lift.use_triples = true;
  DriftDiffusionProfile prof = estimate_drift_diffusion(
      node.p_star, psi, eps, net, 2, 100000, lift, 90004);
  free_energy(prof);
  const EscapeEstimate kram = kramers_escape_time(prof);
  std::printf("[criterion 9] kramers tau %.4g\n", kram.tau);

  const EscapeEstimate direct = direct_mfpt(node.p_star, eps, net, 0.5 * p_un,
                                            30, 2000000, 90005);
  std::printf("[criterion 9] direct tau %.4g (censored %lld)\n", direct.tau,
              direct.censored);

  const bool kramers_scale = kram.tau >= 2e4 / 3.0 && kram.tau <= 2e4 * 3.0;
  const double ratio = direct.tau / kram.tau;
  const bool consistent = ratio >= 1.0 / 3.0 && ratio <= 3.0;
  std::ostringstream d;
  d << "kramers " << kram.tau << " vs 2e4 (factor-3 band), direct "
    << direct.tau << ", direct/kramers " << ratio;
  report(9, "paper-scale escape time", kramers_scale && consistent, d.str());
  CHECK(kramers_scale);
  CHECK(consistent);
}
