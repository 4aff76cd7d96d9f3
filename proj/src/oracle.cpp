#include "neurocoarse/oracle.hpp"

#include <bit>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <stdexcept>

#include "neurocoarse/parallel.hpp"
#include "neurocoarse/rng.hpp"

namespace neurocoarse {

ExactChain exact_transition_matrix(const Network& net, double epsilon) {
  const int n = net.n_neurons;
  if (n > kExactChainMaxNeurons)
    throw std::invalid_argument("exact_transition_matrix: n exceeds " +
                                std::to_string(kExactChainMaxNeurons));
  const int d = net.degree;
  const FlipTable table(d, epsilon);
  const std::size_t size = std::size_t{1} << n;

  ExactChain chain;
  chain.n = n;
  chain.matrix.assign(size * size, 0.0);

  parallel_for(size, 0, [&](std::size_t s) {
    // per-neuron flip probabilities on the old state s
    std::vector<double> flip(n);
    for (int i = 0; i < n; ++i) {
      int k = 0;
      for (const std::int32_t w : net.neighbors(i)) k += (s >> w) & 1u;
      flip[i] = table(((s >> i) & 1u) != 0, k);
    }
    // tensor the per-neuron factors together, one neuron (bit) at a time
    double* row = chain.matrix.data() + s * size;
    row[0] = 1.0;
    std::size_t filled = 1;
    for (int i = 0; i < n; ++i) {
      const std::size_t bit = std::size_t{1} << i;
      const double p_active =
          ((s >> i) & 1u) ? 1.0 - flip[i] : flip[i];
      for (std::size_t t = 0; t < filled; ++t) {
        const double w = row[t];
        row[t | bit] = w * p_active;
        row[t] = w * (1.0 - p_active);
      }
      filled <<= 1;
    }
  });
  return chain;
}

std::vector<double> exact_density_evolution(const ExactChain& chain,
                                            std::span<const double> initial,
                                            int t) {
  const std::size_t size = chain.size();
  if (initial.size() != size)
    throw std::invalid_argument(
        "exact_density_evolution: distribution size mismatch");
  double total = 0;
  for (const double w : initial) total += w;
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument(
        "exact_density_evolution: initial distribution must sum to 1");

  auto expected_density = [&](const std::vector<double>& dist) {
    double acc = 0;
    for (std::size_t s = 0; s < size; ++s)
      acc += dist[s] * std::popcount(s);
    return acc / chain.n;
  };

  std::vector<double> dist(initial.begin(), initial.end());
  std::vector<double> next(size);
  std::vector<double> out;
  out.reserve(t + 1);
  out.push_back(expected_density(dist));
  for (int step = 0; step < t; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < size; ++s) {
      const double w = dist[s];
      if (w == 0.0) continue;
      const double* row = chain.row(s);
      for (std::size_t sp = 0; sp < size; ++sp) next[sp] += w * row[sp];
    }
    dist.swap(next);
    out.push_back(expected_density(dist));
  }
  return out;
}

double mean_field_map(double p, double epsilon, int d) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("mean_field_map: p outside [0, 1]");
  // binomial neighbor-count masses B(k; d, p)
  std::vector<double> mass(d + 1);
  for (int k = 0; k <= d; ++k) {
    double m = 1.0;
    for (int j = 0; j < k; ++j) m *= static_cast<double>(d - j) / (j + 1);
    mass[k] = m * std::pow(p, k) * std::pow(1.0 - p, d - k);
  }
  double activate = 0, stay = 0;
  for (int k = 0; k <= d; ++k) {
    activate += mass[k] * flip_probability(false, k, d, epsilon);
    stay += mass[k] * (1.0 - flip_probability(true, k, d, epsilon));
  }
  return (1.0 - p) * activate + p * stay;
}

ChiSquareResult chi_square_vs_expected(std::span<const long long> counts,
                                       std::span<const double> expected,
                                       double significance,
                                       double min_expected) {
  if (counts.size() != expected.size())
    throw std::invalid_argument("chi_square_vs_expected: size mismatch");
  double stat = 0;
  long long pooled_count = 0;
  double pooled_expected = 0;
  int bins = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (expected[i] >= min_expected) {
      const double diff = counts[i] - expected[i];
      stat += diff * diff / expected[i];
      ++bins;
    } else {
      pooled_count += counts[i];
      pooled_expected += expected[i];
    }
  }
  if (pooled_expected > 0) {
    const double diff = pooled_count - pooled_expected;
    stat += diff * diff / pooled_expected;
    ++bins;
  }
  ChiSquareResult res;
  res.statistic = stat;
  res.dof = bins > 1 ? bins - 1 : 1;
  boost::math::chi_squared dist(res.dof);
  res.critical = boost::math::quantile(dist, 1.0 - significance);
  res.pass = stat <= res.critical;
  return res;
}

ChiSquareResult one_step_chi_square(const Network& net, const MicroState& start,
                                    double epsilon, int samples,
                                    std::uint64_t seed, double significance,
                                    const FlipTable* table_override) {
  const int n = net.n_neurons;
  if (n > kExactChainMaxNeurons)
    throw std::invalid_argument("one_step_chi_square: n exceeds cap");
  const ExactChain chain = exact_transition_matrix(net, epsilon);
  std::size_t s0 = 0;
  for (int i = 0; i < n; ++i)
    if (start[i]) s0 |= std::size_t{1} << i;

  const FlipTable default_table(net.degree, epsilon);
  const FlipTable& table = table_override ? *table_override : default_table;

  std::vector<long long> counts(chain.size(), 0);
  rng::Stream rs(seed);
  MicroState next(start.size());
  for (int r = 0; r < samples; ++r) {
    synchronous_step_into(next, start, net, table, rs);
    std::size_t sp = 0;
    for (int i = 0; i < n; ++i)
      if (next[i]) sp |= std::size_t{1} << i;
    ++counts[sp];
  }
  std::vector<double> expected(chain.size());
  const double* row = chain.row(s0);
  for (std::size_t s = 0; s < chain.size(); ++s)
    expected[s] = row[s] * samples;
  return chi_square_vs_expected(counts, expected, significance);
}

namespace {

// fixed start pattern: the lowest round(n/2) neurons active
MicroState half_on_state(int n) {
  MicroState s(n, 0);
  for (int i = 0; i < n / 2; ++i) s[i] = 1;
  return s;
}

EquivalenceReport run_case(const std::string& label, const Network& net,
                           double epsilon, std::uint64_t seed,
                           int one_step_samples, int trajectory_realizations,
                           int t_max, double significance) {
  EquivalenceReport rep;
  rep.label = label;
  const MicroState start = half_on_state(net.n_neurons);
  rep.chi = one_step_chi_square(net, start, epsilon, one_step_samples,
                                rng::derive(seed, 1), significance);

  // E[p](t) against the exact chain, 3 standard errors
  const ExactChain chain = exact_transition_matrix(net, epsilon);
  std::vector<double> initial(chain.size(), 0.0);
  std::size_t s0 = 0;
  for (int i = 0; i < net.n_neurons; ++i)
    if (start[i]) s0 |= std::size_t{1} << i;
  initial[s0] = 1.0;
  const std::vector<double> exact = exact_density_evolution(chain, initial, t_max);

  const FlipTable table(net.degree, epsilon);
  std::vector<double> sum(t_max + 1, 0.0), sumsq(t_max + 1, 0.0);
  rng::Stream rs(rng::derive(seed, 2));
  MicroState cur(start.size()), next(start.size());
  for (int r = 0; r < trajectory_realizations; ++r) {
    cur = start;
    for (int t = 1; t <= t_max; ++t) {
      synchronous_step_into(next, cur, net, table, rs);
      cur.swap(next);
      const double p = density(cur);
      sum[t] += p;
      sumsq[t] += p * p;
    }
  }
  rep.mean_pass = true;
  rep.max_abs_z = 0;
  for (int t = 1; t <= t_max; ++t) {
    const double mean = sum[t] / trajectory_realizations;
    const double var =
        (sumsq[t] - sum[t] * sum[t] / trajectory_realizations) /
        (trajectory_realizations - 1);
    const double se = std::sqrt(std::max(var, 0.0) / trajectory_realizations);
    const double z = se > 0 ? std::abs(mean - exact[t]) / se
                            : (mean == exact[t] ? 0.0 : 1e100);
    rep.max_abs_z = std::max(rep.max_abs_z, z);
    if (z > 3.0) rep.mean_pass = false;
  }
  return rep;
}

}  // namespace

std::vector<EquivalenceReport> run_equivalence_suite(std::uint64_t seed,
                                                     int one_step_samples,
                                                     int trajectory_realizations,
                                                     int t_max,
                                                     double significance) {
  struct Case {
    std::string label;
    Network net;
  };
  std::vector<Case> cases;
  cases.push_back({"ring n=4 d=2", generate_regular_graph(4, 2, 11)});
  cases.push_back({"ring n=8 d=2", generate_regular_graph(8, 2, 12)});
  cases.push_back({"cubic n=8 d=3", generate_regular_graph(8, 3, 13)});

  std::vector<EquivalenceReport> out;
  int idx = 0;
  for (const auto& c : cases) {
    for (const double eps : {0.1, 0.3}) {
      EquivalenceReport rep =
          run_case(c.label + " eps=" + std::to_string(eps), c.net, eps,
                   rng::derive(seed, 100 + idx), one_step_samples,
                   trajectory_realizations, t_max, significance);
      out.push_back(std::move(rep));
      ++idx;
    }
  }
  return out;
}

}  // namespace neurocoarse
