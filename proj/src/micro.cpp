#include "neurocoarse/micro.hpp"

#include <stdexcept>

namespace neurocoarse {

double flip_probability(bool active, int active_neighbors, int d,
                        double epsilon) {
  if (d < 1) throw std::invalid_argument("flip_probability: d must be >= 1");
  if (active_neighbors < 0 || active_neighbors > d)
    throw std::invalid_argument(
        "flip_probability: active_neighbors out of [0, d]");
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw std::invalid_argument("flip_probability: epsilon outside (0, 0.5)");

  const double threshold = 0.5 * (d + 1);
  const int c = active_neighbors + (active ? 1 : 0);
  if (active) return c < threshold ? 1.0 - epsilon : epsilon;
  if (active_neighbors == 0) return 0.0;
  return c < threshold ? epsilon : 1.0 - epsilon;
}

FlipTable::FlipTable(int d, double epsilon) : d_(d), eps_(epsilon) {
  prob_.resize(2 * (d + 1));
  for (int k = 0; k <= d; ++k) {
    prob_[k] = flip_probability(false, k, d, epsilon);
    prob_[d + 1 + k] = flip_probability(true, k, d, epsilon);
  }
}

int synchronous_step_into(MicroState& next, const MicroState& cur,
                          const Network& net, const FlipTable& table,
                          rng::Stream& rs) {
  const int n = net.n_neurons;
  const int d = net.degree;
  if (static_cast<int>(cur.size()) != n || static_cast<int>(next.size()) != n)
    throw std::invalid_argument("synchronous_step: state size mismatch");
  const std::int32_t* adj = net.adjacency.data();
  int active = 0;
  for (int i = 0; i < n; ++i) {
    const std::int32_t* nb = adj + static_cast<std::size_t>(i) * d;
    int k = 0;
    for (int j = 0; j < d; ++j) k += cur[nb[j]];
    const double pf = table(cur[i] != 0, k);
    const std::uint8_t s = cur[i];
    const std::uint8_t out = (rs.uniform() < pf) ? static_cast<std::uint8_t>(1 - s) : s;
    next[i] = out;
    active += out;
  }
  return active;
}

MicroState synchronous_step(const MicroState& state, const Network& net,
                            double epsilon, rng::Stream& rs) {
  const FlipTable table(net.degree, epsilon);
  MicroState next(state.size());
  synchronous_step_into(next, state, net, table, rs);
  return next;
}

MicroState evolve(MicroState state, const Network& net, double epsilon,
                  int steps, rng::Stream& rs,
                  std::vector<CoarseObservables>* trajectory,
                  bool with_triples) {
  if (steps < 0) throw std::invalid_argument("evolve: steps must be >= 0");
  const FlipTable table(net.degree, epsilon);
  if (trajectory) {
    trajectory->clear();
    trajectory->reserve(steps + 1);
    trajectory->push_back(observe(state, net, with_triples));
  }
  MicroState next(state.size());
  for (int t = 0; t < steps; ++t) {
    synchronous_step_into(next, state, net, table, rs);
    state.swap(next);
    if (trajectory) trajectory->push_back(observe(state, net, with_triples));
  }
  return state;
}

double density(const MicroState& state) {
  if (state.empty()) throw std::invalid_argument("density: empty state");
  long long active = 0;
  for (const auto s : state) active += s;
  return static_cast<double>(active) / static_cast<double>(state.size());
}

PairDensities pair_densities(const MicroState& state, const Network& net) {
  const int n = net.n_neurons;
  const int d = net.degree;
  if (static_cast<int>(state.size()) != n)
    throw std::invalid_argument("pair_densities: state size mismatch");
  const std::int32_t* adj = net.adjacency.data();
  long long n_active = 0;
  long long n11 = 0;
  for (int i = 0; i < n; ++i) {
    if (!state[i]) continue;
    ++n_active;
    const std::int32_t* nb = adj + static_cast<std::size_t>(i) * d;
    for (int j = 0; j < d; ++j) n11 += state[nb[j]];
  }
  const long long links = static_cast<long long>(n) * d;
  const long long n10 = d * n_active - n11;  // exact: active row sums
  PairDensities out;
  out.rho11 = static_cast<double>(n11) / links;
  out.rho10 = static_cast<double>(n10) / links;
  out.rho01 = out.rho10;
  out.rho00 = static_cast<double>(links - n11 - 2 * n10) / links;
  return out;
}

TripleDensities triple_densities(const MicroState& state, const Network& net) {
  const int n = net.n_neurons;
  const int d = net.degree;
  if (static_cast<int>(state.size()) != n)
    throw std::invalid_argument("triple_densities: state size mismatch");
  if (d < 2) throw std::invalid_argument("triple_densities: need d >= 2");
  const std::int32_t* adj = net.adjacency.data();
  // Aggregate per path center b: with k active neighbors there are k(k-1)
  // ordered (1, s_b, 1) paths, 2k(d-k) mixed-end ones and (d-k)(d-k-1) with
  // both ends inactive.
  std::array<long long, 6> counts{};
  for (int b = 0; b < n; ++b) {
    const std::int32_t* nb = adj + static_cast<std::size_t>(b) * d;
    long long k = 0;
    for (int j = 0; j < d; ++j) k += state[nb[j]];
    const long long both = k * (k - 1);
    const long long mixed = 2 * k * (d - k);
    const long long none = static_cast<long long>(d - k) * (d - k - 1);
    if (state[b]) {
      counts[kTriple111] += both;
      counts[kTriple110] += mixed;
      counts[kTriple010] += none;
    } else {
      counts[kTriple101] += both;
      counts[kTriple100] += mixed;
      counts[kTriple000] += none;
    }
  }
  const double total =
      static_cast<double>(n) * d * (d - 1);
  TripleDensities out;
  for (int c = 0; c < 6; ++c) out[c] = static_cast<double>(counts[c]) / total;
  return out;
}

CoarseObservables observe(const MicroState& state, const Network& net,
                          bool with_triples) {
  CoarseObservables obs;
  obs.p = density(state);
  const PairDensities pd = pair_densities(state, net);
  obs.rho11 = pd.rho11;
  obs.rho10 = pd.rho10;
  obs.rho01 = pd.rho01;
  obs.rho00 = pd.rho00;
  if (with_triples) obs.triples = triple_densities(state, net);
  return obs;
}

}  // namespace neurocoarse
