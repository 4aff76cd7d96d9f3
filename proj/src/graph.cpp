#include "neurocoarse/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "neurocoarse/errors.hpp"
#include "neurocoarse/rng.hpp"

namespace neurocoarse {

namespace {

bool already_linked(const std::vector<std::int32_t>& adj,
                    const std::vector<int>& fill, int d, int u, int v) {
  const std::int32_t* row = adj.data() + static_cast<std::size_t>(u) * d;
  for (int j = 0; j < fill[u]; ++j)
    if (row[j] == v) return true;
  return false;
}

// One pairing attempt; false on dead end (only invalid pairs remain).
bool try_pairing(int n, int d, rng::Stream& rs, std::vector<std::int32_t>& adj,
                 std::vector<int>& fill) {
  std::fill(adj.begin(), adj.end(), -1);
  std::fill(fill.begin(), fill.end(), 0);

  std::vector<std::int32_t> stubs;
  stubs.reserve(static_cast<std::size_t>(n) * d);
  for (int v = 0; v < n; ++v)
    for (int j = 0; j < d; ++j) stubs.push_back(v);

  while (!stubs.empty()) {
    const auto sz = static_cast<std::uint32_t>(stubs.size());
    const long long max_tries = 100 + 10LL * sz;
    long long tries = 0;
    int u = -1, v = -1;
    std::uint32_t a = 0, b = 0;
    for (;;) {
      a = rs.below(sz);
      b = rs.below(sz);
      u = stubs[a];
      v = stubs[b];
      if (a != b && u != v && !already_linked(adj, fill, d, u, v)) break;
      if (++tries > max_tries) return false;
    }
    adj[static_cast<std::size_t>(u) * d + fill[u]++] = v;
    adj[static_cast<std::size_t>(v) * d + fill[v]++] = u;
    // remove both stubs; pop the larger index first
    if (a < b) std::swap(a, b);
    stubs[a] = stubs.back();
    stubs.pop_back();
    stubs[b] = stubs.back();
    stubs.pop_back();
  }
  return true;
}

}  // namespace

Network generate_regular_graph(int n, int d, std::uint64_t seed,
                               int max_attempts) {
  if (n < 1 || d < 2 || d >= n)
    throw std::invalid_argument("generate_regular_graph: need 2 <= d < n");
  if ((static_cast<long long>(n) * d) % 2 != 0)
    throw std::invalid_argument("generate_regular_graph: n*d must be even");

  Network net;
  net.n_neurons = n;
  net.degree = d;
  net.seed = seed;
  net.adjacency.assign(static_cast<std::size_t>(n) * d, -1);
  std::vector<int> fill(n, 0);

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    rng::Stream rs(rng::derive(seed, static_cast<std::uint64_t>(attempt)));
    if (!try_pairing(n, d, rs, net.adjacency, fill)) continue;
    if (component_count(net) != 1) continue;
    return net;
  }
  throw std::runtime_error("generate_regular_graph: retry budget exhausted (" +
                           std::to_string(max_attempts) + " attempts)");
}

int component_count(const Network& net) {
  const int n = net.n_neurons;
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<int> stack;
  int components = 0;
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    ++components;
    seen[s] = 1;
    stack.push_back(s);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (const std::int32_t w : net.neighbors(v)) {
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
  }
  return components;
}

Network make_ring(int n) {
  if (n < 3) throw std::invalid_argument("make_ring: need n >= 3");
  Network net;
  net.n_neurons = n;
  net.degree = 2;
  net.seed = 0;
  net.adjacency.resize(static_cast<std::size_t>(n) * 2);
  for (int i = 0; i < n; ++i) {
    net.adjacency[2 * i] = (i + n - 1) % n;
    net.adjacency[2 * i + 1] = (i + 1) % n;
  }
  return net;
}

void save_edge_list(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw IoError("save_edge_list: cannot open " + path.string());
  out << "# n=" << net.n_neurons << " d=" << net.degree << " seed=" << net.seed
      << "\n";
  for (int i = 0; i < net.n_neurons; ++i)
    for (const std::int32_t j : net.neighbors(i))
      if (i < j) out << i << " " << j << "\n";
  if (!out) throw IoError("save_edge_list: write failed");
}

Network load_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw IoError("load_edge_list: cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  Network net;
  {
    std::istringstream hs(header);
    std::string hash, kv;
    hs >> hash;
    if (hash != "#")
      throw std::runtime_error("load_edge_list: missing header line");
    while (hs >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = kv.substr(0, eq);
      const std::string val = kv.substr(eq + 1);
      if (key == "n")
        net.n_neurons = std::stoi(val);
      else if (key == "d")
        net.degree = std::stoi(val);
      else if (key == "seed")
        net.seed = std::stoull(val);
    }
  }
  if (net.n_neurons <= 0 || net.degree <= 0)
    throw std::runtime_error("load_edge_list: bad header: " + header);

  net.adjacency.assign(
      static_cast<std::size_t>(net.n_neurons) * net.degree, -1);
  std::vector<int> fill(net.n_neurons, 0);
  int i = 0, j = 0;
  while (in >> i >> j) {
    if (i < 0 || j < 0 || i >= net.n_neurons || j >= net.n_neurons || i == j)
      throw std::runtime_error("load_edge_list: bad edge");
    if (fill[i] >= net.degree || fill[j] >= net.degree)
      throw std::runtime_error("load_edge_list: vertex degree exceeds d");
    net.adjacency[static_cast<std::size_t>(i) * net.degree + fill[i]++] = j;
    net.adjacency[static_cast<std::size_t>(j) * net.degree + fill[j]++] = i;
  }
  for (int v = 0; v < net.n_neurons; ++v)
    if (fill[v] != net.degree)
      throw std::runtime_error("load_edge_list: vertex " + std::to_string(v) +
                               " has degree " + std::to_string(fill[v]));
  return net;
}

}  // namespace neurocoarse
