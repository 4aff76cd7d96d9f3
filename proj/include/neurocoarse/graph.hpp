#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace neurocoarse {

// Fixed d-regular undirected graph without self-loops or multi-edges.
// Adjacency is flat: the neighbors of vertex i occupy
// [i*degree, (i+1)*degree). Immutable once built; safe to share across
// threads.
struct Network {
  int n_neurons = 0;
  int degree = 0;
  std::uint64_t seed = 0;
  std::vector<std::int32_t> adjacency;

  std::span<const std::int32_t> neighbors(int i) const {
    return {adjacency.data() + static_cast<std::size_t>(i) * degree,
            static_cast<std::size_t>(degree)};
  }
};

// Pairing-model generator: d stubs per vertex, random stub pairs, pairs that
// would create a self-loop or duplicate edge are redrawn. An attempt that
// dead-ends or yields a disconnected graph is discarded and retried with a
// sub-seed derived from (seed, attempt), so generation is deterministic in
// (n, d, seed). Throws std::invalid_argument when n*d is odd, d < 2 or
// d >= n, and std::runtime_error when max_attempts is exhausted.
Network generate_regular_graph(int n, int d, std::uint64_t seed,
                               int max_attempts = 1000);

// Number of connected components (BFS). 1 for anything the generator returns.
int component_count(const Network& net);

// The n-cycle; handy 2-regular fixture.
Network make_ring(int n);

// Edge-list text format: header "# n=<N> d=<d> seed=<seed>", then one
// "i j" pair per undirected edge, 0-based.
void save_edge_list(const Network& net, const std::filesystem::path& path);
Network load_edge_list(const std::filesystem::path& path);

}  // namespace neurocoarse
