#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sbmkit/types.hpp"

namespace sbmkit {

// Adjacency in CSR form. Undirected graphs store each edge once per endpoint
// and hold no self-loops; edge_count is the number of unordered edges.
// Directed graphs keep self-loops, edge_count is the number of arcs, and a
// mirrored in-neighbor index is kept so both orientations can be scanned.
struct SparseGraph {
  std::int32_t n = 0;
  bool directed = false;
  std::int64_t edge_count = 0;
  std::vector<std::int64_t> offsets;       // size n+1
  std::vector<std::int32_t> neighbors;     // sorted within each node
  std::vector<std::int64_t> in_offsets;    // directed only
  std::vector<std::int32_t> in_neighbors;  // directed only

  std::span<const std::int32_t> neighbors_of(std::int32_t i) const {
    return {neighbors.data() + offsets[i], neighbors.data() + offsets[i + 1]};
  }
  std::span<const std::int32_t> in_neighbors_of(std::int32_t i) const {
    return {in_neighbors.data() + in_offsets[i], in_neighbors.data() + in_offsets[i + 1]};
  }
  std::int32_t degree(std::int32_t i) const {
    return static_cast<std::int32_t>(offsets[i + 1] - offsets[i]);
  }
  bool has_edge(std::int32_t i, std::int32_t j) const;  // binary search, out-direction
};

struct LoadDiagnostics {
  std::int64_t duplicates_dropped = 0;
  std::int64_t self_loops_dropped = 0;
  std::vector<std::string> node_ids;  // dense index -> original token
};

// Builders normalize raw pair lists: sort, deduplicate, and (undirected only)
// drop self-loops. Counts of dropped entries land in diag when provided.
SparseGraph build_undirected(std::int32_t n, std::vector<std::pair<std::int32_t, std::int32_t>> edges,
                             LoadDiagnostics* diag = nullptr);
SparseGraph build_directed(std::int32_t n, std::vector<std::pair<std::int32_t, std::int32_t>> arcs,
                           LoadDiagnostics* diag = nullptr);

// Parses "u v" lines; '#' starts a comment line, blank lines are skipped.
// Tokens are assigned dense ids in order of first appearance. Throws
// ParseError on malformed lines and ConfigError when no edges survive.
SparseGraph from_edge_list(std::istream& in, bool directed = false, LoadDiagnostics* diag = nullptr);
SparseGraph load_edge_list(const std::string& path, bool directed = false,
                           LoadDiagnostics* diag = nullptr);
void write_edge_list(std::ostream& out, const SparseGraph& g);

std::vector<std::int32_t> degrees(const SparseGraph& g);  // out-degrees when directed

// Row sums of A^2, i.e. counts of length-2 walks from each node (returning
// walks included). Undirected graphs only.
std::vector<std::int64_t> two_path_counts(const SparseGraph& g);

// b_ik = number of (out-)neighbors of i carrying label k under e.
IntMatrix block_sums(const SparseGraph& g, const Labeling& e);

// O_kl counts ordered adjacent pairs with labels (k, l); npairs_kl is the
// number of ordered node pairs available to the block: n_k*n_l off the
// diagonal and n_k*(n_k - 1) on it.
struct BlockCounts {
  CountMatrix edges;
  CountMatrix npairs;
};
BlockCounts block_edge_counts(const SparseGraph& g, const Labeling& e);

// Restriction to the largest connected component (edge directions ignored).
// keep maps new dense index -> index in g.
struct ComponentView {
  SparseGraph graph;
  std::vector<std::int32_t> keep;
};
ComponentView largest_component(const SparseGraph& g);

std::vector<std::int32_t> read_labels(const std::string& path);  // 1-based file -> 0-based
void write_labels(const std::string& path, const std::vector<std::int32_t>& labels);

}  // namespace sbmkit
