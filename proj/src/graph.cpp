#include "sbmkit/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace sbmkit {

void Labeling::validate() const {
  if (k <= 0) throw ConfigError("labeling must have k >= 1");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k)
      throw ConfigError("label out of range at node " + std::to_string(i) + ": " +
                        std::to_string(labels[i]) + " not in [0, " + std::to_string(k) + ")");
  }
}

std::vector<std::int64_t> Labeling::class_counts() const {
  validate();
  std::vector<std::int64_t> counts(k, 0);
  for (auto l : labels) counts[l]++;
  return counts;
}

namespace {

SparseGraph finish_csr(std::int32_t n, bool directed,
                       std::vector<std::pair<std::int32_t, std::int32_t>>& entries,
                       std::int64_t edge_count) {
  SparseGraph g;
  g.n = n;
  g.directed = directed;
  g.edge_count = edge_count;
  g.offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  for (auto& [u, v] : entries) g.offsets[u + 1]++;
  for (std::int32_t i = 0; i < n; ++i) g.offsets[i + 1] += g.offsets[i];
  g.neighbors.resize(entries.size());
  {
    std::vector<std::int64_t> cursor(g.offsets.begin(), g.offsets.end() - 1);
    for (auto& [u, v] : entries) g.neighbors[cursor[u]++] = v;
  }
  if (directed) {
    g.in_offsets.assign(static_cast<std::size_t>(n) + 1, 0);
    for (auto& [u, v] : entries) g.in_offsets[v + 1]++;
    for (std::int32_t i = 0; i < n; ++i) g.in_offsets[i + 1] += g.in_offsets[i];
    g.in_neighbors.resize(entries.size());
    std::vector<std::int64_t> cursor(g.in_offsets.begin(), g.in_offsets.end() - 1);
    for (auto& [u, v] : entries) g.in_neighbors[cursor[v]++] = u;
  }
  // entries were sorted, so per-node neighbor runs are already sorted
  return g;
}

void check_range(std::int32_t n, std::pair<std::int32_t, std::int32_t> e) {
  if (e.first < 0 || e.first >= n || e.second < 0 || e.second >= n)
    throw ConfigError("edge endpoint out of range: (" + std::to_string(e.first) + ", " +
                      std::to_string(e.second) + ") with n=" + std::to_string(n));
}

}  // namespace

SparseGraph build_undirected(std::int32_t n, std::vector<std::pair<std::int32_t, std::int32_t>> edges,
                             LoadDiagnostics* diag) {
  std::int64_t self_loops = 0, duplicates = 0;
  std::vector<std::pair<std::int32_t, std::int32_t>> pairs;
  pairs.reserve(edges.size());
  for (auto e : edges) {
    check_range(n, e);
    if (e.first == e.second) {
      self_loops++;
      continue;
    }
    if (e.first > e.second) std::swap(e.first, e.second);
    pairs.push_back(e);
  }
  std::sort(pairs.begin(), pairs.end());
  auto last = std::unique(pairs.begin(), pairs.end());
  duplicates = pairs.end() - last;
  pairs.erase(last, pairs.end());
  std::int64_t m = static_cast<std::int64_t>(pairs.size());

  std::vector<std::pair<std::int32_t, std::int32_t>> entries;
  entries.reserve(2 * pairs.size());
  for (auto& [u, v] : pairs) {
    entries.push_back({u, v});
    entries.push_back({v, u});
  }
  std::sort(entries.begin(), entries.end());
  if (diag) {
    diag->self_loops_dropped += self_loops;
    diag->duplicates_dropped += duplicates;
  }
  return finish_csr(n, false, entries, m);
}

SparseGraph build_directed(std::int32_t n, std::vector<std::pair<std::int32_t, std::int32_t>> arcs,
                           LoadDiagnostics* diag) {
  for (auto e : arcs) check_range(n, e);
  std::sort(arcs.begin(), arcs.end());
  auto last = std::unique(arcs.begin(), arcs.end());
  if (diag) diag->duplicates_dropped += arcs.end() - last;
  arcs.erase(last, arcs.end());
  return finish_csr(n, true, arcs, static_cast<std::int64_t>(arcs.size()));
}

bool SparseGraph::has_edge(std::int32_t i, std::int32_t j) const {
  auto row = neighbors_of(i);
  return std::binary_search(row.begin(), row.end(), j);
}

SparseGraph from_edge_list(std::istream& in, bool directed, LoadDiagnostics* diag) {
  std::unordered_map<std::string, std::int32_t> ids;
  std::vector<std::string> tokens;
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  auto intern = [&](const std::string& tok) {
    auto [it, inserted] = ids.try_emplace(tok, static_cast<std::int32_t>(tokens.size()));
    if (inserted) tokens.push_back(tok);
    return it->second;
  };

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    line_no++;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string a, b, extra;
    ls >> a >> b;
    if (b.empty()) throw ParseError("expected two node tokens", line_no);
    if (ls >> extra) throw ParseError("trailing token '" + extra + "'", line_no);
    edges.push_back({intern(a), intern(b)});
  }
  if (edges.empty()) throw ConfigError("edge list is empty");

  std::int32_t n = static_cast<std::int32_t>(tokens.size());
  if (diag) diag->node_ids = std::move(tokens);
  return directed ? build_directed(n, std::move(edges), diag)
                  : build_undirected(n, std::move(edges), diag);
}

SparseGraph load_edge_list(const std::string& path, bool directed, LoadDiagnostics* diag) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list: " + path);
  return from_edge_list(in, directed, diag);
}

void write_edge_list(std::ostream& out, const SparseGraph& g) {
  for (std::int32_t i = 0; i < g.n; ++i)
    for (auto j : g.neighbors_of(i))
      if (g.directed || i < j) out << i << ' ' << j << '\n';
}

std::vector<std::int32_t> degrees(const SparseGraph& g) {
  std::vector<std::int32_t> d(g.n);
  for (std::int32_t i = 0; i < g.n; ++i) d[i] = g.degree(i);
  return d;
}

std::vector<std::int64_t> two_path_counts(const SparseGraph& g) {
  if (g.directed) throw ConfigError("two_path_counts expects an undirected graph");
  std::vector<std::int64_t> d2(g.n, 0);
  for (std::int32_t i = 0; i < g.n; ++i) {
    std::int64_t acc = 0;
    for (auto j : g.neighbors_of(i)) acc += g.degree(j);
    d2[i] = acc;
  }
  return d2;
}

IntMatrix block_sums(const SparseGraph& g, const Labeling& e) {
  if (e.n() != g.n) throw ConfigError("labeling length does not match graph");
  e.validate();
  IntMatrix b = IntMatrix::Zero(g.n, e.k);
  for (std::int32_t i = 0; i < g.n; ++i)
    for (auto j : g.neighbors_of(i)) b(i, e.labels[j])++;
  return b;
}

BlockCounts block_edge_counts(const SparseGraph& g, const Labeling& e) {
  if (e.n() != g.n) throw ConfigError("labeling length does not match graph");
  e.validate();
  const int k = e.k;
  BlockCounts out;
  out.edges = CountMatrix::Zero(k, k);
  out.npairs = CountMatrix::Zero(k, k);
  for (std::int32_t i = 0; i < g.n; ++i)
    for (auto j : g.neighbors_of(i)) out.edges(e.labels[i], e.labels[j])++;
  if (g.directed)
    for (std::int32_t i = 0; i < g.n; ++i)
      if (g.has_edge(i, i)) out.edges(e.labels[i], e.labels[i])--;  // ordered pairs i != j
  auto counts = e.class_counts();
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      out.npairs(a, b) = (a == b) ? counts[a] * (counts[a] - 1) : counts[a] * counts[b];
  return out;
}

ComponentView largest_component(const SparseGraph& g) {
  std::vector<std::int32_t> comp(g.n, -1);
  std::vector<std::int32_t> stack;
  std::int32_t ncomp = 0;
  std::vector<std::int64_t> sizes;
  for (std::int32_t s = 0; s < g.n; ++s) {
    if (comp[s] >= 0) continue;
    std::int64_t size = 0;
    stack.push_back(s);
    comp[s] = ncomp;
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      size++;
      auto visit = [&](std::int32_t v) {
        if (comp[v] < 0) {
          comp[v] = ncomp;
          stack.push_back(v);
        }
      };
      for (auto v : g.neighbors_of(u)) visit(v);
      if (g.directed)
        for (auto v : g.in_neighbors_of(u)) visit(v);
    }
    sizes.push_back(size);
    ncomp++;
  }
  std::int32_t best = 0;
  for (std::int32_t c = 1; c < ncomp; ++c)
    if (sizes[c] > sizes[best]) best = c;

  ComponentView view;
  std::vector<std::int32_t> remap(g.n, -1);
  for (std::int32_t i = 0; i < g.n; ++i) {
    if (comp[i] == best) {
      remap[i] = static_cast<std::int32_t>(view.keep.size());
      view.keep.push_back(i);
    }
  }
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  for (std::int32_t i = 0; i < g.n; ++i) {
    if (remap[i] < 0) continue;
    for (auto j : g.neighbors_of(i))
      if (g.directed || i < j) edges.push_back({remap[i], remap[j]});
  }
  auto nn = static_cast<std::int32_t>(view.keep.size());
  view.graph = g.directed ? build_directed(nn, std::move(edges)) : build_undirected(nn, std::move(edges));
  return view;
}

std::vector<std::int32_t> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open label file: " + path);
  std::vector<std::int32_t> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    line_no++;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      labels.push_back(std::stoi(line) - 1);
    } catch (const std::exception&) {
      throw ParseError("expected an integer label", line_no);
    }
  }
  if (labels.empty()) throw ConfigError("label file is empty: " + path);
  return labels;
}

void write_labels(const std::string& path, const std::vector<std::int32_t>& labels) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (auto l : labels) out << (l + 1) << '\n';
}

}  // namespace sbmkit
