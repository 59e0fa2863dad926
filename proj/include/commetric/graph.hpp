#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "commetric/errors.hpp"

namespace commetric {

using NodeId = std::size_t;
using Edge = std::pair<NodeId, NodeId>;

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\v\f");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\v\f");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool is_comment_or_blank(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#' || t.front() == '%';
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace detail

/// Bidirectional map between external node labels and dense ids.
/// Ids are assigned in order of first appearance.
class NodeLabels {
 public:
  NodeId intern(std::string_view label) {
    auto it = index_.find(std::string(label));
    if (it != index_.end()) return it->second;
    const NodeId id = names_.size();
    names_.emplace_back(label);
    index_.emplace(names_.back(), id);
    return id;
  }

  std::optional<NodeId> find(std::string_view label) const {
    auto it = index_.find(std::string(label));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& name(NodeId id) const { return names_.at(id); }
  std::size_t size() const noexcept { return names_.size(); }

  /// Labels "0".."n-1" mapping to themselves.
  static NodeLabels identity(std::size_t n) {
    NodeLabels labels;
    for (std::size_t i = 0; i < n; ++i) labels.intern(std::to_string(i));
    return labels;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> index_;
};

/// Immutable undirected simple graph in compressed adjacency form.
///
/// Neighbor lists are sorted; the adjacency relation is symmetric and has no
/// self-loops or parallel edges.
class Graph {
 public:
  Graph() : offsets_(1, 0) {}

  /// Builds a graph on nodes 0..n-1. Parallel edges (in either orientation)
  /// collapse to one; the number collapsed is written to `duplicates`.
  /// Throws InputError on a self-loop or an out-of-range endpoint.
  static Graph from_edges(std::size_t n, std::span<const Edge> edges,
                          std::size_t* duplicates = nullptr) {
    std::vector<Edge> canon;
    canon.reserve(edges.size());
    for (auto [u, v] : edges) {
      if (u >= n || v >= n) {
        throw InputError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                         ") references a node outside 0.." + std::to_string(n) + "-1");
      }
      if (u == v) throw InputError("self-loop on node " + std::to_string(u));
      canon.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(canon.begin(), canon.end());
    const auto last = std::unique(canon.begin(), canon.end());
    if (duplicates) *duplicates = static_cast<std::size_t>(canon.end() - last);
    canon.erase(last, canon.end());

    Graph g;
    g.edge_count_ = canon.size();
    g.offsets_.assign(n + 1, 0);
    for (auto [u, v] : canon) {
      ++g.offsets_[u + 1];
      ++g.offsets_[v + 1];
    }
    std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
    g.neighbors_.resize(2 * canon.size());
    std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    // canon is sorted by (u, v), so each list fills in ascending order except
    // for the reverse entries, which are sorted afterwards.
    for (auto [u, v] : canon) {
      g.neighbors_[cursor[u]++] = v;
      g.neighbors_[cursor[v]++] = u;
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::sort(g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i]),
                g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[i + 1]));
    }
    return g;
  }

  std::size_t node_count() const noexcept { return offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return edge_count_; }

  std::size_t degree(NodeId i) const { return offsets_[i + 1] - offsets_[i]; }

  std::span<const NodeId> neighbors(NodeId i) const {
    return {neighbors_.data() + offsets_[i], degree(i)};
  }

  bool has_edge(NodeId i, NodeId j) const {
    if (i >= node_count() || j >= node_count()) return false;
    auto nb = neighbors(i);
    return std::binary_search(nb.begin(), nb.end(), j);
  }

  /// Each undirected edge once, as (u, v) with u < v, in lexicographic order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (NodeId u = 0; u < node_count(); ++u) {
      for (NodeId v : neighbors(u)) {
        if (u < v) out.emplace_back(u, v);
      }
    }
    return out;
  }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> neighbors_;
  std::size_t edge_count_ = 0;
};

inline std::vector<std::size_t> degree_sequence(const Graph& g) {
  std::vector<std::size_t> k(g.node_count());
  for (NodeId i = 0; i < g.node_count(); ++i) k[i] = g.degree(i);
  return k;
}

struct ParsedGraph {
  Graph graph;
  NodeLabels labels;
  std::size_t duplicate_edges = 0;
};

/// Reads a whitespace-separated edge list. Lines whose first non-blank
/// character is '#' or '%' are comments.
inline ParsedGraph parse_edge_list(std::istream& in) {
  ParsedGraph out;
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_comment_or_blank(line)) continue;
    const auto tok = detail::split_ws(line);
    if (tok.size() != 2) {
      throw ParseError(lineno, "expected two node labels, found " + std::to_string(tok.size()));
    }
    if (tok[0] == tok[1]) {
      throw ParseError(lineno, "self-loop on node '" + std::string(tok[0]) + "'");
    }
    const NodeId u = out.labels.intern(tok[0]);
    const NodeId v = out.labels.intern(tok[1]);
    edges.emplace_back(u, v);
  }
  out.graph = Graph::from_edges(out.labels.size(), edges, &out.duplicate_edges);
  return out;
}

inline ParsedGraph parse_edge_list(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_edge_list(in);
}

inline ParsedGraph load_edge_list(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return parse_edge_list(in);
}

/// Writes each edge once as "label label". Isolated nodes are not representable.
inline void write_edge_list(std::ostream& out, const Graph& g, const NodeLabels& labels) {
  for (auto [u, v] : g.edges()) out << labels.name(u) << ' ' << labels.name(v) << '\n';
}

}  // namespace commetric
