#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <random>
#include <vector>

#include "commetric/commetric.hpp"
#include "oracle.hpp"

namespace support {

namespace cm = commetric;

inline cm::Graph make_graph(std::size_t n, const std::vector<cm::Edge>& edges) {
  return cm::Graph::from_edges(n, edges);
}

inline cm::Graph triangle() { return make_graph(3, {{0, 1}, {1, 2}, {0, 2}}); }

/// Two triangles {0,1,2} and {2,3,4} sharing node 2.
inline cm::Graph bowtie() { return make_graph(5, {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {2, 4}, {3, 4}}); }

/// Two triangles {0,1,2} and {3,4,5} joined by the edge 2-3.
inline cm::Graph barbell() {
  return make_graph(6, {{0, 1}, {0, 2}, {1, 2}, {3, 4}, {3, 5}, {4, 5}, {2, 3}});
}

inline cm::Graph complete(std::size_t n) {
  std::vector<cm::Edge> e;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return make_graph(n, e);
}

inline cm::CrispCover cover(std::size_t n, std::vector<std::vector<cm::NodeId>> c) {
  return cm::CrispCover(n, std::move(c));
}

inline cm::ParsedGraph karate() { return cm::load_edge_list(COMMETRIC_DATA_DIR "/karate.edges"); }

inline oracle::Matrix membership_matrix(const cm::CrispCover& cc) {
  oracle::Matrix m(cc.node_count(), std::vector<double>(cc.community_count(), 0.0));
  for (std::size_t c = 0; c < cc.community_count(); ++c)
    for (auto i : cc.members(c)) m[i][c] = 1.0;
  return m;
}

inline oracle::Matrix adjacency(const cm::Graph& g) {
  oracle::Matrix a(g.node_count(), std::vector<double>(g.node_count(), 0.0));
  for (auto [u, v] : g.edges()) a[u][v] = a[v][u] = 1.0;
  return a;
}

inline oracle::Problem problem(const cm::Graph& g, const cm::FuzzyCover& fc) {
  oracle::Problem p{adjacency(g), oracle::Matrix(fc.node_count(), std::vector<double>(fc.community_count(), 0.0))};
  for (std::size_t i = 0; i < fc.node_count(); ++i)
    for (const auto& m : fc.memberships(i)) p.coef[i][m.community] = m.coefficient;
  return p;
}

inline oracle::Fn oracle_fn(const cm::BelongingFunction& f) {
  switch (f.kind) {
    case cm::BelongingKind::average: return oracle::Fn::average;
    case cm::BelongingKind::product: return oracle::Fn::product;
    default: return oracle::Fn::logistic;
  }
}

// ---------------------------------------------------------------------------
// Generators

using Rng = std::mt19937_64;

inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// G(n, p) conditioned on at least one edge.
inline cm::Graph random_graph(Rng& rng, std::size_t n, double p) {
  std::bernoulli_distribution coin(p);
  for (;;) {
    std::vector<cm::Edge> e;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (coin(rng)) e.emplace_back(i, j);
    if (!e.empty()) return make_graph(n, e);
  }
}

/// Partition of n nodes into at most k non-empty blocks.
inline cm::CrispCover random_partition(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::vector<cm::NodeId>> blocks(k);
  for (std::size_t i = 0; i < n; ++i) blocks[uniform(rng, 0, k - 1)].push_back(i);
  std::erase_if(blocks, [](const auto& b) { return b.empty(); });
  return cm::CrispCover(n, std::move(blocks));
}

/// Overlapping crisp cover: each node joins 1..max_overlap random communities.
inline cm::CrispCover random_crisp_cover(Rng& rng, std::size_t n, std::size_t k, std::size_t max_overlap) {
  std::vector<std::vector<cm::NodeId>> comms(k);
  std::vector<std::size_t> ids(k);
  std::iota(ids.begin(), ids.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::shuffle(ids.begin(), ids.end(), rng);
    const std::size_t o = uniform(rng, 1, std::min(k, max_overlap));
    for (std::size_t t = 0; t < o; ++t) comms[ids[t]].push_back(i);
  }
  std::erase_if(comms, [](const auto& b) { return b.empty(); });
  return cm::CrispCover(n, std::move(comms));
}

/// Fuzzy cover with rational coefficients w / W, integer weights in
/// [0, max_weight] (at least one positive per node).
inline cm::FuzzyCover random_fuzzy_cover(Rng& rng, std::size_t n, std::size_t k, std::size_t max_weight = 6) {
  std::vector<std::vector<cm::Membership>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> w(k);
    std::size_t total = 0;
    while (total == 0) {
      total = 0;
      for (auto& x : w) total += (x = uniform(rng, 0, max_weight));
    }
    for (std::size_t c = 0; c < k; ++c)
      if (w[c]) rows[i].push_back({c, static_cast<double>(w[c]) / static_cast<double>(total)});
  }
  return cm::FuzzyCover(k, std::move(rows));
}

// ---------------------------------------------------------------------------
// Relabeling

struct Relabeling {
  std::vector<std::size_t> node;       // old id -> new id
  std::vector<std::size_t> community;  // old id -> new id
};

inline Relabeling random_relabeling(Rng& rng, std::size_t n, std::size_t k) {
  Relabeling r{std::vector<std::size_t>(n), std::vector<std::size_t>(k)};
  std::iota(r.node.begin(), r.node.end(), 0);
  std::iota(r.community.begin(), r.community.end(), 0);
  std::shuffle(r.node.begin(), r.node.end(), rng);
  std::shuffle(r.community.begin(), r.community.end(), rng);
  return r;
}

inline cm::Graph relabel(const cm::Graph& g, const Relabeling& r) {
  std::vector<cm::Edge> e;
  for (auto [u, v] : g.edges()) e.emplace_back(r.node[u], r.node[v]);
  return make_graph(g.node_count(), e);
}

inline cm::CrispCover relabel(const cm::CrispCover& cc, const Relabeling& r) {
  std::vector<std::vector<cm::NodeId>> comms(cc.community_count());
  for (std::size_t c = 0; c < cc.community_count(); ++c)
    for (auto i : cc.members(c)) comms[r.community[c]].push_back(r.node[i]);
  return cm::CrispCover(cc.node_count(), std::move(comms));
}

inline cm::FuzzyCover relabel(const cm::FuzzyCover& fc, const Relabeling& r) {
  std::vector<std::vector<cm::Membership>> rows(fc.node_count());
  for (std::size_t i = 0; i < fc.node_count(); ++i)
    for (const auto& m : fc.memberships(i)) rows[r.node[i]].push_back({r.community[m.community], m.coefficient});
  return cm::FuzzyCover(fc.community_count(), std::move(rows));
}

}  // namespace support
