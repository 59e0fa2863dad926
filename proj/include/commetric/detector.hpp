#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "commetric/cover.hpp"
#include "commetric/errors.hpp"
#include "commetric/graph.hpp"

// Speaker-listener label propagation with per-node label memory.
//
// Every node starts with its own id as its only remembered label. Each
// iteration visits the nodes in a fresh random order; the visited node
// (listener) receives the dominant label (most frequent, lowest id on ties)
// of every neighbour (speaker) and appends the most popular received label
// to its own memory, breaking ties uniformly at random. A node without
// neighbours re-remembers its dominant label. After T iterations each memory
// holds T + 1 labels and node i keeps label l iff freq(l) / (T + 1) >= r.
//
// Speaking the dominant label makes agreement absorbing: once a group of
// nodes share a dominant label they only ever hear and store that label.
//
// All randomness comes from one std::mt19937_64 stream seeded with the given
// seed. Bounded draws use rejection sampling on the raw 64-bit output (see
// uniform_below), and shuffles are a plain Fisher-Yates pass, so results do
// not depend on the standard library's distribution implementations.

namespace commetric {

using Label = NodeId;

/// Uniform integer in [0, bound) from one or more raw generator outputs.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = (0 - bound) % bound;  // 2^64 mod bound
  for (;;) {
    const std::uint64_t x = rng();
    if (x >= limit) return x % bound;
  }
}

/// Fisher-Yates, from the back.
template <class T>
void shuffle_in_place(std::span<T> items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

/// Per-node label history.
class LabelMemory {
 public:
  explicit LabelMemory(std::size_t node_count)
      : labels_(node_count), counts_(node_count), dominant_(node_count) {
    for (NodeId i = 0; i < node_count; ++i) {
      labels_[i].push_back(i);
      counts_[i][i] = 1;
      dominant_[i] = i;
    }
  }

  std::size_t node_count() const noexcept { return labels_.size(); }
  std::span<const Label> labels(NodeId i) const { return labels_.at(i); }

  void remember(NodeId i, Label l) {
    labels_[i].push_back(l);
    auto& counts = counts_[i];
    const std::size_t n = ++counts[l];
    const std::size_t best = counts[dominant_[i]];
    if (n > best || (n == best && l < dominant_[i])) dominant_[i] = l;
  }

  /// Label -> count, ascending by label.
  const std::map<Label, std::size_t>& histogram(NodeId i) const { return counts_.at(i); }

  /// Most frequent label, lowest label on ties.
  Label dominant(NodeId i) const { return dominant_.at(i); }

 private:
  std::vector<std::vector<Label>> labels_;
  std::vector<std::map<Label, std::size_t>> counts_;
  std::vector<Label> dominant_;
};

inline LabelMemory propagate_labels(const Graph& g, std::size_t iterations, std::mt19937_64& rng) {
  LabelMemory memory(g.node_count());
  std::vector<NodeId> order(g.node_count());
  for (NodeId i = 0; i < order.size(); ++i) order[i] = i;
  std::map<Label, std::size_t> heard;
  std::vector<Label> tied;
  for (std::size_t t = 0; t < iterations; ++t) {
    shuffle_in_place(std::span<NodeId>(order), rng);
    for (NodeId listener : order) {
      const auto speakers = g.neighbors(listener);
      if (speakers.empty()) {
        memory.remember(listener, memory.dominant(listener));
        continue;
      }
      heard.clear();
      for (NodeId s : speakers) ++heard[memory.dominant(s)];
      std::size_t top = 0;
      for (const auto& [l, n] : heard) top = std::max(top, n);
      tied.clear();
      for (const auto& [l, n] : heard) {
        if (n == top) tied.push_back(l);
      }
      const Label pick = tied.size() == 1
                             ? tied.front()
                             : tied[static_cast<std::size_t>(uniform_below(rng, tied.size()))];
      memory.remember(listener, pick);
    }
  }
  return memory;
}

/// Post-processing: node i joins the community of every label whose memory
/// frequency reaches r. With r = 0.5 at most the lowest such label is kept;
/// a node with no qualifying label keeps its dominant one. Communities are
/// ordered by label and exact duplicates are merged.
inline CrispCover extract_cover(const LabelMemory& memory, double r) {
  std::map<Label, std::vector<NodeId>> groups;
  for (NodeId i = 0; i < memory.node_count(); ++i) {
    const double total = static_cast<double>(memory.labels(i).size());
    bool any = false;
    for (const auto& [l, n] : memory.histogram(i)) {
      if (static_cast<double>(n) / total >= r) {
        groups[l].push_back(i);
        any = true;
        if (r >= 0.5) break;
      }
    }
    if (!any) groups[memory.dominant(i)].push_back(i);
  }
  std::vector<std::vector<NodeId>> communities;
  for (auto& [l, nodes] : groups) {
    if (std::find(communities.begin(), communities.end(), nodes) == communities.end()) {
      communities.push_back(std::move(nodes));
    }
  }
  return CrispCover(memory.node_count(), std::move(communities));
}

/// Seeded overlapping label propagation. Bit-identical output for a fixed
/// (graph, iterations, r, seed).
inline CrispCover lpa_detect(const Graph& g, std::size_t iterations, double r, std::uint64_t seed) {
  if (iterations < 1) throw ArgumentError("iterations must be at least 1");
  if (!(r > 0.0 && r <= 0.5)) {
    throw ArgumentError("threshold r must lie in (0, 0.5], got " + std::to_string(r));
  }
  if (g.node_count() == 0) throw ArgumentError("graph has no nodes");
  std::mt19937_64 rng(seed);
  return extract_cover(propagate_labels(g, iterations, rng), r);
}

}  // namespace commetric
