#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "commetric/belonging.hpp"
#include "commetric/cover.hpp"
#include "commetric/errors.hpp"
#include "commetric/graph.hpp"

namespace commetric {

// ---------------------------------------------------------------------------
// Metric catalogue

enum class Metric {
  modularity,
  qov,
  qov_prime,
  qov_zhang,
  qov_edge,
  qds,
  qds_ov,
  intra_edges,
  intra_density,
  contraction,
  inter_edges,
  expansion,
  conductance,
};

inline constexpr std::array all_metrics = {
    Metric::modularity,  Metric::qov,           Metric::qov_prime,   Metric::qov_zhang,
    Metric::qov_edge,    Metric::qds,           Metric::qds_ov,      Metric::intra_edges,
    Metric::intra_density, Metric::contraction, Metric::inter_edges, Metric::expansion,
    Metric::conductance,
};

/// Rows of an experiment table, in display order.
inline constexpr std::array experiment_metrics = {
    Metric::qov,           Metric::qov_edge,    Metric::qds_ov,
    Metric::intra_edges,   Metric::intra_density, Metric::contraction,
    Metric::inter_edges,   Metric::expansion,   Metric::conductance,
};

inline std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::modularity: return "modularity";
    case Metric::qov: return "qov";
    case Metric::qov_prime: return "qov_prime";
    case Metric::qov_zhang: return "qov_zhang";
    case Metric::qov_edge: return "qov_edge";
    case Metric::qds: return "qds";
    case Metric::qds_ov: return "qds_ov";
    case Metric::intra_edges: return "intra_edges";
    case Metric::intra_density: return "intra_density";
    case Metric::contraction: return "contraction";
    case Metric::inter_edges: return "inter_edges";
    case Metric::expansion: return "expansion";
    case Metric::conductance: return "conductance";
  }
  return "?";
}

inline Metric parse_metric(std::string_view name) {
  for (Metric m : all_metrics) {
    if (metric_name(m) == name) return m;
  }
  throw ArgumentError("unknown metric '" + std::string(name) + "'");
}

/// Boundary-oriented metrics (inter-edges, expansion, conductance) improve
/// downwards; everything else improves upwards.
inline bool larger_is_better(Metric m) {
  return m != Metric::inter_edges && m != Metric::expansion && m != Metric::conductance;
}

// ---------------------------------------------------------------------------
// Per-community terms

struct CrossTerm {
  CommunityId other;
  double edges;    ///< |E_{c,c'}|
  double density;  ///< d_{c,c'}
};

/// Weighted edge counts and densities of one community under a belonging
/// function. `cross` lists only neighbours with a positive edge weight.
struct CommunityTerms {
  double e_in = 0.0;   ///< |E_c^in|
  double e_out = 0.0;  ///< |E_c^out|, counted once per membership of the far endpoint
  double d_in = 0.0;   ///< internal density, 0 when its denominator is 0
  double size = 0.0;   ///< sum of coefficients
  std::vector<CrossTerm> cross;
};

namespace detail {

inline void require_edges(const Graph& g) {
  if (g.edge_count() == 0) throw UndefinedMetricError("metric is undefined on a graph with no edges");
}

template <class Cover>
void require_same_nodes(const Graph& g, const Cover& cover) {
  if (g.node_count() != cover.node_count()) {
    throw ArgumentError("cover has " + std::to_string(cover.node_count()) + " nodes, graph has " +
                        std::to_string(g.node_count()));
  }
}

inline void require_pairwise_function(const BelongingFunction& f) {
  if (f.kind == BelongingKind::logistic) {
    throw ArgumentError("the logistic belonging function is only used by qov_edge");
  }
}

/// Weighted one-sided sums over a community's members, enough to evaluate
/// sum_{i in X, j in Y} w_i w_j f(a_i, b_j) for every separable f.
struct SideSums {
  double w = 0.0;   // sum w
  double wa = 0.0;  // sum w a
  double ws = 0.0;  // sum w s(a), logistic factor
};

inline SideSums side_sums(const BelongingFunction& f, std::span<const Member> members,
                          const Graph* weights) {
  SideSums s;
  for (const auto& m : members) {
    const double w = weights ? static_cast<double>(weights->degree(m.node)) : 1.0;
    s.w += w;
    s.wa += w * m.coefficient;
    if (f.kind == BelongingKind::logistic) s.ws += w * f.sigmoid(m.coefficient);
  }
  return s;
}

inline double pair_sum(const BelongingFunction& f, const SideSums& x, const SideSums& y) {
  switch (f.kind) {
    case BelongingKind::average:
      return 0.5 * (x.wa * y.w + x.w * y.wa);
    case BelongingKind::product:
      return x.wa * y.wa;
    case BelongingKind::logistic:
      return x.ws * y.ws;
  }
  return 0.0;
}

/// sum over unordered edges inside c of f(a_ic, a_jc), for every c.
inline std::vector<double> internal_edge_weights(const Graph& g, const FuzzyCover& fc,
                                                 const BelongingFunction& f) {
  std::vector<double> e_in(fc.community_count(), 0.0);
  for (NodeId i = 0; i < g.node_count(); ++i) {
    const auto mi = fc.memberships(i);
    for (NodeId j : g.neighbors(i)) {
      if (j <= i) continue;
      const auto mj = fc.memberships(j);
      std::size_t a = 0, b = 0;
      while (a < mi.size() && b < mj.size()) {
        if (mi[a].community < mj[b].community) {
          ++a;
        } else if (mj[b].community < mi[a].community) {
          ++b;
        } else {
          e_in[mi[a].community] += f(mi[a].coefficient, mj[b].coefficient);
          ++a;
          ++b;
        }
      }
    }
  }
  return e_in;
}

}  // namespace detail

/// Computes |E_c^in|, |E_c^out|, |E_{c,c'}|, d_c, d_{c,c'} and |c| for every
/// community. Pair sums run over ordered node pairs; the cross-density
/// denominator includes (i, i) when i belongs to both communities, the
/// internal-density denominator excludes i = j.
inline std::vector<CommunityTerms> community_terms(const Graph& g, const FuzzyCover& fc,
                                                   const BelongingFunction& f) {
  detail::require_same_nodes(g, fc);
  const std::size_t k = fc.community_count();
  std::vector<CommunityTerms> terms(k);

  const auto e_in = detail::internal_edge_weights(g, fc, f);
  std::unordered_map<std::uint64_t, double> cross;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    const auto mi = fc.memberships(i);
    for (NodeId j : g.neighbors(i)) {
      for (const auto& [c, a] : mi) {
        for (const auto& [d, b] : fc.memberships(j)) {
          if (c == d) continue;
          const double w = f(a, b);
          terms[c].e_out += w;
          cross[static_cast<std::uint64_t>(c) * k + d] += w;
        }
      }
    }
  }

  std::vector<detail::SideSums> sides(k);
  for (CommunityId c = 0; c < k; ++c) {
    auto& t = terms[c];
    t.e_in = e_in[c];
    sides[c] = detail::side_sums(f, fc.members(c), nullptr);
    t.size = sides[c].wa;
    double diagonal = 0.0;
    for (const auto& m : fc.members(c)) diagonal += f(m.coefficient, m.coefficient);
    const double pairs = detail::pair_sum(f, sides[c], sides[c]) - diagonal;
    t.d_in = pairs > 0.0 ? 2.0 * t.e_in / pairs : 0.0;
  }

  std::vector<std::pair<std::uint64_t, double>> flat(cross.begin(), cross.end());
  std::sort(flat.begin(), flat.end());
  for (const auto& [key, edges] : flat) {
    const CommunityId c = key / k;
    const CommunityId d = key % k;
    const double pairs = detail::pair_sum(f, sides[c], sides[d]);
    terms[c].cross.push_back({d, edges, pairs > 0.0 ? edges / pairs : 0.0});
  }
  return terms;
}

// ---------------------------------------------------------------------------
// Disjoint metrics

namespace detail {

struct PartitionCounts {
  std::vector<double> e_in;    // internal edges
  std::vector<double> volume;  // sum of degrees
  std::vector<double> size;    // member count
  std::unordered_map<std::uint64_t, double> cross;  // ordered (c, c') -> edge count
};

inline PartitionCounts partition_counts(const Graph& g, const CrispCover& cc, bool with_cross,
                                        std::string_view overlap_hint) {
  require_same_nodes(g, cc);
  if (!cc.is_partition()) {
    throw ArgumentError("cover has overlapping communities; use " + std::string(overlap_hint));
  }
  require_edges(g);
  const std::size_t k = cc.community_count();
  PartitionCounts pc{std::vector<double>(k, 0.0), std::vector<double>(k, 0.0),
                     std::vector<double>(k, 0.0), {}};
  for (NodeId i = 0; i < g.node_count(); ++i) {
    const CommunityId c = cc.memberships(i)[0];
    pc.volume[c] += static_cast<double>(g.degree(i));
    pc.size[c] += 1.0;
    for (NodeId j : g.neighbors(i)) {
      const CommunityId d = cc.memberships(j)[0];
      if (c == d) {
        if (i < j) pc.e_in[c] += 1.0;
      } else if (with_cross) {
        pc.cross[static_cast<std::uint64_t>(c) * k + d] += 1.0;
      }
    }
  }
  return pc;
}

}  // namespace detail

/// Newman modularity of a partition.
inline double modularity(const Graph& g, const CrispCover& cc) {
  const auto pc = detail::partition_counts(g, cc, false, "qov");
  const double m = static_cast<double>(g.edge_count());
  double q = 0.0;
  for (CommunityId c = 0; c < cc.community_count(); ++c) {
    const double share = pc.volume[c] / (2.0 * m);
    q += pc.e_in[c] / m - share * share;
  }
  return q;
}

/// Modularity density of a partition. Singleton communities have internal
/// density 0.
inline double qds(const Graph& g, const CrispCover& cc) {
  const auto pc = detail::partition_counts(g, cc, true, "qds_ov");
  const double m = static_cast<double>(g.edge_count());
  const std::size_t k = cc.community_count();
  std::vector<double> penalty(k, 0.0);
  std::vector<std::pair<std::uint64_t, double>> flat(pc.cross.begin(), pc.cross.end());
  std::sort(flat.begin(), flat.end());
  for (const auto& [key, edges] : flat) {
    const CommunityId c = key / k;
    const CommunityId d = key % k;
    penalty[c] += edges / (2.0 * m) * (edges / (pc.size[c] * pc.size[d]));
  }
  double q = 0.0;
  for (CommunityId c = 0; c < k; ++c) {
    const double n = pc.size[c];
    const double density = n > 1.0 ? 2.0 * pc.e_in[c] / (n * (n - 1.0)) : 0.0;
    const double share = pc.volume[c] / (2.0 * m) * density;
    q += pc.e_in[c] / m * density - share * share - penalty[c];
  }
  return q;
}

// ---------------------------------------------------------------------------
// Overlapping metrics

namespace detail {

inline double qov_from_terms(const std::vector<CommunityTerms>& terms, double m) {
  double q = 0.0;
  for (const auto& t : terms) {
    const double share = (2.0 * t.e_in + t.e_out) / (2.0 * m);
    q += t.e_in / m - share * share;
  }
  return q;
}

inline double qds_ov_from_terms(const std::vector<CommunityTerms>& terms, double m) {
  double q = 0.0;
  for (const auto& t : terms) {
    double penalty = 0.0;
    for (const auto& x : t.cross) penalty += x.edges / (2.0 * m) * x.density;
    const double share = (2.0 * t.e_in + t.e_out) / (2.0 * m) * t.d_in;
    q += t.e_in / m * t.d_in - share * share - penalty;
  }
  return q;
}

}  // namespace detail

/// Overlapping modularity in community-sum form. The out-term counts a
/// neighbour once for every other community it belongs to.
inline double qov(const Graph& g, const FuzzyCover& fc, const BelongingFunction& f) {
  detail::require_pairwise_function(f);
  detail::require_same_nodes(g, fc);
  detail::require_edges(g);
  return detail::qov_from_terms(community_terms(g, fc, f), static_cast<double>(g.edge_count()));
}

/// Overlapping modularity in pairwise form:
/// (1/2m) sum_c sum_{i,j in c} [A_ij - k_i k_j / 2m] f(a_ic, a_jc).
inline double qov_prime(const Graph& g, const FuzzyCover& fc, const BelongingFunction& f) {
  detail::require_pairwise_function(f);
  detail::require_same_nodes(g, fc);
  detail::require_edges(g);
  const double two_m = 2.0 * static_cast<double>(g.edge_count());
  const auto e_in = detail::internal_edge_weights(g, fc, f);
  double q = 0.0;
  for (CommunityId c = 0; c < fc.community_count(); ++c) {
    const auto s = detail::side_sums(f, fc.members(c), &g);
    q += 2.0 * e_in[c] / two_m - detail::pair_sum(f, s, s) / (two_m * two_m);
  }
  return q;
}

/// Overlapping modularity with the average belonging function inside
/// and (a_ic + 1 - a_jc) / 2 towards neighbours j outside c.
inline double qov_zhang(const Graph& g, const FuzzyCover& fc) {
  detail::require_same_nodes(g, fc);
  detail::require_edges(g);
  const auto f = BelongingFunction::average();
  const auto e_in = detail::internal_edge_weights(g, fc, f);
  std::vector<double> e_out(fc.community_count(), 0.0);
  for (NodeId i = 0; i < g.node_count(); ++i) {
    for (const auto& [c, a] : fc.memberships(i)) {
      std::size_t outside = 0;
      for (NodeId j : g.neighbors(i)) {
        if (fc.coefficient(j, c) == 0.0) ++outside;
      }
      e_out[c] += static_cast<double>(outside) * 0.5 * (a + 1.0);
    }
  }
  const double m = static_cast<double>(g.edge_count());
  double q = 0.0;
  for (CommunityId c = 0; c < fc.community_count(); ++c) {
    const double share = (2.0 * e_in[c] + e_out[c]) / (2.0 * m);
    q += e_in[c] / m - share * share;
  }
  return q;
}

/// Edge-based overlapping modularity with the logistic
/// edge coefficient F. Expected coefficients average F over every node of
/// the graph, so a disjoint cover does not recover Newman modularity.
inline double qov_edge(const Graph& g, const FuzzyCover& fc,
                       double p = BelongingFunction::default_steepness) {
  if (!(p > 0.0)) throw ArgumentError("logistic steepness p must be positive");
  detail::require_same_nodes(g, fc);
  detail::require_edges(g);
  const auto f = BelongingFunction::logistic(p);
  const double n = static_cast<double>(g.node_count());
  const double two_m = 2.0 * static_cast<double>(g.edge_count());
  const double s0 = f.sigmoid(0.0);
  const auto observed = detail::internal_edge_weights(g, fc, f);
  double q = 0.0;
  for (CommunityId c = 0; c < fc.community_count(); ++c) {
    const auto members = fc.members(c);
    const auto unit = detail::side_sums(f, members, nullptr);
    const auto by_degree = detail::side_sums(f, members, &g);
    // beta^e_i = s(a_ic) * (sum over all k in V of s(a_kc)) / |V|
    const double mean_s = (unit.ws + (n - static_cast<double>(members.size())) * s0) / n;
    const double expected = by_degree.ws * mean_s;
    q += 2.0 * observed[c] / two_m - expected * expected / (two_m * two_m);
  }
  return q;
}

/// Overlapping modularity density.
inline double qds_ov(const Graph& g, const FuzzyCover& fc, const BelongingFunction& f) {
  detail::require_pairwise_function(f);
  detail::require_same_nodes(g, fc);
  detail::require_edges(g);
  return detail::qds_ov_from_terms(community_terms(g, fc, f), static_cast<double>(g.edge_count()));
}

// ---------------------------------------------------------------------------
// Quality report

struct CommunityMetrics {
  CommunityId community = 0;
  double size = 0.0;
  double intra_edges = 0.0;
  double intra_density = 0.0;
  double contraction = 0.0;
  double inter_edges = 0.0;
  double expansion = 0.0;
  double conductance = 0.0;
};

/// Every quality value for one (graph, cover, belonging function) setting.
/// The six community metrics are aggregated as unweighted means over the
/// communities with positive size.
struct QualityReport {
  // configuration echo
  std::string scheme;
  BelongingFunction function;
  double logistic_p = BelongingFunction::default_steepness;
  std::optional<double> threshold;

  std::vector<CommunityTerms> terms;
  std::vector<CommunityMetrics> communities;
  std::vector<CommunityId> excluded;

  double qov = 0.0;
  double qov_edge = 0.0;
  double qds_ov = 0.0;
  double intra_edges = 0.0;
  double intra_density = 0.0;
  double contraction = 0.0;
  double inter_edges = 0.0;
  double expansion = 0.0;
  double conductance = 0.0;

  /// Value of one of the nine experiment metrics.
  double value(Metric m) const {
    switch (m) {
      case Metric::qov: return qov;
      case Metric::qov_edge: return qov_edge;
      case Metric::qds_ov: return qds_ov;
      case Metric::intra_edges: return intra_edges;
      case Metric::intra_density: return intra_density;
      case Metric::contraction: return contraction;
      case Metric::inter_edges: return inter_edges;
      case Metric::expansion: return expansion;
      case Metric::conductance: return conductance;
      default:
        throw ArgumentError("metric '" + std::string(metric_name(m)) + "' is not part of a report");
    }
  }

  /// Flat key/value record: configuration first, then the nine metrics.
  std::vector<std::pair<std::string, std::string>> flatten() const {
    std::vector<std::pair<std::string, std::string>> out;
    out.emplace_back("scheme", scheme);
    out.emplace_back("function", std::string(function.name()));
    out.emplace_back("logistic_p", detail::format_real(logistic_p));
    out.emplace_back("threshold", threshold ? detail::format_real(*threshold) : "");
    out.emplace_back("communities", std::to_string(communities.size()));
    for (Metric m : experiment_metrics) out.emplace_back(metric_name(m), detail::format_real(value(m)));
    return out;
  }
};

struct ReportOptions {
  double logistic_p = BelongingFunction::default_steepness;
  std::string scheme;
  std::optional<double> threshold;
};

inline QualityReport community_report(const Graph& g, const FuzzyCover& fc,
                                      const BelongingFunction& f, const ReportOptions& options = {},
                                      Diagnostics* diag = nullptr) {
  detail::require_pairwise_function(f);
  detail::require_same_nodes(g, fc);
  detail::require_edges(g);
  QualityReport r;
  r.scheme = options.scheme;
  r.function = f;
  r.logistic_p = options.logistic_p;
  r.threshold = options.threshold;
  r.terms = community_terms(g, fc, f);

  const double m = static_cast<double>(g.edge_count());
  r.qov = detail::qov_from_terms(r.terms, m);
  r.qds_ov = detail::qds_ov_from_terms(r.terms, m);
  r.qov_edge = qov_edge(g, fc, options.logistic_p);

  for (CommunityId c = 0; c < r.terms.size(); ++c) {
    const auto& t = r.terms[c];
    if (!(t.size > 0.0)) {
      r.excluded.push_back(c);
      warn(diag, "community " + std::to_string(c) + " has zero size; excluded from averages");
      continue;
    }
    const double boundary = 2.0 * t.e_in + t.e_out;
    r.communities.push_back({c, t.size, t.e_in, t.d_in, 2.0 * t.e_in / t.size, t.e_out,
                             t.e_out / t.size, boundary > 0.0 ? t.e_out / boundary : 0.0});
  }
  if (!r.communities.empty()) {
    const double count = static_cast<double>(r.communities.size());
    for (const auto& cm : r.communities) {
      r.intra_edges += cm.intra_edges;
      r.intra_density += cm.intra_density;
      r.contraction += cm.contraction;
      r.inter_edges += cm.inter_edges;
      r.expansion += cm.expansion;
      r.conductance += cm.conductance;
    }
    r.intra_edges /= count;
    r.intra_density /= count;
    r.contraction /= count;
    r.inter_edges /= count;
    r.expansion /= count;
    r.conductance /= count;
  }
  return r;
}

}  // namespace commetric
