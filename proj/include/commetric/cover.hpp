#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "commetric/errors.hpp"
#include "commetric/graph.hpp"

namespace commetric {

using CommunityId = std::size_t;

/// What to do with nodes that no community covers.
enum class OrphanPolicy {
  reject,     ///< throw InputError listing the orphans
  singleton,  ///< give each orphan its own community, appended in node order
};

/// Binary node-to-community membership. Nodes may belong to several
/// communities; every community is non-empty and every node is covered.
class CrispCover {
 public:
  CrispCover() = default;

  CrispCover(std::size_t node_count, std::vector<std::vector<NodeId>> communities,
             OrphanPolicy orphans = OrphanPolicy::reject)
      : communities_(std::move(communities)), memberships_(node_count) {
    for (std::size_t c = 0; c < communities_.size(); ++c) {
      auto& members = communities_[c];
      if (members.empty()) throw InputError("community " + std::to_string(c) + " is empty");
      std::sort(members.begin(), members.end());
      members.erase(std::unique(members.begin(), members.end()), members.end());
      for (NodeId i : members) {
        if (i >= node_count) {
          throw InputError("community " + std::to_string(c) + " references node " +
                           std::to_string(i) + " outside 0.." + std::to_string(node_count) +
                           "-1");
        }
        memberships_[i].push_back(c);
      }
    }
    std::vector<NodeId> orphans_found;
    for (NodeId i = 0; i < node_count; ++i) {
      if (memberships_[i].empty()) orphans_found.push_back(i);
    }
    if (orphans_found.empty()) return;
    if (orphans == OrphanPolicy::reject) {
      std::string list;
      for (NodeId i : orphans_found) list += (list.empty() ? "" : ", ") + std::to_string(i);
      throw InputError("nodes not covered by any community: " + list);
    }
    for (NodeId i : orphans_found) {
      memberships_[i].push_back(communities_.size());
      communities_.push_back({i});
    }
  }

  std::size_t node_count() const noexcept { return memberships_.size(); }
  std::size_t community_count() const noexcept { return communities_.size(); }

  std::span<const NodeId> members(CommunityId c) const { return communities_.at(c); }
  std::span<const CommunityId> memberships(NodeId i) const { return memberships_.at(i); }

  /// Number of communities containing node i.
  std::size_t overlap(NodeId i) const { return memberships_.at(i).size(); }

  bool is_partition() const noexcept {
    return std::all_of(memberships_.begin(), memberships_.end(),
                       [](const auto& m) { return m.size() == 1; });
  }

  const std::vector<std::vector<NodeId>>& communities() const noexcept { return communities_; }

  friend bool operator==(const CrispCover&, const CrispCover&) = default;

 private:
  std::vector<std::vector<NodeId>> communities_;
  std::vector<std::vector<CommunityId>> memberships_;
};

struct Membership {
  CommunityId community;
  double coefficient;

  friend bool operator==(const Membership&, const Membership&) = default;
};

struct Member {
  NodeId node;
  double coefficient;

  friend bool operator==(const Member&, const Member&) = default;
};

/// Belonging coefficients a(i, c), stored sparsely (absent means exactly 0).
///
/// Every coefficient lies in [0, 1] and each node's coefficients sum to 1.
/// Communities may have empty columns.
class FuzzyCover {
 public:
  static constexpr double default_tolerance = 1e-9;

  FuzzyCover() = default;

  /// `rows[i]` lists node i's memberships in any order. Zero coefficients
  /// are dropped. Throws InputError if a coefficient is outside [0, 1], a
  /// community id repeats or is out of range, or a row sum differs from 1 by
  /// more than `tolerance`.
  FuzzyCover(std::size_t community_count, std::vector<std::vector<Membership>> rows,
             double tolerance = default_tolerance)
      : rows_(std::move(rows)), columns_(community_count) {
    for (NodeId i = 0; i < rows_.size(); ++i) {
      auto& row = rows_[i];
      std::sort(row.begin(), row.end(),
                [](const Membership& a, const Membership& b) { return a.community < b.community; });
      double sum = 0.0;
      for (std::size_t k = 0; k < row.size(); ++k) {
        const auto [c, a] = row[k];
        if (c >= community_count) {
          throw InputError("node " + std::to_string(i) + " references community " +
                           std::to_string(c) + " outside 0.." +
                           std::to_string(community_count) + "-1");
        }
        if (k > 0 && row[k - 1].community == c) {
          throw InputError("node " + std::to_string(i) + " lists community " +
                           std::to_string(c) + " twice");
        }
        if (!(a >= 0.0 && a <= 1.0)) {
          throw InputError("coefficient " + std::to_string(a) + " of node " + std::to_string(i) +
                           " is outside [0, 1]");
        }
        sum += a;
      }
      if (std::abs(sum - 1.0) > tolerance) {
        throw InputError("coefficients of node " + std::to_string(i) + " sum to " +
                         std::to_string(sum) + ", expected 1");
      }
      std::erase_if(row, [](const Membership& m) { return m.coefficient == 0.0; });
      for (const auto& m : row) columns_[m.community].push_back({i, m.coefficient});
    }
  }

  std::size_t node_count() const noexcept { return rows_.size(); }
  std::size_t community_count() const noexcept { return columns_.size(); }

  /// Node i's positive memberships, ascending by community.
  std::span<const Membership> memberships(NodeId i) const { return rows_.at(i); }

  /// Community c's positive members, ascending by node.
  std::span<const Member> members(CommunityId c) const { return columns_.at(c); }

  double coefficient(NodeId i, CommunityId c) const {
    const auto& row = rows_.at(i);
    auto it = std::lower_bound(row.begin(), row.end(), c,
                               [](const Membership& m, CommunityId id) { return m.community < id; });
    return (it != row.end() && it->community == c) ? it->coefficient : 0.0;
  }

  bool is_partition() const noexcept {
    return std::all_of(rows_.begin(), rows_.end(),
                       [](const auto& r) { return r.size() == 1 && r[0].coefficient == 1.0; });
  }

  friend bool operator==(const FuzzyCover&, const FuzzyCover&) = default;

 private:
  std::vector<std::vector<Membership>> rows_;
  std::vector<std::vector<Member>> columns_;
};

// ---------------------------------------------------------------------------
// Conversions

/// a(i, c) = 1 / O_i for every community c containing i.
inline FuzzyCover crisp_to_fuzzy_count(const CrispCover& cc) {
  std::vector<std::vector<Membership>> rows(cc.node_count());
  for (NodeId i = 0; i < cc.node_count(); ++i) {
    const auto ms = cc.memberships(i);
    const double a = 1.0 / static_cast<double>(ms.size());
    for (CommunityId c : ms) rows[i].push_back({c, a});
  }
  return FuzzyCover(cc.community_count(), std::move(rows));
}

/// a(i, c) proportional to the number of i's neighbors inside c, normalized
/// over the communities containing i. A node with no neighbor in any of its
/// communities falls back to 1 / O_i (reported through `diag`).
inline FuzzyCover crisp_to_fuzzy_strength(const CrispCover& cc, const Graph& g,
                                          Diagnostics* diag = nullptr) {
  if (g.node_count() != cc.node_count()) {
    throw InputError("cover has " + std::to_string(cc.node_count()) + " nodes, graph has " +
                     std::to_string(g.node_count()));
  }
  std::vector<std::vector<Membership>> rows(cc.node_count());
  std::vector<double> links;
  for (NodeId i = 0; i < cc.node_count(); ++i) {
    const auto own = cc.memberships(i);
    links.assign(own.size(), 0.0);
    for (NodeId k : g.neighbors(i)) {
      // Both membership lists are sorted; count each shared community.
      const auto theirs = cc.memberships(k);
      std::size_t a = 0, b = 0;
      while (a < own.size() && b < theirs.size()) {
        if (own[a] < theirs[b]) {
          ++a;
        } else if (theirs[b] < own[a]) {
          ++b;
        } else {
          links[a] += 1.0;
          ++a;
          ++b;
        }
      }
    }
    double total = 0.0;
    for (double l : links) total += l;
    if (total == 0.0) {
      warn(diag, "node " + std::to_string(i) +
                     " has no neighbor in its communities; using 1/O_i coefficients");
      const double a = 1.0 / static_cast<double>(own.size());
      for (CommunityId c : own) rows[i].push_back({c, a});
      continue;
    }
    for (std::size_t k = 0; k < own.size(); ++k) rows[i].push_back({own[k], links[k] / total});
  }
  return FuzzyCover(cc.community_count(), std::move(rows));
}

/// Keeps node i in community c iff a(i, c) > threshold. A node left with no
/// community is placed in its highest-coefficient community (lowest id on
/// ties). Communities that end up empty are dropped; survivors keep their
/// relative order.
inline CrispCover fuzzy_to_crisp(const FuzzyCover& fc, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ArgumentError("threshold must lie in [0, 1], got " + std::to_string(threshold));
  }
  std::vector<std::vector<NodeId>> members(fc.community_count());
  for (NodeId i = 0; i < fc.node_count(); ++i) {
    bool kept = false;
    const Membership* best = nullptr;
    for (const auto& m : fc.memberships(i)) {
      if (m.coefficient > threshold) {
        members[m.community].push_back(i);
        kept = true;
      }
      if (!best || m.coefficient > best->coefficient) best = &m;
    }
    if (!kept && best) members[best->community].push_back(i);
  }
  std::erase_if(members, [](const auto& m) { return m.empty(); });
  return CrispCover(fc.node_count(), std::move(members));
}

/// Fuzzy size: sum of the community's belonging coefficients.
inline double community_size(const FuzzyCover& fc, CommunityId c) {
  if (c >= fc.community_count()) {
    throw ArgumentError("unknown community id " + std::to_string(c));
  }
  double s = 0.0;
  for (const auto& m : fc.members(c)) s += m.coefficient;
  return s;
}

// ---------------------------------------------------------------------------
// Text formats

namespace detail {

// Lines after the last non-blank line are ignored; any other blank line is an
// empty community.
inline std::vector<std::string> read_community_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

inline std::string describe_orphans(const std::vector<NodeId>& orphans, const NodeLabels& labels) {
  std::string list;
  for (NodeId i : orphans) list += (list.empty() ? "" : ", ") + labels.name(i);
  return "nodes not covered by any community: " + list;
}

inline double parse_real(std::string_view text, std::size_t lineno) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(lineno, "invalid number '" + std::string(text) + "'");
  }
  return value;
}

inline std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

}  // namespace detail

/// One community per line, whitespace-separated node labels known to `labels`.
inline CrispCover parse_crisp_cover(std::istream& in, const NodeLabels& labels,
                                    OrphanPolicy orphans = OrphanPolicy::reject) {
  const auto lines = detail::read_community_lines(in);
  std::vector<std::vector<NodeId>> communities;
  std::vector<bool> covered(labels.size(), false);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto tok = detail::split_ws(lines[k]);
    if (tok.empty()) throw ParseError(k + 1, "empty community");
    auto& comm = communities.emplace_back();
    for (auto t : tok) {
      const auto id = labels.find(t);
      if (!id) throw ParseError(k + 1, "unknown node label '" + std::string(t) + "'");
      comm.push_back(*id);
      covered[*id] = true;
    }
  }
  if (orphans == OrphanPolicy::reject) {
    std::vector<NodeId> missing;
    for (NodeId i = 0; i < covered.size(); ++i) {
      if (!covered[i]) missing.push_back(i);
    }
    if (!missing.empty()) throw InputError(detail::describe_orphans(missing, labels));
  }
  return CrispCover(labels.size(), std::move(communities), orphans);
}

inline CrispCover parse_crisp_cover(std::string_view text, const NodeLabels& labels,
                                    OrphanPolicy orphans = OrphanPolicy::reject) {
  std::istringstream in{std::string(text)};
  return parse_crisp_cover(in, labels, orphans);
}

/// One community per line, entries `label:coefficient`. Row sums must be
/// within `tolerance` of 1; rows are then rescaled to sum to 1 exactly (up to
/// rounding). Orphans are always rejected because they have no coefficients.
inline FuzzyCover parse_fuzzy_cover(std::istream& in, const NodeLabels& labels,
                                    double tolerance = 1e-6) {
  const auto lines = detail::read_community_lines(in);
  std::vector<std::vector<Membership>> rows(labels.size());
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto tok = detail::split_ws(lines[k]);
    if (tok.empty()) throw ParseError(k + 1, "empty community");
    for (auto t : tok) {
      const auto colon = t.rfind(':');
      if (colon == std::string_view::npos) {
        throw ParseError(k + 1, "expected label:coefficient, got '" + std::string(t) + "'");
      }
      const auto id = labels.find(t.substr(0, colon));
      if (!id) {
        throw ParseError(k + 1, "unknown node label '" + std::string(t.substr(0, colon)) + "'");
      }
      const double a = detail::parse_real(t.substr(colon + 1), k + 1);
      if (!(a >= 0.0 && a <= 1.0)) {
        throw ParseError(k + 1, "coefficient of '" + std::string(t.substr(0, colon)) +
                                    "' is outside [0, 1]");
      }
      rows[*id].push_back({k, a});
    }
  }
  std::vector<NodeId> missing;
  for (NodeId i = 0; i < rows.size(); ++i) {
    double sum = 0.0;
    for (const auto& m : rows[i]) sum += m.coefficient;
    if (sum == 0.0) {
      missing.push_back(i);
      continue;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      throw InputError("coefficients of node '" + labels.name(i) + "' sum to " +
                       detail::format_real(sum) + ", expected 1");
    }
    for (auto& m : rows[i]) m.coefficient /= sum;
  }
  if (!missing.empty()) throw InputError(detail::describe_orphans(missing, labels));
  return FuzzyCover(lines.size(), std::move(rows));
}

inline FuzzyCover parse_fuzzy_cover(std::string_view text, const NodeLabels& labels,
                                    double tolerance = 1e-6) {
  std::istringstream in{std::string(text)};
  return parse_fuzzy_cover(in, labels, tolerance);
}

inline CrispCover load_crisp_cover(const std::filesystem::path& path, const NodeLabels& labels,
                                   OrphanPolicy orphans = OrphanPolicy::reject) {
  auto in = detail::open_input(path);
  try {
    return parse_crisp_cover(in, labels, orphans);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

inline FuzzyCover load_fuzzy_cover(const std::filesystem::path& path, const NodeLabels& labels) {
  auto in = detail::open_input(path);
  try {
    return parse_fuzzy_cover(in, labels);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

inline void write_crisp_cover(std::ostream& out, const CrispCover& cc, const NodeLabels& labels) {
  for (const auto& comm : cc.communities()) {
    for (std::size_t k = 0; k < comm.size(); ++k) out << (k ? " " : "") << labels.name(comm[k]);
    out << '\n';
  }
}

/// Coefficients are written in shortest round-trip form. Empty columns are
/// skipped because the format has no way to express them.
inline void write_fuzzy_cover(std::ostream& out, const FuzzyCover& fc, const NodeLabels& labels) {
  for (CommunityId c = 0; c < fc.community_count(); ++c) {
    const auto ms = fc.members(c);
    if (ms.empty()) continue;
    for (std::size_t k = 0; k < ms.size(); ++k) {
      out << (k ? " " : "") << labels.name(ms[k].node) << ':'
          << detail::format_real(ms[k].coefficient);
    }
    out << '\n';
  }
}

}  // namespace commetric
