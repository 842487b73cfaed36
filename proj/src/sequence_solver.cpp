#include "vertseq/sequence_solver.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include <fmt/format.h>

namespace vertseq {
namespace {

// Anomaly budget bits carried in the DP state.
constexpr int kT12Double = 1;
constexpr int kL5Double = 2;
constexpr int kT11Skip = 4;
constexpr int kNumFlagSets = 8;

constexpr int kT11 = index_of(RawLabel::T11);
constexpr int kT12 = index_of(RawLabel::T12);
constexpr int kL1 = index_of(RawLabel::L1);
constexpr int kL5 = index_of(RawLabel::L5);

struct Edge {
  int to = 0;
  int flags = 0;
  int gap = 0;
  double extra = 0.0;  // gamma or gap penalty charged on this step
};

// Outgoing edges of every (label, flags) state, ordered by destination label
// and then by flag count so that the first feasible edge is the tie-break
// winner.
using EdgeTable = std::array<std::array<std::vector<Edge>, kNumFlagSets>,
                             kNumRawLabels>;

EdgeTable build_edges(const SolverConfig& cfg) {
  EdgeTable table;
  for (int a = 0; a < kNumRawLabels; ++a) {
    for (int f = 0; f < kNumFlagSets; ++f) {
      if ((f & kT12Double) && (f & kT11Skip)) continue;
      auto& out = table[a][f];
      if (a == kT12 && !(f & kT12Double) && !(f & kT11Skip)) {
        out.push_back({kT12, f | kT12Double, 0, cfg.anomaly_gamma});
      }
      if (a == kL5 && !(f & kL5Double)) {
        out.push_back({kL5, f | kL5Double, 0, cfg.anomaly_gamma});
      }
      if (a + 1 < kNumRawLabels) out.push_back({a + 1, f, 0, 0.0});
      for (int b = a + 2; b < kNumRawLabels; ++b) {
        if (cfg.gaps_enabled) {
          const int gap = b - a - 1;
          out.push_back({b, f, gap, cfg.gap_penalty * gap});
        }
        if (a == kT11 && b == kL1 && !(f & kT12Double) && !(f & kT11Skip)) {
          out.push_back({kL1, f | kT11Skip, 0, cfg.anomaly_gamma});
        }
      }
    }
  }
  return table;
}

// Per-vertebra cost split by what follows the vertebra on the path. Only the
// successor's existence and lumbar-ness change the fulfilled transitions.
enum Context { kAtEnd = 0, kBeforeNonLumbar = 1, kBeforeLumbar = 2 };

int context_of(int successor) {
  return region_of(raw_label_at(successor)) == Region::Lumbar
             ? kBeforeLumbar
             : kBeforeNonLumbar;
}

using VertexTerms = std::vector<std::array<std::array<double, 3>, kNumRawLabels>>;

VertexTerms build_vertex_terms(const NormalizedOutputs& norm,
                               const CostMatrix& label_cost,
                               const SolverConfig& cfg) {
  VertexTerms terms(norm.size());
  for (std::size_t i = 0; i < norm.size(); ++i) {
    for (int a = 0; a < kNumRawLabels; ++a) {
      const RawLabel label = raw_label_at(a);
      const std::array<std::optional<RawLabel>, 3> successors = {
          std::nullopt, RawLabel::T1, RawLabel::L2};
      for (int ctx = 0; ctx < 3; ++ctx) {
        const double reward = transition_reward(
            norm.t[i], fulfilled_transitions(label, successors[ctx]), cfg);
        terms[i][a][ctx] = -norm.s[i] * (reward + label_cost(i, a));
      }
    }
  }
  return terms;
}

// Cost-to-go table; `reachable` false marks states with no valid completion.
struct CostToGo {
  std::vector<std::array<std::array<double, kNumFlagSets>, kNumRawLabels>> cost;
  std::vector<std::array<std::array<bool, kNumFlagSets>, kNumRawLabels>>
      reachable;
};

CostToGo backward_pass(const VertexTerms& terms, const EdgeTable& edges) {
  const std::size_t n = terms.size();
  CostToGo ctg;
  ctg.cost.resize(n);
  ctg.reachable.resize(n);
  for (int a = 0; a < kNumRawLabels; ++a) {
    for (int f = 0; f < kNumFlagSets; ++f) {
      ctg.cost[n - 1][a][f] = terms[n - 1][a][kAtEnd];
      ctg.reachable[n - 1][a][f] = true;
    }
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    for (int a = 0; a < kNumRawLabels; ++a) {
      for (int f = 0; f < kNumFlagSets; ++f) {
        bool found = false;
        double best = 0.0;
        for (const Edge& e : edges[a][f]) {
          if (!ctg.reachable[i + 1][e.to][e.flags]) continue;
          const double cand = terms[i][a][context_of(e.to)] + e.extra +
                              ctg.cost[i + 1][e.to][e.flags];
          if (!found || cand < best) {
            best = cand;
            found = true;
          }
        }
        ctg.cost[i][a][f] = best;
        ctg.reachable[i][a][f] = found;
      }
    }
  }
  return ctg;
}

// Lexicographic order on raw labels, then fewer anomaly flags.
bool tie_break_less(const RawPath& a, const RawPath& b) {
  if (a.labels() != b.labels()) return a.labels() < b.labels();
  return a.anomaly_flag_count() < b.anomaly_flag_count();
}

}  // namespace

bool has_tea(const std::vector<FinalLabel>& labels) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == FinalLabel::T13) return true;
    if (i + 1 < labels.size() && labels[i] == FinalLabel::T11 &&
        labels[i + 1] == FinalLabel::L1) {
      return true;
    }
  }
  return false;
}

bool has_lea_l6(const std::vector<FinalLabel>& labels) {
  return std::find(labels.begin(), labels.end(), FinalLabel::L6) !=
         labels.end();
}

PathResult make_result(RawPath path, const NormalizedOutputs& norm,
                       const CostMatrix& label_cost, const SolverConfig& cfg) {
  PathResult out;
  out.total_cost = pathcost(path, norm, label_cost, cfg);
  out.final_labels = decode_anomalies(path);
  out.tea_flag = has_tea(out.final_labels);
  out.lea_flag = has_lea_l6(out.final_labels);
  out.raw_path = std::move(path);
  return out;
}

PathResult solve(const NormalizedOutputs& norm, const SolverConfig& cfg) {
  cfg.validate();
  const std::size_t n = norm.size();
  if (n == 0) throw ContractError("solve: subject has no vertebrae");

  const CostMatrix label_cost = build_label_cost(norm, cfg);
  const EdgeTable edges = build_edges(cfg);
  const VertexTerms terms = build_vertex_terms(norm, label_cost, cfg);
  const CostToGo ctg = backward_pass(terms, edges);

  int start = -1;
  double best = 0.0;
  for (int a = 0; a < kNumRawLabels; ++a) {
    if (!ctg.reachable[0][a][0]) continue;
    if (start < 0 || ctg.cost[0][a][0] < best) {
      best = ctg.cost[0][a][0];
      start = a;
    }
  }
  if (start < 0) {
    throw NoValidPathError(fmt::format(
        "no valid labelling for {} vertebrae (at most {} fit)", n,
        kMaxPathLength));
  }
  const double bound = best + kTieTolerance;

  // Smallest start label whose best completion is within the tie bound.
  for (int a = 0; a < kNumRawLabels; ++a) {
    if (ctg.reachable[0][a][0] && ctg.cost[0][a][0] <= bound) {
      start = a;
      break;
    }
  }

  std::vector<RawLabel> labels{raw_label_at(start)};
  std::vector<int> gaps{0};
  int label = start;
  int flags = 0;
  double prefix = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    // For each destination the cheapest edge has the widest set of in-bound
    // completions, since parallel edges (gap vs anomaly T11 -> L1) share
    // their suffix costs.
    const Edge* chosen = nullptr;
    for (const Edge& e : edges[label][flags]) {
      if (chosen && e.to != chosen->to) break;
      if (!ctg.reachable[i + 1][e.to][e.flags]) continue;
      const double value = prefix + terms[i][label][context_of(e.to)] +
                           e.extra + ctg.cost[i + 1][e.to][e.flags];
      if (value > bound) continue;
      if (!chosen || e.extra < chosen->extra) chosen = &e;
    }
    if (!chosen) {
      throw std::logic_error("solve: lost the optimal path during traceback");
    }
    prefix += terms[i][label][context_of(chosen->to)] + chosen->extra;
    label = chosen->to;
    flags = chosen->flags;
    labels.push_back(raw_label_at(label));
    gaps.push_back(chosen->gap);
  }

  RawPath path(std::move(labels), std::move(gaps));
  // A cheaper anomaly skip may still tie with the gap reading of the same
  // labels; the gap reading carries fewer flags.
  if (cfg.gaps_enabled && path.used_t11_skip()) {
    std::vector<int> alt_gaps = path.gaps();
    for (std::size_t i = 1; i < path.size(); ++i) {
      if (path[i - 1] == RawLabel::T11 && path[i] == RawLabel::L1) {
        alt_gaps[i] = 1;
      }
    }
    RawPath alt(path.labels(), std::move(alt_gaps));
    if (pathcost(alt, norm, label_cost, cfg) <= bound) path = std::move(alt);
  }
  return make_result(std::move(path), norm, label_cost, cfg);
}

void enumerate_valid_paths(std::size_t n, bool gaps_allowed,
                           const std::function<void(const RawPath&)>& visit) {
  if (n == 0) return;
  std::vector<RawLabel> labels;
  std::vector<int> gaps;
  labels.reserve(n);
  gaps.reserve(n);

  const std::function<void()> extend = [&]() {
    RawPath prefix(labels, gaps);
    if (!validate_sequence(prefix, gaps_allowed).empty()) return;
    if (labels.size() == n) {
      visit(prefix);
      return;
    }
    const int from = index_of(labels.back());
    for (int b = from; b < kNumRawLabels; ++b) {
      const int step = b - from;
      // Candidate gap markers; validate_sequence decides which are legal.
      const std::array<int, 2> markers{0, step >= 2 ? step - 1 : 0};
      for (int k = 0; k < (step >= 2 ? 2 : 1); ++k) {
        const int marker = markers[k];
        labels.push_back(raw_label_at(b));
        gaps.push_back(marker);
        extend();
        labels.pop_back();
        gaps.pop_back();
      }
    }
  };

  for (int a = 0; a < kNumRawLabels; ++a) {
    labels.assign(1, raw_label_at(a));
    gaps.assign(1, 0);
    extend();
  }
}

PathResult solve_bruteforce(const NormalizedOutputs& norm,
                            const SolverConfig& cfg) {
  cfg.validate();
  const std::size_t n = norm.size();
  if (n == 0) throw ContractError("solve_bruteforce: no vertebrae");
  if (n > kBruteForceMaxVertebrae) {
    throw ContractError(fmt::format(
        "solve_bruteforce: {} vertebrae exceeds the enumeration cap of {}", n,
        kBruteForceMaxVertebrae));
  }
  const CostMatrix label_cost = build_label_cost(norm, cfg);

  // One pass: keep every path within tolerance of the running minimum, then
  // filter against the final minimum.
  std::optional<double> best;
  std::vector<std::pair<double, RawPath>> near;
  enumerate_valid_paths(n, cfg.gaps_enabled, [&](const RawPath& p) {
    const double c = pathcost(p, norm, label_cost, cfg);
    if (best && c > *best + kTieTolerance) return;
    if (!best || c < *best) {
      best = c;
      std::erase_if(near, [&](const auto& e) {
        return e.first > c + kTieTolerance;
      });
    }
    near.emplace_back(c, p);
  });
  if (!best) throw NoValidPathError("solve_bruteforce: no valid path");

  const RawPath* winner = nullptr;
  for (const auto& [c, p] : near) {
    if (c > *best + kTieTolerance) continue;
    if (!winner || tie_break_less(p, *winner)) winner = &p;
  }
  return make_result(*winner, norm, label_cost, cfg);
}

std::uint64_t count_valid_paths(std::size_t n, const SolverConfig& cfg) {
  if (n == 0) return 0;
  const EdgeTable edges = build_edges(cfg);
  using Counts = std::array<std::array<std::uint64_t, kNumFlagSets>,
                            kNumRawLabels>;
  Counts current{};
  for (int a = 0; a < kNumRawLabels; ++a) current[a][0] = 1;
  for (std::size_t i = 1; i < n; ++i) {
    Counts next{};
    for (int a = 0; a < kNumRawLabels; ++a) {
      for (int f = 0; f < kNumFlagSets; ++f) {
        if (current[a][f] == 0) continue;
        for (const Edge& e : edges[a][f]) next[e.to][e.flags] += current[a][f];
      }
    }
    current = next;
  }
  std::uint64_t total = 0;
  for (const auto& row : current) {
    for (std::uint64_t c : row) total += c;
  }
  return total;
}

}  // namespace vertseq
