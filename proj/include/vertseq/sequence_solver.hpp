#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "vertseq/classifier_io.hpp"
#include "vertseq/cost_model.hpp"
#include "vertseq/label_space.hpp"

namespace vertseq {

struct PathResult {
  RawPath raw_path;
  std::vector<FinalLabel> final_labels;
  double total_cost = 0.0;
  // Decoded-sequence anomaly markers: a T13 or a T11 -> L1 adjacency for
  // TEA, an L6 for LEA. A four-lumbar ending is not flagged here.
  bool tea_flag = false;
  bool lea_flag = false;
};

// Costs within this distance of each other are treated as ties.
inline constexpr double kTieTolerance = 1e-9;

// Largest subject the brute-force oracle accepts.
inline constexpr std::size_t kBruteForceMaxVertebrae = 10;

// Longest chain any valid labelling can cover: 24 labels plus both doubles.
inline constexpr std::size_t kMaxPathLength = 26;

// Exact minimum-cost valid path. Ties go to the lexicographically smallest
// raw label sequence, then to the path with fewer anomaly flags.
// Throws ContractError for n == 0 and NoValidPathError when no valid path
// exists (n > 26).
PathResult solve(const NormalizedOutputs& norm, const SolverConfig& cfg);

// Enumerates every valid path, scores it with pathcost, and applies the same
// tie-break rule as solve. Throws ContractError above kBruteForceMaxVertebrae.
PathResult solve_bruteforce(const NormalizedOutputs& norm,
                            const SolverConfig& cfg);

// Calls `visit` for every raw path of length n accepted by validate_sequence,
// in depth-first order. Candidates are generated without reference to the
// solver's transition structure.
void enumerate_valid_paths(std::size_t n, bool gaps_allowed,
                           const std::function<void(const RawPath&)>& visit);

// Number of valid raw paths of length n, counted over the solver's state
// graph.
std::uint64_t count_valid_paths(std::size_t n, const SolverConfig& cfg);

PathResult make_result(RawPath path, const NormalizedOutputs& norm,
                       const CostMatrix& label_cost, const SolverConfig& cfg);

// Decoded-label anomaly predicates shared with the metrics.
bool has_tea(const std::vector<FinalLabel>& labels);
bool has_lea_l6(const std::vector<FinalLabel>& labels);

}  // namespace vertseq
