#pragma once

#include <bitset>
#include <cstddef>
#include <optional>
#include <vector>

#include "vertseq/classifier_io.hpp"
#include "vertseq/label_space.hpp"

namespace vertseq {

struct SolverConfig {
  double label_weight = 0.9;       // w_C
  double region_weight = 1.1;      // w_R
  double transition_weight = 0.6;  // w_T
  // Added once per anomaly category (TEA-type, LEA-type) present in a path.
  // Positive values penalize anomalous paths.
  double anomaly_gamma = 0.0;
  bool gaps_enabled = false;
  // Cost per skipped label on a gap step.
  double gap_penalty = 0.0;
  bool include_none_transition = true;

  void validate() const;
};

// L[i][j] = c_ij * w_C + r_ij * w_R.
class CostMatrix {
 public:
  CostMatrix() = default;
  explicit CostMatrix(std::vector<LabelVector> rows) : rows_(std::move(rows)) {}

  double operator()(std::size_t i, RawLabel j) const {
    return rows_[i][index_of(j)];
  }
  double operator()(std::size_t i, int j) const { return rows_[i][j]; }
  const std::vector<LabelVector>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<LabelVector> rows_;
};

CostMatrix build_label_cost(const NormalizedOutputs& norm,
                            const SolverConfig& cfg);

using TransitionSet = std::bitset<kNumTransitionKinds>;

// Which transition kinds a vertebra labelled `label` fulfils, given the label
// of its path successor (nullopt at the end of the path):
//   LastCervical  label is C7
//   FirstThoracic label is T1
//   LastThoracic  label is thoracic and the successor is lumbar
//   FirstLumbar   label is L1
//   LastLumbar    label is lumbar and there is no successor
//   None          none of the above
// The synthetic generator builds its transition targets from the same rules.
TransitionSet fulfilled_transitions(RawLabel label,
                                    std::optional<RawLabel> successor);

TransitionSet fulfilled_transitions(const RawPath& path, std::size_t i);

double transcondition(const RawPath& path, std::size_t i, TransitionKind kind,
                      const NormalizedOutputs& norm);

double transcost(const RawPath& path, std::size_t i,
                 const NormalizedOutputs& norm, const SolverConfig& cfg);

// w_T * sum of t[i][k] over the fulfilled kinds (None honours
// include_none_transition).
double transition_reward(const TransitionVector& t, TransitionSet fulfilled,
                         const SolverConfig& cfg);

// -sum_i s_i * (transcost(p, i) + L[i][p_i]), plus gamma for each anomaly
// category present, plus gap_penalty per skipped label when gaps are enabled.
// Throws ContractError when the path length differs from the subject size.
double pathcost(const RawPath& path, const NormalizedOutputs& norm,
                const CostMatrix& label_cost, const SolverConfig& cfg);

}  // namespace vertseq
