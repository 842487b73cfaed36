#include "vertseq/cost_model.hpp"

#include <cmath>

#include <fmt/format.h>

namespace vertseq {

void SolverConfig::validate() const {
  const auto check = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError(fmt::format("{} must be finite and >= 0", name));
    }
  };
  check(label_weight, "label_weight");
  check(region_weight, "region_weight");
  check(transition_weight, "transition_weight");
  check(gap_penalty, "gap_penalty");
  if (!std::isfinite(anomaly_gamma)) {
    throw ValidationError("anomaly_gamma must be finite");
  }
}

CostMatrix build_label_cost(const NormalizedOutputs& norm,
                            const SolverConfig& cfg) {
  std::vector<LabelVector> rows(norm.size());
  for (std::size_t i = 0; i < norm.size(); ++i) {
    for (int j = 0; j < kNumRawLabels; ++j) {
      rows[i][j] = norm.c[i][j] * cfg.label_weight +
                   norm.r_expanded[i][j] * cfg.region_weight;
    }
  }
  return CostMatrix(std::move(rows));
}

TransitionSet fulfilled_transitions(RawLabel label,
                                    std::optional<RawLabel> successor) {
  TransitionSet set;
  const Region region = region_of(label);
  set[index_of(TransitionKind::LastCervical)] = label == RawLabel::C7;
  set[index_of(TransitionKind::FirstThoracic)] = label == RawLabel::T1;
  set[index_of(TransitionKind::LastThoracic)] =
      region == Region::Thoracic && successor &&
      region_of(*successor) == Region::Lumbar;
  set[index_of(TransitionKind::FirstLumbar)] = label == RawLabel::L1;
  set[index_of(TransitionKind::LastLumbar)] =
      region == Region::Lumbar && !successor;
  set[index_of(TransitionKind::None)] = set.none();
  return set;
}

TransitionSet fulfilled_transitions(const RawPath& path, std::size_t i) {
  const std::optional<RawLabel> next =
      i + 1 < path.size() ? std::optional(path[i + 1]) : std::nullopt;
  return fulfilled_transitions(path[i], next);
}

double transcondition(const RawPath& path, std::size_t i, TransitionKind kind,
                      const NormalizedOutputs& norm) {
  if (!fulfilled_transitions(path, i)[index_of(kind)]) return 0.0;
  return norm.t[i][index_of(kind)];
}

double transition_reward(const TransitionVector& t, TransitionSet fulfilled,
                         const SolverConfig& cfg) {
  double sum = 0.0;
  for (int k = 0; k < kNumTransitionKinds; ++k) {
    if (!fulfilled[k]) continue;
    if (k == index_of(TransitionKind::None) && !cfg.include_none_transition) {
      continue;
    }
    sum += t[k];
  }
  return cfg.transition_weight * sum;
}

double transcost(const RawPath& path, std::size_t i,
                 const NormalizedOutputs& norm, const SolverConfig& cfg) {
  return transition_reward(norm.t[i], fulfilled_transitions(path, i), cfg);
}

double pathcost(const RawPath& path, const NormalizedOutputs& norm,
                const CostMatrix& label_cost, const SolverConfig& cfg) {
  if (path.size() != norm.size() || label_cost.size() != norm.size()) {
    throw ContractError(fmt::format(
        "pathcost: path has {} labels but the subject has {} vertebrae",
        path.size(), norm.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    total -= norm.s[i] *
             (transcost(path, i, norm, cfg) + label_cost(i, path[i]));
  }
  if (path.used_t12_double() || path.used_t11_skip()) {
    total += cfg.anomaly_gamma;
  }
  if (path.used_l5_double()) total += cfg.anomaly_gamma;
  if (cfg.gaps_enabled) total += cfg.gap_penalty * path.skipped_labels();
  return total;
}

}  // namespace vertseq
