#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vertseq/label_space.hpp"

namespace vertseq {

// A predicted and a reference decoded sequence for one subject.
struct LabelPair {
  std::vector<FinalLabel> predicted;
  std::vector<FinalLabel> reference;
};

struct EvalReport {
  double plp = 0.0;
  double subject_correctness_mean = 0.0;
  double subject_correctness_std = 0.0;
  // Absent when the references contain no case of that category.
  std::optional<double> tea_recall;
  std::optional<double> lea_recall;
  std::size_t n_subjects = 0;
  std::size_t n_tea_cases = 0;
  std::size_t n_lea_cases = 0;
};

// Percentage of subjects labelled correctly at every vertebra.
double perfect_label_percentage(const std::vector<LabelPair>& pairs);

// Mean and population standard deviation of the per-subject percentage of
// correctly labelled vertebrae.
std::pair<double, double> subject_correctness(
    const std::vector<LabelPair>& pairs);

// A reference is a thoracic-anomaly case when it contains a T11 -> L1
// adjacency or a T13. The prediction is correct when it has the same T11,L1
// pair (or the T13) at the same positions.
bool is_tea_case(const std::vector<FinalLabel>& reference);
bool tea_detected(const LabelPair& pair);
std::optional<double> tea_recall(const std::vector<LabelPair>& pairs);

// A reference is a lumbar-anomaly case when it ends on L4 or contains an L6.
// The prediction is correct when it also ends on L4, or has the L6 at the
// same position.
bool is_lea_case(const std::vector<FinalLabel>& reference);
bool lea_detected(const LabelPair& pair);
std::optional<double> lea_recall(const std::vector<LabelPair>& pairs);

// All four metrics. Throws ContractError on an empty list or a length
// mismatch within a pair.
EvalReport evaluate(const std::vector<LabelPair>& pairs);

std::string to_json(const EvalReport& report);

inline constexpr const char* kCsvHeader =
    "param,plp,subj_corr_mean,subj_corr_std,tea_recall,lea_recall,n";

// `param,...` row matching kCsvHeader; absent recalls are empty cells.
std::string to_csv_row(const std::string& param, const EvalReport& report);

}  // namespace vertseq
