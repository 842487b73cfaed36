#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vertseq/label_space.hpp"

namespace vertseq {

using LabelVector = std::array<double, kNumRawLabels>;
using RegionVector = std::array<double, kNumRegions>;
using TransitionVector = std::array<double, kNumTransitionKinds>;

// Raw classifier outputs for one vertebra. Each softmax head sums to 1.
struct VertebraScores {
  LabelVector label_scores{};
  RegionVector region_scores{};
  TransitionVector transition_scores{};
  double visibility = 1.0;

  friend bool operator==(const VertebraScores&,
                         const VertebraScores&) = default;
};

// One subject's vertebra chain in cranio-caudal order.
struct SubjectRecord {
  std::string subject_id;
  std::vector<VertebraScores> vertebrae;
  std::optional<std::vector<FinalLabel>> reference_labels;

  std::size_t size() const { return vertebrae.size(); }

  friend bool operator==(const SubjectRecord&,
                         const SubjectRecord&) = default;
};

// Post-processed scores ready for the cost model. r_expanded copies each
// region score onto every label of that region.
struct NormalizedOutputs {
  std::vector<LabelVector> c;
  std::vector<LabelVector> r_expanded;
  std::vector<TransitionVector> t;
  std::vector<double> s;

  std::size_t size() const { return c.size(); }
};

struct NormConfig {
  // In units of vertebra instances.
  double gaussian_sigma = 1.0;
  bool enable_smoothing = true;
  bool transition_column_norm = true;

  void validate() const;
};

inline constexpr double kSoftmaxSumTolerance = 1e-6;

// Throws ValidationError naming the first offending field.
void validate_subject(const SubjectRecord& subject);

// Parses one subject document (a single JSON object). Throws ParseError for
// malformed text or missing fields, SchemaError for wrong vector lengths or
// types, and ValidationError for out-of-range values.
SubjectRecord parse_subject(std::string_view document);

// Single-line JSON rendering; parse_subject(to_json_line(s)) == s.
std::string to_json_line(const SubjectRecord& subject);

// Discrete Gaussian taps for offsets -R..R with R = ceil(3 sigma), summing to
// one over that window. sigma == 0 gives the single tap {1}.
std::vector<double> gaussian_kernel(double sigma);

// Smooths along the vertebra axis, one column at a time, with zero padding
// past either end of the chain.
template <std::size_t N>
std::vector<std::array<double, N>> smooth_columns(
    const std::vector<std::array<double, N>>& rows, double sigma);

NormalizedOutputs normalize_outputs(const SubjectRecord& subject,
                                    const NormConfig& cfg);

// Wraps already-normalized values; region scores are expanded here.
NormalizedOutputs make_normalized(std::vector<LabelVector> c,
                                  std::vector<RegionVector> r,
                                  std::vector<TransitionVector> t,
                                  std::vector<double> s);

LabelVector expand_regions(const RegionVector& r);

}  // namespace vertseq
