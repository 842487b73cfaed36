#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vertseq/errors.hpp"

namespace vertseq {

// The 24 labels the solver searches over, in cranio-caudal order. This index
// order is the serialization order of every per-label score vector.
enum class RawLabel : std::uint8_t {
  C1, C2, C3, C4, C5, C6, C7,
  T1, T2, T3, T4, T5, T6, T7, T8, T9, T10, T11, T12,
  L1, L2, L3, L4, L5,
};
inline constexpr int kNumRawLabels = 24;

// Decoded labels. T13 and L6 only ever come out of anomaly decoding.
enum class FinalLabel : std::uint8_t {
  C1, C2, C3, C4, C5, C6, C7,
  T1, T2, T3, T4, T5, T6, T7, T8, T9, T10, T11, T12, T13,
  L1, L2, L3, L4, L5, L6,
};
inline constexpr int kNumFinalLabels = 26;

enum class Region : std::uint8_t { Cervical, Thoracic, Lumbar };
inline constexpr int kNumRegions = 3;

// Serialization order of transition score vectors.
enum class TransitionKind : std::uint8_t {
  None,
  LastCervical,
  FirstThoracic,
  LastThoracic,
  FirstLumbar,
  LastLumbar,
};
inline constexpr int kNumTransitionKinds = 6;

constexpr int index_of(RawLabel label) { return static_cast<int>(label); }
constexpr int index_of(FinalLabel label) { return static_cast<int>(label); }
constexpr int index_of(Region region) { return static_cast<int>(region); }
constexpr int index_of(TransitionKind kind) { return static_cast<int>(kind); }

// Precondition: 0 <= index < kNumRawLabels.
constexpr RawLabel raw_label_at(int index) {
  return static_cast<RawLabel>(index);
}

constexpr Region region_of(RawLabel label) {
  const int i = index_of(label);
  if (i <= index_of(RawLabel::C7)) return Region::Cervical;
  if (i <= index_of(RawLabel::T12)) return Region::Thoracic;
  return Region::Lumbar;
}

Region region_of(FinalLabel label);

// T13 -> T12, L6 -> L5, everything else by name.
RawLabel encode(FinalLabel label);
// The plain (non-anomalous) decoding of a raw label.
FinalLabel to_final(RawLabel label);

std::string_view to_string(RawLabel label);
std::string_view to_string(FinalLabel label);
std::string_view to_string(Region region);
std::string_view to_string(TransitionKind kind);

std::optional<FinalLabel> parse_final_label(std::string_view text);
std::optional<RawLabel> parse_raw_label(std::string_view text);

// A candidate labelling in raw label space. gaps[i] is the number of labels
// skipped on the step into position i (gaps[0] is always 0). A T11 -> L1 step
// with gap 0 is the eleven-thoracic anomaly; with gap 1 it is a missing T12.
class RawPath {
 public:
  RawPath() = default;
  // An empty `gaps` means all steps carry marker 0.
  explicit RawPath(std::vector<RawLabel> labels, std::vector<int> gaps = {});

  // Gap markers inferred from the label jumps; T11 -> L1 is read as the
  // anomaly skip rather than a gap.
  static RawPath with_inferred_gaps(std::vector<RawLabel> labels);

  const std::vector<RawLabel>& labels() const { return labels_; }
  const std::vector<int>& gaps() const { return gaps_; }
  std::size_t size() const { return labels_.size(); }
  bool empty() const { return labels_.empty(); }
  RawLabel operator[](std::size_t i) const { return labels_[i]; }

  bool used_t12_double() const;
  bool used_l5_double() const;
  bool used_t11_skip() const;
  int anomaly_flag_count() const;
  // Total labels skipped by gap steps (the anomaly skip is not a gap).
  int skipped_labels() const;

  friend bool operator==(const RawPath&, const RawPath&) = default;

 private:
  std::vector<RawLabel> labels_;
  std::vector<int> gaps_;
};

enum class ViolationKind {
  EmptyPath,
  GapVectorMismatch,
  SpatialOrder,
  NonConsecutive,
  RepeatedLabel,
  T12DoubleReused,
  L5DoubleReused,
  T11SkipWithT12Double,
  GapNotAllowed,
  GapMarkerMismatch,
  TooManyCervical,
  TooManyThoracic,
  TooManyLumbar,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  // Index of the offending step's destination, or 0 for whole-path checks.
  std::size_t position = 0;

  friend bool operator==(const Violation&, const Violation&) = default;
};

// Returns every violated anatomical constraint; an empty result means valid.
std::vector<Violation> validate_sequence(const RawPath& path,
                                         bool gaps_allowed);

// Rewrites the second of a doubled T12 as T13 and the second of a doubled L5
// as L6. Throws InvalidPathError when the path is not a valid sequence.
std::vector<FinalLabel> decode_anomalies(const RawPath& path);

// Inverse of decode_anomalies: T13 -> T12, L6 -> L5, gap markers inferred.
RawPath encode_final(std::span<const FinalLabel> labels);

// A decoded sequence is acceptable as a reference when its encoding is a
// valid raw path with gaps allowed.
bool is_valid_reference(std::span<const FinalLabel> labels);

}  // namespace vertseq
