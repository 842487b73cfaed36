#include "vertseq/label_space.hpp"

#include <algorithm>

namespace vertseq {
namespace {

constexpr std::array<std::string_view, kNumFinalLabels> kFinalNames = {
    "C1",  "C2",  "C3",  "C4",  "C5",  "C6",  "C7", "T1", "T2",
    "T3",  "T4",  "T5",  "T6",  "T7",  "T8",  "T9", "T10", "T11",
    "T12", "T13", "L1",  "L2",  "L3",  "L4",  "L5", "L6",
};

constexpr std::array<std::string_view, kNumTransitionKinds> kTransitionNames = {
    "None",       "LastCervical", "FirstThoracic",
    "LastThoracic", "FirstLumbar", "LastLumbar",
};

}  // namespace

Region region_of(FinalLabel label) {
  if (label == FinalLabel::T13) return Region::Thoracic;
  if (label == FinalLabel::L6) return Region::Lumbar;
  return region_of(encode(label));
}

RawLabel encode(FinalLabel label) {
  const int i = index_of(label);
  if (i <= index_of(FinalLabel::T12)) return raw_label_at(i);
  if (label == FinalLabel::T13) return RawLabel::T12;
  if (label == FinalLabel::L6) return RawLabel::L5;
  return raw_label_at(i - 1);  // L1..L5 sit one past T13
}

FinalLabel to_final(RawLabel label) {
  const int i = index_of(label);
  if (i <= index_of(RawLabel::T12)) return static_cast<FinalLabel>(i);
  return static_cast<FinalLabel>(i + 1);
}

std::string_view to_string(RawLabel label) {
  return to_string(to_final(label));
}

std::string_view to_string(FinalLabel label) {
  return kFinalNames[index_of(label)];
}

std::string_view to_string(Region region) {
  switch (region) {
    case Region::Cervical: return "cervical";
    case Region::Thoracic: return "thoracic";
    case Region::Lumbar: return "lumbar";
  }
  return "?";
}

std::string_view to_string(TransitionKind kind) {
  return kTransitionNames[index_of(kind)];
}

std::optional<FinalLabel> parse_final_label(std::string_view text) {
  const auto it = std::find(kFinalNames.begin(), kFinalNames.end(), text);
  if (it == kFinalNames.end()) return std::nullopt;
  return static_cast<FinalLabel>(it - kFinalNames.begin());
}

std::optional<RawLabel> parse_raw_label(std::string_view text) {
  const auto final = parse_final_label(text);
  if (!final || *final == FinalLabel::T13 || *final == FinalLabel::L6) {
    return std::nullopt;
  }
  return encode(*final);
}

RawPath::RawPath(std::vector<RawLabel> labels, std::vector<int> gaps)
    : labels_(std::move(labels)), gaps_(std::move(gaps)) {
  if (gaps_.empty()) gaps_.assign(labels_.size(), 0);
}

RawPath RawPath::with_inferred_gaps(std::vector<RawLabel> labels) {
  std::vector<int> gaps(labels.size(), 0);
  for (std::size_t i = 1; i < labels.size(); ++i) {
    const int step = index_of(labels[i]) - index_of(labels[i - 1]);
    const bool anomaly_skip =
        labels[i - 1] == RawLabel::T11 && labels[i] == RawLabel::L1;
    if (step >= 2 && !anomaly_skip) gaps[i] = step - 1;
  }
  return RawPath(std::move(labels), std::move(gaps));
}

bool RawPath::used_t12_double() const {
  for (std::size_t i = 1; i < labels_.size(); ++i) {
    if (labels_[i] == RawLabel::T12 && labels_[i - 1] == RawLabel::T12) {
      return true;
    }
  }
  return false;
}

bool RawPath::used_l5_double() const {
  for (std::size_t i = 1; i < labels_.size(); ++i) {
    if (labels_[i] == RawLabel::L5 && labels_[i - 1] == RawLabel::L5) {
      return true;
    }
  }
  return false;
}

bool RawPath::used_t11_skip() const {
  for (std::size_t i = 1; i < labels_.size(); ++i) {
    if (labels_[i - 1] == RawLabel::T11 && labels_[i] == RawLabel::L1 &&
        gaps_[i] == 0) {
      return true;
    }
  }
  return false;
}

int RawPath::anomaly_flag_count() const {
  return int{used_t12_double()} + int{used_l5_double()} +
         int{used_t11_skip()};
}

int RawPath::skipped_labels() const {
  int total = 0;
  for (int g : gaps_) total += std::max(g, 0);
  return total;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::EmptyPath: return "empty path";
    case ViolationKind::GapVectorMismatch: return "gap vector length mismatch";
    case ViolationKind::SpatialOrder: return "labels out of spatial order";
    case ViolationKind::NonConsecutive: return "non-consecutive labels";
    case ViolationKind::RepeatedLabel: return "label repeated";
    case ViolationKind::T12DoubleReused: return "T12 doubled more than once";
    case ViolationKind::L5DoubleReused: return "L5 doubled more than once";
    case ViolationKind::T11SkipWithT12Double:
      return "T11 skip combined with T12 double";
    case ViolationKind::GapNotAllowed: return "gap while gaps are disabled";
    case ViolationKind::GapMarkerMismatch:
      return "gap marker does not match label step";
    case ViolationKind::TooManyCervical: return "more than 7 cervical";
    case ViolationKind::TooManyThoracic: return "too many thoracic";
    case ViolationKind::TooManyLumbar: return "too many lumbar";
  }
  return "?";
}

std::vector<Violation> validate_sequence(const RawPath& path,
                                         bool gaps_allowed) {
  std::vector<Violation> out;
  const auto& labels = path.labels();
  const auto& gaps = path.gaps();
  if (labels.empty()) {
    out.push_back({ViolationKind::EmptyPath, 0});
    return out;
  }
  if (gaps.size() != labels.size()) {
    out.push_back({ViolationKind::GapVectorMismatch, 0});
    return out;
  }
  if (gaps[0] != 0) out.push_back({ViolationKind::GapMarkerMismatch, 0});

  int t12_doubles = 0;
  int l5_doubles = 0;
  int t11_skips = 0;
  for (std::size_t i = 1; i < labels.size(); ++i) {
    const RawLabel prev = labels[i - 1];
    const RawLabel cur = labels[i];
    const int step = index_of(cur) - index_of(prev);
    const int gap = gaps[i];

    if (step < 0) {
      out.push_back({ViolationKind::SpatialOrder, i});
      continue;
    }
    if (step == 0) {
      if (gap != 0) out.push_back({ViolationKind::GapMarkerMismatch, i});
      if (cur == RawLabel::T12) {
        if (++t12_doubles > 1) {
          out.push_back({ViolationKind::T12DoubleReused, i});
        }
      } else if (cur == RawLabel::L5) {
        if (++l5_doubles > 1) out.push_back({ViolationKind::L5DoubleReused, i});
      } else {
        out.push_back({ViolationKind::RepeatedLabel, i});
      }
      continue;
    }
    if (step == 1) {
      if (gap != 0) out.push_back({ViolationKind::GapMarkerMismatch, i});
      continue;
    }
    if (prev == RawLabel::T11 && cur == RawLabel::L1 && gap == 0) {
      ++t11_skips;
      continue;
    }
    if (gap == 0) {
      out.push_back({ViolationKind::NonConsecutive, i});
    } else if (gap != step - 1) {
      out.push_back({ViolationKind::GapMarkerMismatch, i});
    } else if (!gaps_allowed) {
      out.push_back({ViolationKind::GapNotAllowed, i});
    }
  }
  if (t11_skips > 0 && t12_doubles > 0) {
    out.push_back({ViolationKind::T11SkipWithT12Double, 0});
  }

  std::array<int, kNumRegions> counts{};
  for (RawLabel l : labels) ++counts[index_of(region_of(l))];
  const int max_thoracic = t12_doubles > 0 ? 13 : (t11_skips > 0 ? 11 : 12);
  const int max_lumbar = l5_doubles > 0 ? 6 : 5;
  if (counts[index_of(Region::Cervical)] > 7) {
    out.push_back({ViolationKind::TooManyCervical, 0});
  }
  if (counts[index_of(Region::Thoracic)] > max_thoracic) {
    out.push_back({ViolationKind::TooManyThoracic, 0});
  }
  if (counts[index_of(Region::Lumbar)] > max_lumbar) {
    out.push_back({ViolationKind::TooManyLumbar, 0});
  }
  return out;
}

std::vector<FinalLabel> decode_anomalies(const RawPath& path) {
  const auto violations = validate_sequence(path, /*gaps_allowed=*/true);
  if (!violations.empty()) {
    throw InvalidPathError("cannot decode invalid path: " +
                           std::string(to_string(violations.front().kind)));
  }
  std::vector<FinalLabel> out;
  out.reserve(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    const RawLabel l = path[i];
    if (i > 0 && l == path[i - 1] && l == RawLabel::T12) {
      out.push_back(FinalLabel::T13);
    } else if (i > 0 && l == path[i - 1] && l == RawLabel::L5) {
      out.push_back(FinalLabel::L6);
    } else {
      out.push_back(to_final(l));
    }
  }
  return out;
}

RawPath encode_final(std::span<const FinalLabel> labels) {
  std::vector<RawLabel> raw;
  raw.reserve(labels.size());
  for (FinalLabel l : labels) raw.push_back(encode(l));
  return RawPath::with_inferred_gaps(std::move(raw));
}

bool is_valid_reference(std::span<const FinalLabel> labels) {
  return validate_sequence(encode_final(labels), /*gaps_allowed=*/true)
      .empty();
}

}  // namespace vertseq
