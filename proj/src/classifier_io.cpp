#include "vertseq/classifier_io.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "json.hpp"

namespace vertseq {
namespace {

using nlohmann::json;

template <std::size_t N>
void check_softmax(const std::array<double, N>& v, const std::string& field) {
  double sum = 0.0;
  for (double x : v) {
    if (!std::isfinite(x) || x < 0.0) {
      throw ValidationError(
          fmt::format("{}: scores must be finite and non-negative", field));
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > kSoftmaxSumTolerance) {
    throw ValidationError(
        fmt::format("{}: scores sum to {:.9g}, expected 1", field, sum));
  }
}

template <std::size_t N>
std::array<double, N> read_vector(const json& obj, const char* key,
                                  const std::string& where) {
  const std::string field = where + "." + key;
  if (!obj.contains(key)) throw ParseError(field + ": missing");
  const json& arr = obj.at(key);
  if (!arr.is_array()) throw SchemaError(field + ": expected an array");
  if (arr.size() != N) {
    throw SchemaError(fmt::format("{}: expected {} numbers, got {}", field, N,
                                  arr.size()));
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!arr[i].is_number()) {
      throw SchemaError(fmt::format("{}[{}]: expected a number", field, i));
    }
    out[i] = arr[i].get<double>();
  }
  return out;
}

double read_visibility(const json& obj, const std::string& where) {
  const std::string field = where + ".visibility";
  if (!obj.contains("visibility")) throw ParseError(field + ": missing");
  const json& v = obj.at("visibility");
  // Accept both a bare number and a one-element array.
  if (v.is_number()) return v.get<double>();
  if (v.is_array() && v.size() == 1 && v[0].is_number()) {
    return v[0].get<double>();
  }
  throw SchemaError(field + ": expected one number");
}

template <std::size_t N>
void cap_unit_norm(std::array<double, N>& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double norm = std::sqrt(sq);
  if (norm > 1.0) {
    for (double& x : v) x /= norm;
  }
}

}  // namespace

void NormConfig::validate() const {
  if (!(gaussian_sigma >= 0.0) || !std::isfinite(gaussian_sigma)) {
    throw ValidationError("gaussian_sigma must be finite and >= 0");
  }
}

void validate_subject(const SubjectRecord& subject) {
  if (subject.vertebrae.empty()) {
    throw ValidationError(subject.subject_id + ": no vertebrae");
  }
  for (std::size_t i = 0; i < subject.vertebrae.size(); ++i) {
    const VertebraScores& v = subject.vertebrae[i];
    const std::string where = fmt::format("vertebrae[{}]", i);
    check_softmax(v.label_scores, where + ".label_scores");
    check_softmax(v.region_scores, where + ".region_scores");
    check_softmax(v.transition_scores, where + ".transition_scores");
    if (!(v.visibility >= 0.0 && v.visibility <= 1.0)) {
      throw ValidationError(fmt::format("{}.visibility: {} outside [0, 1]",
                                        where, v.visibility));
    }
  }
  if (subject.reference_labels) {
    const auto& ref = *subject.reference_labels;
    if (ref.size() != subject.vertebrae.size()) {
      throw ValidationError(
          fmt::format("reference_labels: length {} does not match {} vertebrae",
                      ref.size(), subject.vertebrae.size()));
    }
    if (!is_valid_reference(ref)) {
      throw ValidationError("reference_labels: not a valid label sequence");
    }
  }
}

SubjectRecord parse_subject(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("document is not an object");

  SubjectRecord out;
  if (!doc.contains("subject_id")) throw ParseError("subject_id: missing");
  if (!doc["subject_id"].is_string()) {
    throw SchemaError("subject_id: expected a string");
  }
  out.subject_id = doc["subject_id"].get<std::string>();

  const std::string prefix = out.subject_id + ": ";
  try {
    if (!doc.contains("vertebrae")) throw ParseError("vertebrae: missing");
    const json& verts = doc["vertebrae"];
    if (!verts.is_array()) throw SchemaError("vertebrae: expected an array");
    out.vertebrae.reserve(verts.size());
    for (std::size_t i = 0; i < verts.size(); ++i) {
      const std::string where = fmt::format("vertebrae[{}]", i);
      const json& v = verts[i];
      if (!v.is_object()) throw SchemaError(where + ": expected an object");
      VertebraScores scores;
      scores.label_scores =
          read_vector<kNumRawLabels>(v, "label_scores", where);
      scores.region_scores = read_vector<kNumRegions>(v, "region_scores", where);
      scores.transition_scores =
          read_vector<kNumTransitionKinds>(v, "transition_scores", where);
      scores.visibility = read_visibility(v, where);
      out.vertebrae.push_back(scores);
    }

    if (doc.contains("reference_labels") && !doc["reference_labels"].is_null()) {
      const json& ref = doc["reference_labels"];
      if (!ref.is_array()) {
        throw SchemaError("reference_labels: expected an array");
      }
      std::vector<FinalLabel> labels;
      for (std::size_t i = 0; i < ref.size(); ++i) {
        const auto name = ref[i].is_string()
                              ? parse_final_label(ref[i].get<std::string>())
                              : std::nullopt;
        if (!name) {
          throw SchemaError(
              fmt::format("reference_labels[{}]: unknown label", i));
        }
        labels.push_back(*name);
      }
      out.reference_labels = std::move(labels);
    }

    validate_subject(out);
  } catch (const ParseError& e) {
    throw ParseError(prefix + e.what());
  } catch (const SchemaError& e) {
    throw SchemaError(prefix + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(prefix + e.what());
  }
  return out;
}

std::string to_json_line(const SubjectRecord& subject) {
  json doc;
  doc["subject_id"] = subject.subject_id;
  json verts = json::array();
  for (const VertebraScores& v : subject.vertebrae) {
    verts.push_back({
        {"label_scores", v.label_scores},
        {"region_scores", v.region_scores},
        {"transition_scores", v.transition_scores},
        {"visibility", v.visibility},
    });
  }
  doc["vertebrae"] = std::move(verts);
  if (subject.reference_labels) {
    json ref = json::array();
    for (FinalLabel l : *subject.reference_labels) {
      ref.push_back(std::string(to_string(l)));
    }
    doc["reference_labels"] = std::move(ref);
  }
  return doc.dump();
}

std::vector<double> gaussian_kernel(double sigma) {
  if (sigma <= 0.0) return {1.0};
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * radius + 1);
  for (int d = -radius; d <= radius; ++d) {
    taps[d + radius] = std::exp(-0.5 * (d * d) / (sigma * sigma));
  }
  const double total = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (double& w : taps) w /= total;
  return taps;
}

template <std::size_t N>
std::vector<std::array<double, N>> smooth_columns(
    const std::vector<std::array<double, N>>& rows, double sigma) {
  const std::vector<double> taps = gaussian_kernel(sigma);
  const int radius = static_cast<int>(taps.size() / 2);
  const int n = static_cast<int>(rows.size());
  std::vector<std::array<double, N>> out(rows.size());
  for (int i = 0; i < n; ++i) {
    out[i].fill(0.0);
    for (int d = -radius; d <= radius; ++d) {
      const int src = i + d;
      if (src < 0 || src >= n) continue;
      const double w = taps[d + radius];
      for (std::size_t j = 0; j < N; ++j) out[i][j] += w * rows[src][j];
    }
  }
  return out;
}

template std::vector<LabelVector> smooth_columns(const std::vector<LabelVector>&,
                                                 double);
template std::vector<RegionVector> smooth_columns(
    const std::vector<RegionVector>&, double);

LabelVector expand_regions(const RegionVector& r) {
  LabelVector out{};
  for (int j = 0; j < kNumRawLabels; ++j) {
    out[j] = r[index_of(region_of(raw_label_at(j)))];
  }
  return out;
}

NormalizedOutputs make_normalized(std::vector<LabelVector> c,
                                  std::vector<RegionVector> r,
                                  std::vector<TransitionVector> t,
                                  std::vector<double> s) {
  if (r.size() != c.size() || t.size() != c.size() || s.size() != c.size()) {
    throw ContractError("make_normalized: head lengths differ");
  }
  NormalizedOutputs out;
  out.c = std::move(c);
  out.r_expanded.reserve(r.size());
  for (const RegionVector& row : r) out.r_expanded.push_back(expand_regions(row));
  out.t = std::move(t);
  out.s = std::move(s);
  return out;
}

NormalizedOutputs normalize_outputs(const SubjectRecord& subject,
                                    const NormConfig& cfg) {
  cfg.validate();
  const std::size_t n = subject.size();
  std::vector<LabelVector> c(n);
  std::vector<RegionVector> r(n);
  std::vector<TransitionVector> t(n);
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = subject.vertebrae[i].label_scores;
    r[i] = subject.vertebrae[i].region_scores;
    t[i] = subject.vertebrae[i].transition_scores;
    s[i] = subject.vertebrae[i].visibility;
  }

  if (cfg.enable_smoothing && cfg.gaussian_sigma > 0.0) {
    c = smooth_columns(c, cfg.gaussian_sigma);
    r = smooth_columns(r, cfg.gaussian_sigma);
  }
  for (auto& row : c) cap_unit_norm(row);
  for (auto& row : r) cap_unit_norm(row);

  if (cfg.transition_column_norm) {
    for (int k = 0; k < kNumTransitionKinds; ++k) {
      double column = 0.0;
      for (std::size_t i = 0; i < n; ++i) column += t[i][k];
      if (column > 1.0) {
        for (std::size_t i = 0; i < n; ++i) t[i][k] /= column;
      }
    }
  }
  return make_normalized(std::move(c), std::move(r), std::move(t),
                         std::move(s));
}

}  // namespace vertseq
