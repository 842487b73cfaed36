#include "vertseq/metrics.hpp"

#include <cmath>
#include <tuple>

#include <fmt/format.h>

#include "json.hpp"

namespace vertseq {
namespace {

void check_pairs(const std::vector<LabelPair>& pairs) {
  if (pairs.empty()) throw ContractError("metrics: no subjects to evaluate");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].predicted.size() != pairs[i].reference.size()) {
      throw ContractError(fmt::format(
          "metrics: subject {} has {} predicted and {} reference labels", i,
          pairs[i].predicted.size(), pairs[i].reference.size()));
    }
  }
}

template <typename IsCase, typename Detected>
std::optional<double> recall(const std::vector<LabelPair>& pairs,
                             IsCase is_case, Detected detected) {
  std::size_t cases = 0;
  std::size_t hits = 0;
  for (const LabelPair& p : pairs) {
    if (!is_case(p.reference)) continue;
    ++cases;
    if (detected(p)) ++hits;
  }
  if (cases == 0) return std::nullopt;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(cases);
}

std::string fmt_number(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

double perfect_label_percentage(const std::vector<LabelPair>& pairs) {
  check_pairs(pairs);
  std::size_t exact = 0;
  for (const LabelPair& p : pairs) {
    if (p.predicted == p.reference) ++exact;
  }
  return 100.0 * static_cast<double>(exact) /
         static_cast<double>(pairs.size());
}

std::pair<double, double> subject_correctness(
    const std::vector<LabelPair>& pairs) {
  check_pairs(pairs);
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (const LabelPair& p : pairs) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < p.reference.size(); ++i) {
      if (p.predicted[i] == p.reference[i]) ++correct;
    }
    scores.push_back(p.reference.empty()
                         ? 100.0
                         : 100.0 * static_cast<double>(correct) /
                               static_cast<double>(p.reference.size()));
  }
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(scores.size());
  double var = 0.0;
  for (double s : scores) var += (s - mean) * (s - mean);
  var /= static_cast<double>(scores.size());
  return {mean, std::sqrt(var)};
}

bool is_tea_case(const std::vector<FinalLabel>& reference) {
  for (std::size_t i = 0; i < reference.size(); ++i) {
    if (reference[i] == FinalLabel::T13) return true;
    if (i + 1 < reference.size() && reference[i] == FinalLabel::T11 &&
        reference[i + 1] == FinalLabel::L1) {
      return true;
    }
  }
  return false;
}

bool tea_detected(const LabelPair& pair) {
  const auto& ref = pair.reference;
  const auto& pred = pair.predicted;
  bool any = false;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (ref[i] == FinalLabel::T13) {
      any = true;
      if (pred[i] != FinalLabel::T13) return false;
    }
    if (i + 1 < ref.size() && ref[i] == FinalLabel::T11 &&
        ref[i + 1] == FinalLabel::L1) {
      any = true;
      if (pred[i] != FinalLabel::T11 || pred[i + 1] != FinalLabel::L1) {
        return false;
      }
    }
  }
  return any;
}

std::optional<double> tea_recall(const std::vector<LabelPair>& pairs) {
  check_pairs(pairs);
  return recall(pairs, is_tea_case, tea_detected);
}

bool is_lea_case(const std::vector<FinalLabel>& reference) {
  if (reference.empty()) return false;
  if (reference.back() == FinalLabel::L4) return true;
  for (FinalLabel l : reference) {
    if (l == FinalLabel::L6) return true;
  }
  return false;
}

bool lea_detected(const LabelPair& pair) {
  const auto& ref = pair.reference;
  const auto& pred = pair.predicted;
  if (ref.empty()) return false;
  if (ref.back() == FinalLabel::L4) return pred.back() == FinalLabel::L4;
  bool any = false;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (ref[i] == FinalLabel::L6) {
      any = true;
      if (pred[i] != FinalLabel::L6) return false;
    }
  }
  return any;
}

std::optional<double> lea_recall(const std::vector<LabelPair>& pairs) {
  check_pairs(pairs);
  return recall(pairs, is_lea_case, lea_detected);
}

EvalReport evaluate(const std::vector<LabelPair>& pairs) {
  EvalReport out;
  out.plp = perfect_label_percentage(pairs);
  std::tie(out.subject_correctness_mean, out.subject_correctness_std) =
      subject_correctness(pairs);
  out.tea_recall = tea_recall(pairs);
  out.lea_recall = lea_recall(pairs);
  out.n_subjects = pairs.size();
  for (const LabelPair& p : pairs) {
    if (is_tea_case(p.reference)) ++out.n_tea_cases;
    if (is_lea_case(p.reference)) ++out.n_lea_cases;
  }
  return out;
}

std::string to_json(const EvalReport& report) {
  nlohmann::ordered_json doc;
  doc["plp"] = report.plp;
  doc["subject_correctness_mean"] = report.subject_correctness_mean;
  doc["subject_correctness_std"] = report.subject_correctness_std;
  doc["tea_recall"] = report.tea_recall ? nlohmann::ordered_json(*report.tea_recall)
                                        : nlohmann::ordered_json(nullptr);
  doc["lea_recall"] = report.lea_recall ? nlohmann::ordered_json(*report.lea_recall)
                                        : nlohmann::ordered_json(nullptr);
  doc["n_subjects"] = report.n_subjects;
  doc["n_tea_cases"] = report.n_tea_cases;
  doc["n_lea_cases"] = report.n_lea_cases;
  return doc.dump(2);
}

std::string to_csv_row(const std::string& param, const EvalReport& report) {
  return fmt::format("{},{},{},{},{},{},{}", param, fmt_number(report.plp),
                     fmt_number(report.subject_correctness_mean),
                     fmt_number(report.subject_correctness_std),
                     report.tea_recall ? fmt_number(*report.tea_recall) : "",
                     report.lea_recall ? fmt_number(*report.lea_recall) : "",
                     report.n_subjects);
}

}  // namespace vertseq
