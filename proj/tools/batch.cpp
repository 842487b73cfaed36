#include "batch.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include <fmt/format.h>

#include "json.hpp"

namespace vertseq::cli {

std::vector<LabelOutcome> label_subjects(
    const std::vector<SubjectRecord>& subjects, const NormConfig& norm,
    const SolverConfig& solver, unsigned workers) {
  std::vector<LabelOutcome> out(subjects.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&]() {
    for (std::size_t i = next++; i < subjects.size(); i = next++) {
      LabelOutcome& o = out[i];
      o.subject_id = subjects[i].subject_id;
      try {
        o.result = solve(normalize_outputs(subjects[i], norm), solver);
      } catch (const std::exception& e) {
        o.error = e.what();
      }
    }
  };
  const unsigned n_threads = std::max(
      1u, std::min<unsigned>(workers, static_cast<unsigned>(subjects.size())));
  if (n_threads == 1) {
    work();
    return out;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }
  return out;
}

std::vector<BatchRecord> read_subject_batch(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open {}", path));
  std::vector<BatchRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    BatchRecord rec;
    rec.line = line_no;
    try {
      rec.subject = parse_subject(line);
      rec.id = rec.subject->subject_id;
    } catch (const DataError& e) {
      rec.error = fmt::format("line {}: {}", line_no, e.what());
      const auto doc = nlohmann::json::parse(line, nullptr, false);
      if (doc.is_object() && doc.contains("subject_id") &&
          doc["subject_id"].is_string()) {
        rec.id = doc["subject_id"].get<std::string>();
      } else {
        rec.id = fmt::format("line:{}", line_no);
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<LabelPair> pair_with_references(
    const std::vector<SubjectRecord>& subjects,
    const std::vector<LabelOutcome>& outcomes, std::size_t* failures) {
  std::vector<LabelPair> pairs;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    if (!outcomes[i].result || !subjects[i].reference_labels) {
      ++failed;
      continue;
    }
    pairs.push_back({outcomes[i].result->final_labels,
                     *subjects[i].reference_labels});
  }
  if (failures) *failures = failed;
  return pairs;
}

}  // namespace vertseq::cli
