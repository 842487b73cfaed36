#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "vertseq/classifier_io.hpp"
#include "vertseq/cost_model.hpp"
#include "vertseq/metrics.hpp"
#include "vertseq/sequence_solver.hpp"

namespace vertseq::cli {

struct LabelOutcome {
  std::string subject_id;
  std::optional<PathResult> result;  // empty when the subject failed
  std::string error;
};

// Labels every subject with `workers` threads. Outcomes come back in input
// order and do not depend on the worker count.
std::vector<LabelOutcome> label_subjects(
    const std::vector<SubjectRecord>& subjects, const NormConfig& norm,
    const SolverConfig& solver, unsigned workers);

// A parsed batch line: either a subject or the error that rejected it.
struct BatchRecord {
  std::size_t line = 0;
  std::optional<SubjectRecord> subject;
  std::string id;  // best-effort id for failed records
  std::string error;
};

// Reads newline-delimited subject documents; blank lines are skipped.
// Throws DataError if the file cannot be opened.
std::vector<BatchRecord> read_subject_batch(const std::string& path);

// Subjects whose records parsed and carry reference labels, paired with the
// solver output. Failed subjects are skipped and counted in `failures`.
std::vector<LabelPair> pair_with_references(
    const std::vector<SubjectRecord>& subjects,
    const std::vector<LabelOutcome>& outcomes, std::size_t* failures);

}  // namespace vertseq::cli
