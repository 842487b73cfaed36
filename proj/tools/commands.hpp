#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "vertseq/classifier_io.hpp"
#include "vertseq/cost_model.hpp"
#include "vertseq/metrics.hpp"
#include "vertseq/sequence_solver.hpp"
#include "vertseq/synthgen.hpp"

namespace vertseq::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitInternal = 3,
};

struct LabelOptions {
  std::string input;
  std::string output = "-";  // "-" is stdout
  NormConfig norm;
  SolverConfig solver;
  unsigned workers = 1;
};

// One result document per input record, in input order. Records that fail
// to parse or solve are written with "status": "failed" and the batch goes
// on; the exit code is then kExitData.
int cmd_label(const LabelOptions& opts, std::ostream& out, std::ostream& err);

struct EvalOptions {
  std::string predictions;
  std::string references;
  std::string csv_output;  // optional; header + one row
};

// Matches predictions to references by subject id. References may be subject
// documents (reference_labels) or result documents (labels).
int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err);

struct SynthOptions {
  SynthConfig synth;
  NoiseConfig noise;
  std::size_t n_subjects = 100;
  std::string output;
};

// Writes the corpus and a `<output>.manifest.json` describing how to rebuild
// it.
int cmd_synth(const SynthOptions& opts, std::ostream& err);

enum class SweepKind { Gamma, SkipCost, Fov };

struct SweepSpec {
  SweepKind kind = SweepKind::Gamma;
  double lo = -2.0;
  double hi = 2.0;
  double step = 0.25;
  std::string input;
  std::string output = "-";
  NormConfig norm;
  SolverConfig solver;
  unsigned workers = 1;
};

// Grid lo, lo + step, ... up to hi; values are lo + k * step so 0 is hit
// exactly on the default grid. Throws ValidationError for a bad range.
std::vector<double> sweep_grid(double lo, double hi, double step);

// CSV with kCsvHeader, one row per grid value (gamma, skip cost) or window
// length (fov, pooled over every window position).
int cmd_sweep(const SweepSpec& spec, std::ostream& out, std::ostream& err);

// Shared by cmd_sweep and tests: label + evaluate an in-memory corpus.
EvalReport label_and_evaluate(const std::vector<SubjectRecord>& subjects,
                              const NormConfig& norm,
                              const SolverConfig& solver, unsigned workers);

std::string result_to_json_line(const std::string& subject_id,
                                const PathResult& result);

}  // namespace vertseq::cli
