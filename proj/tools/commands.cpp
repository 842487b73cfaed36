#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>

#include <fmt/format.h>

#include "batch.hpp"
#include "json.hpp"

namespace vertseq::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Resolves "-" to the fallback stream, otherwise opens `path` for writing.
class OutputTarget {
 public:
  OutputTarget(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw DataError(fmt::format("cannot write {}", path));
      stream_ = file_.get();
    }
  }
  std::ostream& stream() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

std::vector<std::string> label_names(const std::vector<FinalLabel>& labels) {
  std::vector<std::string> out;
  out.reserve(labels.size());
  for (FinalLabel l : labels) out.emplace_back(to_string(l));
  return out;
}

std::vector<FinalLabel> read_labels(const json& arr, const std::string& what) {
  if (!arr.is_array()) throw SchemaError(what + ": expected an array");
  std::vector<FinalLabel> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto l = arr[i].is_string()
                       ? parse_final_label(arr[i].get<std::string>())
                       : std::nullopt;
    if (!l) throw SchemaError(fmt::format("{}[{}]: unknown label", what, i));
    out.push_back(*l);
  }
  return out;
}

// subject_id -> labels, in file order. `field_order` lists the keys to try.
std::vector<std::pair<std::string, std::vector<FinalLabel>>> read_label_file(
    const std::string& path, std::initializer_list<const char*> field_order) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open {}", path));
  std::vector<std::pair<std::string, std::vector<FinalLabel>>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = fmt::format("{}:{}", path, line_no);
    const json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw ParseError(where + ": malformed document");
    }
    if (!doc.contains("subject_id") || !doc["subject_id"].is_string()) {
      throw ParseError(where + ": subject_id missing");
    }
    const std::string id = doc["subject_id"].get<std::string>();
    if (doc.contains("status") && doc["status"] != "ok") {
      throw DataError(fmt::format("{}: subject {} has no labels (status {})",
                                  where, id, doc["status"].dump()));
    }
    bool found = false;
    for (const char* field : field_order) {
      if (doc.contains(field) && !doc[field].is_null()) {
        out.emplace_back(id, read_labels(doc[field], where + " " + id + "." +
                                                         field));
        found = true;
        break;
      }
    }
    if (!found) {
      throw ParseError(fmt::format("{}: subject {} has no label field", where,
                                   id));
    }
  }
  return out;
}

std::string format_param(double v) {
  // Collapse -0 so the baseline row reads "0".
  return fmt::format("{:g}", v == 0.0 ? 0.0 : v);
}

}  // namespace

std::string result_to_json_line(const std::string& subject_id,
                                const PathResult& result) {
  ordered_json doc;
  doc["subject_id"] = subject_id;
  doc["status"] = "ok";
  doc["labels"] = label_names(result.final_labels);
  std::vector<std::string> raw;
  for (RawLabel l : result.raw_path.labels()) raw.emplace_back(to_string(l));
  doc["raw_labels"] = raw;
  doc["gaps"] = result.raw_path.gaps();
  doc["cost"] = result.total_cost;
  doc["tea_flag"] = result.tea_flag;
  doc["lea_flag"] = result.lea_flag;
  doc["t12_double"] = result.raw_path.used_t12_double();
  doc["l5_double"] = result.raw_path.used_l5_double();
  doc["t11_skip"] = result.raw_path.used_t11_skip();
  return doc.dump();
}

int cmd_label(const LabelOptions& opts, std::ostream& out, std::ostream& err) {
  opts.norm.validate();
  opts.solver.validate();
  const std::vector<BatchRecord> records = read_subject_batch(opts.input);
  OutputTarget target(opts.output, out);
  if (records.empty()) {
    err << "warning: " << opts.input << " contains no subjects\n";
    return kExitOk;
  }

  std::vector<SubjectRecord> subjects;
  std::vector<std::size_t> subject_of_record(records.size(), SIZE_MAX);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].subject) {
      subject_of_record[i] = subjects.size();
      subjects.push_back(*records[i].subject);
    }
  }
  const std::vector<LabelOutcome> outcomes =
      label_subjects(subjects, opts.norm, opts.solver, opts.workers);

  std::size_t failures = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::string error = records[i].error;
    std::string id = records[i].id;
    if (subject_of_record[i] != SIZE_MAX) {
      const LabelOutcome& o = outcomes[subject_of_record[i]];
      if (o.result) {
        target.stream() << result_to_json_line(o.subject_id, *o.result) << '\n';
        continue;
      }
      error = fmt::format("line {}: {}", records[i].line, o.error);
    }
    ++failures;
    err << "error: subject " << id << ": " << error << '\n';
    ordered_json doc;
    doc["subject_id"] = id;
    doc["status"] = "failed";
    doc["error"] = error;
    target.stream() << doc.dump() << '\n';
  }
  return failures == 0 ? kExitOk : kExitData;
}

int cmd_eval(const EvalOptions& opts, std::ostream& out, std::ostream& err) {
  const auto predictions = read_label_file(opts.predictions, {"labels"});
  const auto references =
      read_label_file(opts.references, {"reference_labels", "labels"});

  std::map<std::string, const std::vector<FinalLabel>*> predicted_by_id;
  for (const auto& [id, labels] : predictions) {
    if (!predicted_by_id.emplace(id, &labels).second) {
      throw DataError("duplicate prediction for subject " + id);
    }
  }
  std::set<std::string> reference_ids;
  std::vector<std::string> missing;
  std::vector<LabelPair> pairs;
  for (const auto& [id, labels] : references) {
    if (!reference_ids.insert(id).second) {
      throw DataError("duplicate reference for subject " + id);
    }
    const auto it = predicted_by_id.find(id);
    if (it == predicted_by_id.end()) {
      missing.push_back(id);
      continue;
    }
    if (it->second->size() != labels.size()) {
      throw DataError(fmt::format(
          "subject {}: {} predicted labels vs {} reference labels", id,
          it->second->size(), labels.size()));
    }
    pairs.push_back({*it->second, labels});
  }
  for (const auto& [id, labels] : predictions) {
    if (!reference_ids.contains(id)) missing.push_back(id);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
    err << "error: unmatched subject ids: " << list << '\n';
    return kExitData;
  }
  if (pairs.empty()) {
    err << "error: nothing to evaluate\n";
    return kExitData;
  }

  const EvalReport report = evaluate(pairs);
  out << to_json(report) << '\n';
  if (!opts.csv_output.empty()) {
    OutputTarget csv(opts.csv_output, out);
    csv.stream() << kCsvHeader << '\n' << to_csv_row("eval", report) << '\n';
  }
  return kExitOk;
}

int cmd_synth(const SynthOptions& opts, std::ostream& err) {
  opts.synth.validate();
  opts.noise.validate();
  if (opts.output.empty() || opts.output == "-") {
    throw ValidationError("synth needs an output file for the manifest");
  }
  const auto corpus =
      generate_corpus(opts.synth, opts.noise, opts.n_subjects);
  {
    std::ofstream file(opts.output, std::ios::binary);
    if (!file) throw DataError(fmt::format("cannot write {}", opts.output));
    for (const SubjectRecord& s : corpus) file << to_json_line(s) << '\n';
  }

  ordered_json manifest;
  manifest["generator"] = "vertseq synth";
  manifest["corpus"] = opts.output;
  manifest["n_subjects"] = opts.n_subjects;
  manifest["n_records"] = corpus.size();
  const char* fov_kind = opts.synth.fov.kind == FovKind::Full ? "full"
                         : opts.synth.fov.kind == FovKind::RandomWindow
                             ? "random_window"
                             : "all_windows";
  manifest["synth"] = {
      {"seed", opts.synth.seed},
      {"tea_rate", opts.synth.tea_rate},
      {"lea_rate", opts.synth.lea_rate},
      {"t11_vs_t13_split", opts.synth.t11_vs_t13_split},
      {"l4_vs_l6_split", opts.synth.l4_vs_l6_split},
      {"fov", {{"mode", fov_kind},
               {"min_len", opts.synth.fov.min_len},
               {"max_len", opts.synth.fov.max_len}}},
  };
  manifest["noise"] = {
      {"seed", opts.noise.seed},
      {"label_confusion", opts.noise.label_confusion},
      {"head_dropout", opts.noise.head_dropout},
      {"transition_strength", opts.noise.transition_strength},
      {"visibility_boundary_decay", opts.noise.visibility_boundary_decay},
  };
  const std::string manifest_path = opts.output + ".manifest.json";
  std::ofstream mf(manifest_path, std::ios::binary);
  if (!mf) throw DataError(fmt::format("cannot write {}", manifest_path));
  mf << manifest.dump(2) << '\n';
  err << "wrote " << corpus.size() << " records to " << opts.output << '\n';
  return kExitOk;
}

std::vector<double> sweep_grid(double lo, double hi, double step) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(step) ||
      !(step > 0.0) || lo > hi) {
    throw ValidationError(fmt::format(
        "invalid sweep range lo={} hi={} step={} (need step > 0, lo <= hi)",
        lo, hi, step));
  }
  std::vector<double> grid;
  for (std::size_t k = 0;; ++k) {
    const double v = lo + static_cast<double>(k) * step;
    if (v > hi + 1e-9 * step) break;
    grid.push_back(v);
  }
  return grid;
}

EvalReport label_and_evaluate(const std::vector<SubjectRecord>& subjects,
                              const NormConfig& norm,
                              const SolverConfig& solver, unsigned workers) {
  const auto outcomes = label_subjects(subjects, norm, solver, workers);
  std::size_t failures = 0;
  const auto pairs = pair_with_references(subjects, outcomes, &failures);
  if (failures > 0) {
    throw DataError(fmt::format("{} subjects could not be evaluated",
                                failures));
  }
  return evaluate(pairs);
}

int cmd_sweep(const SweepSpec& spec, std::ostream& out, std::ostream& err) {
  spec.norm.validate();
  spec.solver.validate();
  const std::vector<double> grid = sweep_grid(spec.lo, spec.hi, spec.step);

  std::vector<SubjectRecord> corpus;
  for (BatchRecord& rec : read_subject_batch(spec.input)) {
    if (!rec.subject) throw DataError(rec.error);
    if (!rec.subject->reference_labels) {
      throw DataError(fmt::format("subject {} has no reference_labels",
                                  rec.subject->subject_id));
    }
    corpus.push_back(std::move(*rec.subject));
  }
  if (corpus.empty()) throw DataError("sweep corpus is empty");

  OutputTarget target(spec.output, out);
  target.stream() << kCsvHeader << '\n';
  for (double value : grid) {
    SolverConfig solver = spec.solver;
    std::vector<SubjectRecord> windows;
    const std::vector<SubjectRecord>* subjects = &corpus;
    std::string param = format_param(value);
    switch (spec.kind) {
      case SweepKind::Gamma:
        solver.anomaly_gamma = value;
        break;
      case SweepKind::SkipCost:
        solver.gaps_enabled = true;
        solver.gap_penalty = value;
        break;
      case SweepKind::Fov: {
        const double rounded = std::round(value);
        if (rounded < 1.0) continue;
        const auto len = static_cast<std::size_t>(rounded);
        for (const SubjectRecord& s : corpus) {
          for (auto& w : all_windows(s, len, len)) windows.push_back(std::move(w));
        }
        if (windows.empty()) {
          err << "note: no windows of length " << len << "\n";
          continue;
        }
        subjects = &windows;
        param = fmt::format("{}", len);
        break;
      }
    }
    const EvalReport report =
        label_and_evaluate(*subjects, spec.norm, solver, spec.workers);
    target.stream() << to_csv_row(param, report) << '\n';
  }
  return kExitOk;
}

}  // namespace vertseq::cli
