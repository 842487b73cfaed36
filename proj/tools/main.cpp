// vertseq: label vertebra chains, evaluate labelings, generate synthetic
// corpora and run parameter sweeps.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

using namespace vertseq;
using namespace vertseq::cli;

void add_solver_flags(CLI::App& app, SolverConfig& cfg) {
  app.add_option("--w-label", cfg.label_weight, "label head weight")
      ->capture_default_str();
  app.add_option("--w-region", cfg.region_weight, "region head weight")
      ->capture_default_str();
  app.add_option("--w-transition", cfg.transition_weight,
                 "transition head weight")
      ->capture_default_str();
  app.add_option("--gamma", cfg.anomaly_gamma,
                 "cost added per anomaly category in a path")
      ->capture_default_str();
  app.add_flag("--gaps", cfg.gaps_enabled, "allow label gaps");
  app.add_option("--gap-penalty", cfg.gap_penalty, "cost per skipped label")
      ->capture_default_str();
  app.add_flag("!--no-none-transition", cfg.include_none_transition,
               "leave the None transition out of the transition cost");
}

void add_norm_flags(CLI::App& app, NormConfig& cfg) {
  app.add_option("--sigma", cfg.gaussian_sigma,
                 "Gaussian smoothing sigma in vertebrae")
      ->capture_default_str();
  app.add_flag("!--no-smoothing", cfg.enable_smoothing,
               "skip Gaussian smoothing");
  app.add_flag("!--no-transition-norm", cfg.transition_column_norm,
               "skip transition column normalisation");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vertseq: anatomically constrained vertebra labelling"};
  app.require_subcommand(1);

  LabelOptions label;
  auto* label_cmd = app.add_subcommand("label", "label a subject batch");
  label_cmd->add_option("input", label.input, "newline-delimited subjects")
      ->required();
  label_cmd->add_option("-o,--output", label.output, "result file, - for stdout")
      ->capture_default_str();
  label_cmd->add_option("--workers", label.workers)->capture_default_str();
  add_solver_flags(*label_cmd, label.solver);
  add_norm_flags(*label_cmd, label.norm);

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "score predictions");
  eval_cmd->add_option("predictions", eval.predictions)->required();
  eval_cmd->add_option("references", eval.references)->required();
  eval_cmd->add_option("--csv", eval.csv_output, "also write a CSV row here");

  SynthOptions synth;
  std::string fov_mode = "full";
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
  synth_cmd->add_option("-o,--output", synth.output)->required();
  synth_cmd->add_option("-n,--subjects", synth.n_subjects)
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.synth.seed)->capture_default_str();
  synth_cmd->add_option("--tea-rate", synth.synth.tea_rate)
      ->capture_default_str();
  synth_cmd->add_option("--lea-rate", synth.synth.lea_rate)
      ->capture_default_str();
  synth_cmd->add_option("--t11-split", synth.synth.t11_vs_t13_split,
                        "share of thoracic anomalies with 11 thoracic")
      ->capture_default_str();
  synth_cmd->add_option("--l4-split", synth.synth.l4_vs_l6_split,
                        "share of lumbar anomalies with 4 lumbar")
      ->capture_default_str();
  synth_cmd->add_option("--fov", fov_mode, "full, random or all")
      ->check(CLI::IsMember({"full", "random", "all"}))
      ->capture_default_str();
  synth_cmd->add_option("--min-len", synth.synth.fov.min_len)
      ->capture_default_str();
  synth_cmd->add_option("--max-len", synth.synth.fov.max_len)
      ->capture_default_str();
  synth_cmd->add_option("--noise-seed", synth.noise.seed)
      ->capture_default_str();
  synth_cmd->add_option("--label-confusion", synth.noise.label_confusion)
      ->capture_default_str();
  synth_cmd->add_option("--head-dropout", synth.noise.head_dropout)
      ->capture_default_str();
  synth_cmd->add_option("--transition-strength",
                        synth.noise.transition_strength)
      ->capture_default_str();
  synth_cmd->add_option("--visibility-decay",
                        synth.noise.visibility_boundary_decay)
      ->capture_default_str();

  SweepSpec sweep;
  std::string sweep_kind;
  auto* sweep_cmd = app.add_subcommand("sweep", "run an ablation sweep");
  sweep_cmd->add_option("kind", sweep_kind, "gamma, skip or fov")
      ->required()
      ->check(CLI::IsMember({"gamma", "skip", "fov"}));
  sweep_cmd->add_option("input", sweep.input, "corpus with reference labels")
      ->required();
  auto* lo_opt = sweep_cmd->add_option("--lo", sweep.lo);
  auto* hi_opt = sweep_cmd->add_option("--hi", sweep.hi);
  auto* step_opt = sweep_cmd->add_option("--step", sweep.step);
  sweep_cmd->add_option("-o,--output", sweep.output)->capture_default_str();
  sweep_cmd->add_option("--workers", sweep.workers)->capture_default_str();
  add_solver_flags(*sweep_cmd, sweep.solver);
  add_norm_flags(*sweep_cmd, sweep.norm);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*label_cmd) return cmd_label(label, std::cout, std::cerr);
    if (*eval_cmd) return cmd_eval(eval, std::cout, std::cerr);
    if (*synth_cmd) {
      synth.synth.fov.kind = fov_mode == "random" ? FovKind::RandomWindow
                             : fov_mode == "all"  ? FovKind::AllWindows
                                                  : FovKind::Full;
      return cmd_synth(synth, std::cerr);
    }
    if (*sweep_cmd) {
      if (sweep_kind == "gamma") sweep.kind = SweepKind::Gamma;
      if (sweep_kind == "skip") {
        sweep.kind = SweepKind::SkipCost;
        if (lo_opt->count() == 0) sweep.lo = 0.0;
      }
      if (sweep_kind == "fov") {
        sweep.kind = SweepKind::Fov;
        if (lo_opt->count() == 0) sweep.lo = 1.0;
        if (hi_opt->count() == 0) sweep.hi = 26.0;
        if (step_opt->count() == 0) sweep.step = 1.0;
      }
      try {
        sweep_grid(sweep.lo, sweep.hi, sweep.step);
      } catch (const ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
      }
      return cmd_sweep(sweep, std::cout, std::cerr);
    }
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
