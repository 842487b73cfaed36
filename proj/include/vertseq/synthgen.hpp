#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vertseq/classifier_io.hpp"
#include "vertseq/label_space.hpp"

namespace vertseq {

// Deterministic per-subject random stream. The engine is seeded from a
// splitmix64 mix of (seed, stream index), and the draws below use only raw
// engine output so corpora are identical across standard libraries.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  bool bernoulli(double p) { return uniform() < p; }
  // Uniform in [0, n). Precondition: n > 0.
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

enum class FovKind { Full, RandomWindow, AllWindows };

struct FovMode {
  FovKind kind = FovKind::Full;
  std::size_t min_len = 1;
  std::size_t max_len = kMaxSpineLength;

  static constexpr std::size_t kMaxSpineLength = 26;
};

struct SynthConfig {
  double tea_rate = 0.058;
  double lea_rate = 0.097;
  // Probability that a thoracic anomaly is the eleven-thoracic variant.
  double t11_vs_t13_split = 0.5;
  // Probability that a lumbar anomaly is the four-lumbar variant.
  double l4_vs_l6_split = 0.5;
  FovMode fov;
  std::uint64_t seed = 0;

  void validate() const;
};

struct NoiseConfig {
  // Label-head mass moved onto the two neighbouring labels.
  double label_confusion = 0.0;
  // Chance that a head (label, region, transition) emits uniform scores.
  double head_dropout = 0.0;
  // Weight of the fulfilled-transition one-hot against a uniform vector.
  double transition_strength = 1.0;
  // The first and last vertebra get visibility 1 - decay.
  double visibility_boundary_decay = 0.0;
  std::uint64_t seed = 0;

  static NoiseConfig noiseless() { return NoiseConfig{}; }
  void validate() const;
};

// C1..C7, then 11/12/13 thoracic and 4/5/6 lumbar per the drawn anomalies.
std::vector<FinalLabel> generate_spine(const SynthConfig& cfg, Rng& rng);
std::vector<FinalLabel> generate_spine(const SynthConfig& cfg);

// Classifier outputs a model taught `taught` would emit. T13 and L6 are
// emitted as their encoded T12 and L5. The taught labels are attached as the
// reference.
SubjectRecord emit_classifier_outputs(const std::vector<FinalLabel>& taught,
                                      const NoiseConfig& noise, Rng& rng);
SubjectRecord emit_classifier_outputs(const std::vector<FinalLabel>& taught,
                                      const NoiseConfig& noise);

// Throws ContractError unless 1 <= length and start + length <= n.
SubjectRecord crop_fov(const SubjectRecord& subject, std::size_t start,
                       std::size_t length);

// Every contiguous window with length in [min_len, max_len], ordered by
// length and then start.
std::vector<SubjectRecord> all_windows(const SubjectRecord& subject,
                                       std::size_t min_len = 1,
                                       std::size_t max_len = SIZE_MAX);

struct GapInjection {
  SubjectRecord subject;
  std::size_t removed_index = 0;
};

// Removes one uniformly chosen vertebra (any position) along with its
// reference label. Throws ContractError for n < 2.
GapInjection inject_gap(const SubjectRecord& subject, Rng& rng);
GapInjection inject_gap(const SubjectRecord& subject, std::uint64_t seed);

// Labels a model trained without anomaly annotations would learn: exactly
// twelve thoracic, then L1, L2, ... with positions past L5 labelled L6.
// Numbering starts from the first thoracic or lumbar label of the input.
std::vector<FinalLabel> relabel_without_anomalies(
    const std::vector<FinalLabel>& truth);

// One subject per seed stream, FOV applied per cfg.fov; ids are
// "synth-<seed>-<index>" with a window suffix when cropped.
std::vector<SubjectRecord> generate_corpus(const SynthConfig& cfg,
                                           const NoiseConfig& noise,
                                           std::size_t n_subjects);

}  // namespace vertseq
