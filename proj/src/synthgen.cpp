#include "vertseq/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "vertseq/cost_model.hpp"

namespace vertseq {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError(fmt::format("{} must lie in [0, 1], got {}", name, p));
  }
}

template <std::size_t N>
std::array<double, N> uniform_vector() {
  std::array<double, N> v;
  v.fill(1.0 / static_cast<double>(N));
  return v;
}

// Seed-stream tags so the spine and noise draws of one subject never share a
// sequence even when both seeds are equal.
constexpr std::uint64_t kNoiseStreamTag = 0x6e6f697365ULL;

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : engine_(splitmix64(splitmix64(seed) ^ stream)) {}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::index(std::size_t n) {
  const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return std::min(i, n - 1);
}

void SynthConfig::validate() const {
  check_probability(tea_rate, "tea_rate");
  check_probability(lea_rate, "lea_rate");
  check_probability(t11_vs_t13_split, "t11_vs_t13_split");
  check_probability(l4_vs_l6_split, "l4_vs_l6_split");
  if (fov.kind != FovKind::Full &&
      (fov.min_len < 1 || fov.min_len > fov.max_len)) {
    throw ValidationError("fov window lengths must satisfy 1 <= min <= max");
  }
}

void NoiseConfig::validate() const {
  check_probability(label_confusion, "label_confusion");
  check_probability(head_dropout, "head_dropout");
  check_probability(transition_strength, "transition_strength");
  check_probability(visibility_boundary_decay, "visibility_boundary_decay");
}

std::vector<FinalLabel> generate_spine(const SynthConfig& cfg, Rng& rng) {
  cfg.validate();
  // Always draw all four so a rate change does not shift later draws.
  const bool tea = rng.bernoulli(cfg.tea_rate);
  const bool t11 = rng.bernoulli(cfg.t11_vs_t13_split);
  const bool lea = rng.bernoulli(cfg.lea_rate);
  const bool l4 = rng.bernoulli(cfg.l4_vs_l6_split);

  std::vector<FinalLabel> out;
  for (int i = index_of(FinalLabel::C1); i <= index_of(FinalLabel::T11); ++i) {
    out.push_back(static_cast<FinalLabel>(i));
  }
  if (!(tea && t11)) out.push_back(FinalLabel::T12);
  if (tea && !t11) out.push_back(FinalLabel::T13);
  for (int i = index_of(FinalLabel::L1); i <= index_of(FinalLabel::L4); ++i) {
    out.push_back(static_cast<FinalLabel>(i));
  }
  if (!(lea && l4)) out.push_back(FinalLabel::L5);
  if (lea && !l4) out.push_back(FinalLabel::L6);
  return out;
}

std::vector<FinalLabel> generate_spine(const SynthConfig& cfg) {
  Rng rng(cfg.seed, 0);
  return generate_spine(cfg, rng);
}

SubjectRecord emit_classifier_outputs(const std::vector<FinalLabel>& taught,
                                      const NoiseConfig& noise, Rng& rng) {
  noise.validate();
  if (taught.empty()) throw ContractError("emit_classifier_outputs: empty");
  const std::size_t n = taught.size();
  std::vector<RawLabel> raw;
  raw.reserve(n);
  for (FinalLabel l : taught) raw.push_back(encode(l));

  SubjectRecord out;
  out.vertebrae.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    VertebraScores& v = out.vertebrae[i];
    const int peak = index_of(raw[i]);

    v.label_scores.fill(0.0);
    v.label_scores[peak] = 1.0 - noise.label_confusion;
    const double split = rng.uniform();
    const bool has_lower = peak > 0;
    const bool has_upper = peak + 1 < kNumRawLabels;
    if (has_lower && has_upper) {
      v.label_scores[peak - 1] += noise.label_confusion * split;
      v.label_scores[peak + 1] += noise.label_confusion * (1.0 - split);
    } else if (has_lower) {
      v.label_scores[peak - 1] += noise.label_confusion;
    } else {
      v.label_scores[peak + 1] += noise.label_confusion;
    }

    v.region_scores.fill(0.0);
    for (int j = 0; j < kNumRawLabels; ++j) {
      v.region_scores[index_of(region_of(raw_label_at(j)))] +=
          v.label_scores[j];
    }

    const std::optional<RawLabel> next =
        i + 1 < n ? std::optional(raw[i + 1]) : std::nullopt;
    const TransitionSet fulfilled = fulfilled_transitions(raw[i], next);
    const double per_kind =
        noise.transition_strength / static_cast<double>(fulfilled.count());
    for (int k = 0; k < kNumTransitionKinds; ++k) {
      v.transition_scores[k] =
          (fulfilled[k] ? per_kind : 0.0) +
          (1.0 - noise.transition_strength) / kNumTransitionKinds;
    }

    if (rng.bernoulli(noise.head_dropout)) {
      v.label_scores = uniform_vector<kNumRawLabels>();
    }
    if (rng.bernoulli(noise.head_dropout)) {
      v.region_scores = uniform_vector<kNumRegions>();
    }
    if (rng.bernoulli(noise.head_dropout)) {
      v.transition_scores = uniform_vector<kNumTransitionKinds>();
    }

    v.visibility = (i == 0 || i + 1 == n)
                       ? 1.0 - noise.visibility_boundary_decay
                       : 1.0;
  }
  out.reference_labels = taught;
  return out;
}

SubjectRecord emit_classifier_outputs(const std::vector<FinalLabel>& taught,
                                      const NoiseConfig& noise) {
  Rng rng(noise.seed ^ kNoiseStreamTag, 0);
  return emit_classifier_outputs(taught, noise, rng);
}

SubjectRecord crop_fov(const SubjectRecord& subject, std::size_t start,
                       std::size_t length) {
  if (length < 1 || start > subject.size() ||
      length > subject.size() - start) {
    throw ContractError(fmt::format(
        "crop_fov: window [{}, {}) outside a chain of {} vertebrae", start,
        start + length, subject.size()));
  }
  SubjectRecord out;
  out.subject_id = fmt::format("{}@{}+{}", subject.subject_id, start, length);
  out.vertebrae.assign(subject.vertebrae.begin() + start,
                       subject.vertebrae.begin() + start + length);
  if (subject.reference_labels) {
    const auto& ref = *subject.reference_labels;
    out.reference_labels.emplace(ref.begin() + start,
                                 ref.begin() + start + length);
  }
  return out;
}

std::vector<SubjectRecord> all_windows(const SubjectRecord& subject,
                                       std::size_t min_len,
                                       std::size_t max_len) {
  std::vector<SubjectRecord> out;
  const std::size_t n = subject.size();
  for (std::size_t len = std::max<std::size_t>(min_len, 1);
       len <= std::min(max_len, n); ++len) {
    for (std::size_t start = 0; start + len <= n; ++start) {
      out.push_back(crop_fov(subject, start, len));
    }
  }
  return out;
}

GapInjection inject_gap(const SubjectRecord& subject, Rng& rng) {
  if (subject.size() < 2) {
    throw ContractError("inject_gap: need at least two vertebrae");
  }
  GapInjection out;
  out.removed_index = rng.index(subject.size());
  out.subject = subject;
  out.subject.subject_id =
      fmt::format("{}-gap{}", subject.subject_id, out.removed_index);
  out.subject.vertebrae.erase(out.subject.vertebrae.begin() +
                              static_cast<std::ptrdiff_t>(out.removed_index));
  if (out.subject.reference_labels) {
    auto& ref = *out.subject.reference_labels;
    ref.erase(ref.begin() + static_cast<std::ptrdiff_t>(out.removed_index));
  }
  return out;
}

GapInjection inject_gap(const SubjectRecord& subject, std::uint64_t seed) {
  Rng rng(seed, 0);
  return inject_gap(subject, rng);
}

std::vector<FinalLabel> relabel_without_anomalies(
    const std::vector<FinalLabel>& truth) {
  std::vector<FinalLabel> out;
  out.reserve(truth.size());
  // Position along the thoracolumbar column, anchored on the first
  // non-cervical label: T1 is 0, T13 is 12, a lumbar start assumes twelve
  // thoracic above it.
  int pos = -1;
  for (FinalLabel l : truth) {
    if (region_of(l) == Region::Cervical) {
      out.push_back(l);
      continue;
    }
    if (pos < 0) {
      pos = region_of(l) == Region::Thoracic
                ? index_of(l) - index_of(FinalLabel::T1)
                : 12 + index_of(l) - index_of(FinalLabel::L1);
    }
    if (pos < 12) {
      out.push_back(static_cast<FinalLabel>(index_of(FinalLabel::T1) + pos));
    } else {
      out.push_back(static_cast<FinalLabel>(
          std::min(index_of(FinalLabel::L1) + pos - 12,
                   index_of(FinalLabel::L6))));
    }
    ++pos;
  }
  return out;
}

std::vector<SubjectRecord> generate_corpus(const SynthConfig& cfg,
                                           const NoiseConfig& noise,
                                           std::size_t n_subjects) {
  cfg.validate();
  noise.validate();
  std::vector<SubjectRecord> out;
  for (std::size_t k = 0; k < n_subjects; ++k) {
    Rng spine_rng(cfg.seed, k);
    Rng noise_rng(noise.seed ^ kNoiseStreamTag, k);
    const auto spine = generate_spine(cfg, spine_rng);
    SubjectRecord subject = emit_classifier_outputs(spine, noise, noise_rng);
    subject.subject_id = fmt::format("synth-{}-{:05}", cfg.seed, k);

    switch (cfg.fov.kind) {
      case FovKind::Full:
        out.push_back(std::move(subject));
        break;
      case FovKind::RandomWindow: {
        const std::size_t lo = std::min(cfg.fov.min_len, subject.size());
        const std::size_t hi = std::min(cfg.fov.max_len, subject.size());
        const std::size_t len = lo + spine_rng.index(hi - lo + 1);
        const std::size_t start = spine_rng.index(subject.size() - len + 1);
        out.push_back(crop_fov(subject, start, len));
        break;
      }
      case FovKind::AllWindows:
        for (auto& w : all_windows(subject, cfg.fov.min_len, cfg.fov.max_len)) {
          out.push_back(std::move(w));
        }
        break;
    }
  }
  return out;
}

}  // namespace vertseq
