#include "vertseq/classifier_io.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "worked_example_fixture.hpp"
#include "gtest/gtest.h"
#include "vertseq/errors.hpp"

namespace vertseq {
namespace {

VertebraScores one_hot(RawLabel label, TransitionKind kind = TransitionKind::None,
                       double visibility = 1.0) {
  VertebraScores v;
  v.label_scores[index_of(label)] = 1.0;
  v.region_scores[index_of(region_of(label))] = 1.0;
  v.transition_scores[index_of(kind)] = 1.0;
  v.visibility = visibility;
  return v;
}

SubjectRecord four_vertebra_subject() {
  SubjectRecord s;
  s.subject_id = "s1";
  s.vertebrae = {one_hot(RawLabel::T11), one_hot(RawLabel::T12),
                 one_hot(RawLabel::L1, TransitionKind::FirstLumbar, 0.5),
                 one_hot(RawLabel::L2)};
  s.reference_labels = std::vector<FinalLabel>{FinalLabel::T11, FinalLabel::T12,
                                               FinalLabel::L1, FinalLabel::L2};
  return s;
}

// Random softmax-like subject, used by the property tests below.
SubjectRecord random_subject(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto fill = [&](auto& v) {
    double sum = 0.0;
    for (double& x : v) sum += (x = u(gen));
    for (double& x : v) x /= sum;
  };
  SubjectRecord s;
  s.subject_id = "rnd";
  s.vertebrae.resize(n);
  for (auto& v : s.vertebrae) {
    fill(v.label_scores);
    fill(v.region_scores);
    fill(v.transition_scores);
    v.visibility = u(gen);
  }
  return s;
}

TEST(ParseSubjectTest, RoundTripsFourVertebrae) {
  const SubjectRecord s = four_vertebra_subject();
  const SubjectRecord back = parse_subject(to_json_line(s));
  EXPECT_EQ(back.size(), 4u);
  EXPECT_EQ(back, s);
}

TEST(ParseSubjectTest, ShortLabelVectorIsSchemaError) {
  const std::string doc = R"({"subject_id":"x","vertebrae":[{
      "label_scores":[1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0],
      "region_scores":[1,0,0],"transition_scores":[1,0,0,0,0,0],
      "visibility":[1]}]})";
  EXPECT_THROW(parse_subject(doc), SchemaError);
}

TEST(ParseSubjectTest, VisibilityAboveOneIsValidationError) {
  SubjectRecord s = four_vertebra_subject();
  s.vertebrae[1].visibility = 1.3;
  EXPECT_THROW(parse_subject(to_json_line(s)), ValidationError);
}

TEST(ParseSubjectTest, NegativeScoreIsValidationError) {
  SubjectRecord s = four_vertebra_subject();
  s.vertebrae[0].label_scores[0] = -0.5;
  s.vertebrae[0].label_scores[1] = 0.5;
  s.vertebrae[0].label_scores[index_of(RawLabel::T11)] = 1.0;
  EXPECT_THROW(parse_subject(to_json_line(s)), ValidationError);
}

TEST(ParseSubjectTest, MalformedAndMissingFields) {
  EXPECT_THROW(parse_subject("{not json"), ParseError);
  EXPECT_THROW(parse_subject(R"({"vertebrae":[]})"), ParseError);
  try {
    parse_subject(R"({"subject_id":"abc","vertebrae":[{"label_scores":[]}]})");
    FAIL() << "expected an error";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("abc"), std::string::npos);
  }
}

TEST(ParseSubjectTest, RejectsInvalidReference) {
  SubjectRecord s = four_vertebra_subject();
  s.reference_labels = std::vector<FinalLabel>{FinalLabel::T11, FinalLabel::L1,
                                               FinalLabel::T12, FinalLabel::L2};
  EXPECT_THROW(parse_subject(to_json_line(s)), ValidationError);
}

TEST(ParseSubjectTest, AcceptsBareVisibilityNumber) {
  const std::string doc = R"({"subject_id":"x","vertebrae":[{
      "label_scores":[1,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0],
      "region_scores":[1,0,0],"transition_scores":[1,0,0,0,0,0],
      "visibility":0.25}]})";
  EXPECT_DOUBLE_EQ(parse_subject(doc).vertebrae[0].visibility, 0.25);
}

TEST(GaussianKernelTest, SumsToOneAndIsSymmetric) {
  for (double sigma : {0.3, 1.0, 2.5}) {
    const auto k = gaussian_kernel(sigma);
    EXPECT_EQ(k.size(), 2 * static_cast<std::size_t>(std::ceil(3 * sigma)) + 1);
    EXPECT_NEAR(std::accumulate(k.begin(), k.end(), 0.0), 1.0, 1e-15);
    for (std::size_t i = 0; i < k.size(); ++i) {
      EXPECT_DOUBLE_EQ(k[i], k[k.size() - 1 - i]);
    }
  }
  EXPECT_EQ(gaussian_kernel(0.0), std::vector<double>{1.0});
}

TEST(GaussianKernelTest, MatchesClosedForm) {
  const auto k = gaussian_kernel(1.0);
  double z = 0.0;
  for (int d = -3; d <= 3; ++d) z += std::exp(-0.5 * d * d);
  ASSERT_EQ(k.size(), 7u);
  EXPECT_NEAR(k[3], 1.0 / z, 1e-15);
  EXPECT_NEAR(k[4], std::exp(-0.5) / z, 1e-15);
}

TEST(NormalizeOutputsTest, SingleVertebraIdentity) {
  SubjectRecord s;
  s.subject_id = "one";
  s.vertebrae = {one_hot(RawLabel::C3)};
  s.vertebrae[0].visibility = 0.7;
  NormConfig cfg;
  cfg.enable_smoothing = false;
  const auto out = normalize_outputs(s, cfg);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out.c[0], s.vertebrae[0].label_scores);
  EXPECT_EQ(out.r_expanded[0], expand_regions(s.vertebrae[0].region_scores));
  EXPECT_EQ(out.t[0], s.vertebrae[0].transition_scores);
  EXPECT_EQ(out.s[0], 0.7);
}

TEST(NormalizeOutputsTest, RegionExpansionIsBlockConstant) {
  const RegionVector r{0.2, 0.5, 0.3};
  const LabelVector e = expand_regions(r);
  for (int j = 0; j < kNumRawLabels; ++j) {
    EXPECT_EQ(e[j], r[index_of(region_of(raw_label_at(j)))]);
  }
}

TEST(NormalizeOutputsTest, ExampleTransitionColumnUnchanged) {
  SubjectRecord s;
  s.subject_id = "fig";
  for (int i = 0; i < 4; ++i) s.vertebrae.push_back(one_hot(RawLabel::T10));
  const int lt = index_of(TransitionKind::LastThoracic);
  const int none = index_of(TransitionKind::None);
  for (int i : {1, 2}) {
    s.vertebrae[i].transition_scores[none] = 0.5;
    s.vertebrae[i].transition_scores[lt] = 0.5;
  }
  NormConfig cfg;
  const auto out = normalize_outputs(s, cfg);
  EXPECT_EQ(out.t[1][lt], 0.5);
  EXPECT_EQ(out.t[2][lt], 0.5);
  EXPECT_EQ(out.t[0][lt], 0.0);
}

TEST(NormalizeOutputsTest, CompetingClaimsAreScaledDown) {
  SubjectRecord s;
  s.subject_id = "two";
  s.vertebrae = {one_hot(RawLabel::T12), one_hot(RawLabel::L1)};
  const int lt = index_of(TransitionKind::LastThoracic);
  const int none = index_of(TransitionKind::None);
  for (auto& v : s.vertebrae) {
    v.transition_scores[none] = 0.1;
    v.transition_scores[lt] = 0.9;
  }
  const auto out = normalize_outputs(s, NormConfig{});
  // Hand computation: 0.9 / (0.9 + 0.9).
  EXPECT_DOUBLE_EQ(out.t[0][lt], 0.5);
  EXPECT_DOUBLE_EQ(out.t[1][lt], 0.5);
  // Column sum 0.2 is below one and is left alone.
  EXPECT_DOUBLE_EQ(out.t[0][none], 0.1);
}

TEST(NormalizeOutputsTest, BoundaryRowsAreAttenuated) {
  SubjectRecord s;
  s.subject_id = "flat";
  for (int i = 0; i < 9; ++i) s.vertebrae.push_back(one_hot(RawLabel::T5));
  const auto out = normalize_outputs(s, NormConfig{});
  const int j = index_of(RawLabel::T5);
  EXPECT_LT(out.c.front()[j], out.c[4][j]);
  EXPECT_LT(out.c.back()[j], out.c[4][j]);
  EXPECT_NEAR(out.c[4][j], 1.0, 1e-15);
  EXPECT_NEAR(out.c.front()[j], out.c.back()[j], 1e-15);
}

TEST(NormalizeOutputsTest, RowsAreCappedAtUnitNorm) {
  std::mt19937_64 gen(3);
  for (int rep = 0; rep < 50; ++rep) {
    const auto out = normalize_outputs(random_subject(gen, 1 + rep % 9), {});
    for (const auto& row : out.c) {
      double sq = 0.0;
      for (double x : row) sq += x * x;
      EXPECT_LE(std::sqrt(sq), 1.0 + 1e-12);
    }
  }
}

TEST(SmoothColumnsTest, ZeroSigmaIsIdentity) {
  std::mt19937_64 gen(11);
  const SubjectRecord s = random_subject(gen, 7);
  std::vector<LabelVector> rows;
  for (const auto& v : s.vertebrae) rows.push_back(v.label_scores);
  EXPECT_EQ(smooth_columns(rows, 0.0), rows);

  NormConfig cfg;
  cfg.gaussian_sigma = 0.0;
  cfg.transition_column_norm = false;
  NormConfig off = cfg;
  off.enable_smoothing = false;
  const auto a = normalize_outputs(s, cfg);
  const auto b = normalize_outputs(s, off);
  EXPECT_EQ(a.c, b.c);
  EXPECT_EQ(a.r_expanded, b.r_expanded);
}

TEST(SmoothColumnsTest, ColumnMassNeverIncreases) {
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 100; ++rep) {
    const SubjectRecord s = random_subject(gen, 1 + rep % 26);
    std::vector<LabelVector> rows;
    for (const auto& v : s.vertebrae) rows.push_back(v.label_scores);
    const double sigma = 0.25 + 0.05 * (rep % 40);
    const auto out = smooth_columns(rows, sigma);
    for (int j = 0; j < kNumRawLabels; ++j) {
      double before = 0.0, after = 0.0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        before += rows[i][j];
        after += out[i][j];
      }
      EXPECT_LE(after, before + 1e-12);
    }
  }
}

TEST(NormalizeOutputsTest, TransitionNormNeverIncreasesEntries) {
  std::mt19937_64 gen(9);
  for (int rep = 0; rep < 100; ++rep) {
    const SubjectRecord s = random_subject(gen, 1 + rep % 26);
    const auto out = normalize_outputs(s, NormConfig{});
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (int k = 0; k < kNumTransitionKinds; ++k) {
        EXPECT_LE(out.t[i][k], s.vertebrae[i].transition_scores[k]);
      }
    }
  }
}

TEST(NormalizeOutputsTest, Deterministic) {
  std::mt19937_64 gen(21);
  const SubjectRecord s = random_subject(gen, 17);
  const auto a = normalize_outputs(s, NormConfig{});
  const auto b = normalize_outputs(s, NormConfig{});
  EXPECT_EQ(a.c, b.c);
  EXPECT_EQ(a.r_expanded, b.r_expanded);
  EXPECT_EQ(a.t, b.t);
  EXPECT_EQ(a.s, b.s);
}

TEST(NormalizeOutputsTest, VisibilityPassesThrough) {
  std::mt19937_64 gen(2);
  const SubjectRecord s = random_subject(gen, 6);
  const auto out = normalize_outputs(s, NormConfig{});
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(out.s[i], s.vertebrae[i].visibility);
  }
}

TEST(NormConfigTest, NegativeSigmaRejected) {
  NormConfig cfg;
  cfg.gaussian_sigma = -1.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
}

}  // namespace
}  // namespace vertseq
