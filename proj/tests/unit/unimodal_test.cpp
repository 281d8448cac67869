#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cvpyr/distribution.hpp"
#include "cvpyr/error.hpp"
#include "cvpyr/unimodal.hpp"

using namespace cvpyr;

namespace {

std::vector<double> random_distribution(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> p(n);
  double s = 0;
  for (auto& v : p) s += (v = u(rng) * u(rng));
  for (auto& v : p) v /= s;
  return p;
}

double moment_about(const std::vector<double>& p, const std::vector<float>& d, double c) {
  double m = 0;
  for (std::size_t j = 0; j < p.size(); ++j) m += p[j] * (d[j] - c) * (d[j] - c);
  return m;
}

std::vector<double> filter(const std::vector<double>& p, const std::vector<float>& d, double conf,
                           const UnimodalParams& params = {}) {
  std::vector<double> out(p.size());
  auf_filter_distribution<double>(p, d, conf, params, out);
  return out;
}

}  // namespace

TEST(ReferenceUnimodal, Example) {
  const std::vector<double> h = {0, 1, 2};
  const auto p = reference_unimodal(h, 1.0, 1.0);
  EXPECT_NEAR(p[0], 0.21194, 1e-5);
  EXPECT_NEAR(p[1], 0.57612, 1e-5);
  EXPECT_NEAR(p[2], 0.21194, 1e-5);
}

TEST(ReferenceUnimodal, SigmaLimits) {
  const std::vector<double> h = {400, 450, 500, 550, 600};
  const auto sharp = reference_unimodal(h, 500, 1e-6);
  for (int j = 0; j < 5; ++j) EXPECT_NEAR(sharp[j], j == 2 ? 1.0 : 0.0, 1e-9);
  const std::vector<double> unit = {0, 1, 2, 3, 4};
  const auto flat = reference_unimodal(unit, 2, 1e6);
  for (double p : flat) EXPECT_NEAR(p, 0.2, 1e-6);
  EXPECT_THROW(reference_unimodal(h, 500, 0.0), InputError);
}

TEST(ReferenceUnimodal, StepUnitsDivideBySpacing) {
  const std::vector<double> h = {0, 10, 20};
  const auto a = reference_unimodal_steps(h, 10, 1.0);
  EXPECT_NEAR(a[1], 0.57612, 1e-5);
}

TEST(SigmaFromConfidence, Examples) {
  const UnimodalParams p;
  EXPECT_DOUBLE_EQ(sigma_from_confidence(1.0, p), 9.0);
  EXPECT_DOUBLE_EQ(sigma_from_confidence(0.5, p), 15.5);
  double prev = 1e9;
  for (double f = 0.01; f <= 1.0; f += 0.01) {
    const double s = sigma_from_confidence(f, p);
    EXPECT_LT(s, prev);
    prev = s;
  }
}

TEST(FocalLoss, GammaZeroIsCrossEntropy) {
  const std::vector<double> ref = {1, 0};
  const std::vector<double> logits = {0, 0};
  EXPECT_NEAR(stereo_focal_loss(ref, logits, 2, 0.0).value, std::log(2.0), 1e-12);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  for (int t = 0; t < 20; ++t) {
    const auto p = random_distribution(rng, 5);
    std::vector<double> z(5), q(5);
    for (auto& v : z) v = n(rng);
    softmax<double>(z, q);
    double ce = 0;
    for (int j = 0; j < 5; ++j) ce -= p[j] * std::log(q[j]);
    EXPECT_NEAR(stereo_focal_loss(p, z, 5, 0.0).value, ce, 1e-9);
  }
}

TEST(FocalLoss, MatchingOneHotIsNearZero) {
  const std::vector<double> ref = {0, 1, 0};
  const std::vector<double> logits = {-40, 40, -40};
  EXPECT_NEAR(stereo_focal_loss(ref, logits, 3, 0.0).value, 0.0, 1e-12);
  EXPECT_NEAR(stereo_focal_loss(ref, logits, 3, 1.0).value, 0.0, 1e-12);
}

TEST(FocalLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (FocalWeight sign : {FocalWeight::kPrinted, FocalWeight::kConventional}) {
    for (double gamma : {0.0, 1.0, 2.0}) {
      std::vector<double> ref;
      for (int i = 0; i < 4; ++i) {
        const auto p = random_distribution(rng, 5);
        ref.insert(ref.end(), p.begin(), p.end());
      }
      std::vector<double> z(20);
      for (auto& v : z) v = n(rng);
      const auto lg = stereo_focal_loss(ref, z, 5, gamma, sign);
      for (std::size_t k = 0; k < z.size(); ++k) {
        auto zp = z, zm = z;
        zp[k] += 1e-6;
        zm[k] -= 1e-6;
        const double num = (stereo_focal_loss(ref, zp, 5, gamma, sign).value -
                            stereo_focal_loss(ref, zm, 5, gamma, sign).value) / 2e-6;
        const double rel = std::abs(num - lg.gradient[k]) / std::max({std::abs(num), std::abs(lg.gradient[k]), 1e-8});
        EXPECT_LT(rel, 1e-5) << k;
      }
    }
  }
}

TEST(FocalLoss, DescentConvergesToReference) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n;
  for (int t = 0; t < 5; ++t) {
    const auto ref = random_distribution(rng, 5);
    std::vector<double> z(5), q(5);
    for (auto& v : z) v = n(rng);
    for (int it = 0; it < 5000; ++it) {
      const auto lg = stereo_focal_loss(ref, z, 5, 0.0);
      for (int j = 0; j < 5; ++j) z[j] -= 1.0 * lg.gradient[j];
    }
    softmax<double>(z, q);
    double tv = 0;
    for (int j = 0; j < 5; ++j) tv += 0.5 * std::abs(q[j] - ref[j]);
    EXPECT_LT(tv, 1e-3);
  }
}

TEST(FocalWeightTest, ClampsAtCertainty) {
  EXPECT_TRUE(std::isfinite(focal_weight(1.0, 1.0, FocalWeight::kPrinted)));
  EXPECT_NEAR(focal_weight(1.0, 1.0, FocalWeight::kPrinted), 1e6, 1e-3);
  EXPECT_DOUBLE_EQ(focal_weight(0.5, 2.0, FocalWeight::kConventional), 0.25);
  EXPECT_DOUBLE_EQ(focal_weight(0.5, 2.0, FocalWeight::kPrinted), 4.0);
}

TEST(ConfidenceLoss, Examples) {
  const std::vector<double> ones = {1, 1, 1};
  EXPECT_EQ(confidence_loss(ones).value, 0.0);
  const std::vector<double> e = {std::exp(-1.0)};
  EXPECT_NEAR(confidence_loss(e).value, 1.0, 1e-12);
  const std::vector<double> f = {0.2, 0.7, 0.9};
  const auto lg = confidence_loss(f);
  double naive = 0;
  for (double v : f) naive -= std::log(v) / 3.0;
  EXPECT_NEAR(lg.value, naive, 1e-9);
  for (double g : lg.gradient) EXPECT_LT(g, 0.0);
  const std::vector<double> bad = {0.5, 0.0};
  EXPECT_THROW(confidence_loss(bad), InputError);
}

TEST(RegressionLoss, Examples) {
  DepthMap d(2, 2, 5.0), gt(2, 2, 5.0);
  Mask m(2, 2, 1);
  EXPECT_EQ(regression_loss(d, gt, m).value, 0.0);
  d(1, 0) = 7.5;
  EXPECT_DOUBLE_EQ(regression_loss(d, gt, m).value, 2.5);
  EXPECT_DOUBLE_EQ(regression_loss(d, gt, m, true).value, 2.5 / 4);
  EXPECT_THROW(regression_loss(d, gt, Mask(2, 2, 0)), InputError);
}

TEST(RegressionLoss, MatchesNaiveOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(400, 1000);
  DepthMap d(8, 8), gt(8, 8);
  Mask m(8, 8);
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = u(rng);
    gt[i] = u(rng);
    m[i] = (i % 3) != 0;
  }
  double naive = 0;
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      if (m(x, y)) naive += std::abs(d(x, y) - gt(x, y));
  const auto lg = regression_loss(d, gt, m);
  EXPECT_NEAR(lg.value, naive, 1e-9);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!m[i]) EXPECT_EQ(lg.gradient[i], 0.0);
    else EXPECT_EQ(std::abs(lg.gradient[i]), 1.0);
  }
}

TEST(TotalLoss, Examples) {
  const LossWeights w;
  const std::vector<double> zeros = {0, 0, 0};
  EXPECT_EQ(total_loss(0, 0, zeros, w).total, 0.0);
  const std::vector<double> ones = {1, 1, 1};
  EXPECT_NEAR(total_loss(1, 1, ones, w).total, 93.5, 1e-9);
  const double base = total_loss(1, 1, ones, w).total;
  EXPECT_NEAR(total_loss(2, 1, ones, w).total - base, 10.0, 1e-9);
  EXPECT_NEAR(total_loss(1, 2, ones, w).total - base, 80.0, 1e-9);
  const std::vector<double> third = {1, 1, 2};
  EXPECT_NEAR(total_loss(1, 1, third, w).total - base, 2.0, 1e-9);
}

TEST(Auf, OneHotIsUnchanged) {
  const std::vector<float> d = {400, 450, 500, 550};
  const std::vector<double> p = {0, 0, 1, 0};
  EXPECT_EQ(filter(p, d, 0.3), p);
}

TEST(Auf, BimodalSecondaryModeIsSuppressed) {
  const std::vector<float> d = {0, 1, 2};
  const double eps = 1e-3;
  const std::vector<double> p = {0.45, 0.05, 0.45 + eps};
  const auto q = filter(p, d, 0.5);
  EXPECT_EQ(argmax<double>(q), 2u);
  EXPECT_LT(q[0] / q[2], p[0] / p[2]);
  // Spread about the retained peak shrinks.
  EXPECT_LT(moment_about(q, d, 2.0), moment_about(p, d, 2.0));
}

TEST(Auf, MeanCentredVarianceCanGrow) {
  // With a wide kernel the near mode loses mass and the mean moves towards the
  // middle of the hypothesis list, which raises the variance about the mean.
  const std::vector<float> d = {0, 1, 2};
  const std::vector<double> p = {0.45, 0.05, 0.451};
  const auto q = filter(p, d, 1.0);
  const std::vector<double> pd(d.begin(), d.end());
  const double before = variance<double, double>(p, pd, expectation<double, double>(p, pd));
  const double after = variance<double, double>(q, pd, expectation<double, double>(q, pd));
  EXPECT_GT(after, before);
}

TEST(Auf, ArgmaxIsPreservedAndOutputNormalized) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<float> d(32);
  for (int j = 0; j < 32; ++j) d[j] = 400.0f + 20.0f * j;
  for (int t = 0; t < 1000; ++t) {
    const auto p = random_distribution(rng, 32);
    const auto q = filter(p, d, u(rng));
    EXPECT_EQ(argmax<double>(q), argmax<double>(p));
    double s = 0;
    for (double v : q) {
      EXPECT_GE(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(Auf, VolumeFilterMatchesPerPixelKernel) {
  auto hyps = std::make_shared<const DepthHypotheses>(DepthHypotheses::shared(2, 1, {1, 2, 3, 4}));
  ProbabilityVolume pv(2, 1, 4, hyps);
  const float a[] = {0.4f, 0.1f, 0.1f, 0.4f};
  std::copy(a, a + 4, pv.prob.begin());
  std::copy(a, a + 4, pv.prob.begin() + 4);
  ConfidenceMap conf(2, 1);
  conf(0, 0) = 0.2;
  conf(1, 0) = 0.9;
  const ProbabilityVolume out = auf_filter(pv, conf, UnimodalParams{});
  const std::vector<float> dd = {1, 2, 3, 4};
  const std::vector<double> pa(a, a + 4);
  for (int x = 0; x < 2; ++x) {
    const auto q = filter(pa, dd, conf(x, 0));
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(out.at(x, 0)[j], q[j], 1e-6);
  }
}

TEST(GradientChecks, AllPass) {
  const auto rows = run_gradient_checks(50, 1);
  ASSERT_FALSE(rows.empty());
  for (const auto& r : rows) EXPECT_TRUE(r.passed) << r.name << " " << r.max_relative_error;
}
