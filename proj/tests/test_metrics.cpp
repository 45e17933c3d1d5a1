#include <gtest/gtest.h>

#include <numbers>
#include <random>
#include <sstream>

#include "mfwtnn/metrics.hpp"
#include "oracles.hpp"

using namespace mfwtnn;

namespace {

double psnr_oracle(const Cube& a, const Cube& b) {
  const Dims d = a.dims();
  double total = 0.0;
  for (std::size_t k = 0; k < d.n3; ++k) {
    double mse = 0.0;
    for (std::size_t i = 0; i < d.n1; ++i)
      for (std::size_t j = 0; j < d.n2; ++j) mse += std::pow(a(i, j, k) - b(i, j, k), 2);
    mse /= static_cast<double>(d.n1 * d.n2);
    total += std::min(100.0, 10.0 * std::log10(1.0 / mse));
  }
  return total / static_cast<double>(d.n3);
}

double ergas_oracle(const Cube& a, const Cube& b) {
  const Dims d = a.dims();
  double acc = 0.0;
  for (std::size_t k = 0; k < d.n3; ++k) {
    double mse = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < d.n1; ++i)
      for (std::size_t j = 0; j < d.n2; ++j) {
        mse += std::pow(a(i, j, k) - b(i, j, k), 2);
        mean += a(i, j, k);
      }
    const double px = static_cast<double>(d.n1 * d.n2);
    acc += (mse / px) / std::pow(mean / px, 2);
  }
  return 100.0 * std::sqrt(acc / static_cast<double>(d.n3));
}

double sam_oracle(const Cube& a, const Cube& b) {
  const Dims d = a.dims();
  double acc = 0.0;
  for (std::size_t i = 0; i < d.n1; ++i)
    for (std::size_t j = 0; j < d.n2; ++j) {
      double dot = 0, na = 0, nb = 0;
      for (std::size_t k = 0; k < d.n3; ++k) {
        dot += a(i, j, k) * b(i, j, k);
        na += a(i, j, k) * a(i, j, k);
        nb += b(i, j, k) * b(i, j, k);
      }
      acc += std::acos(std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0));
    }
  return acc / static_cast<double>(d.n1 * d.n2) * 180.0 / std::numbers::pi;
}

}  // namespace

TEST(Metrics, SelfComparison) {
  std::mt19937_64 eng(71);
  const Cube x = oracle::random_cube({16, 14, 5}, eng, 0.05, 1.0);
  const MetricsReport r = evaluate(x, x);
  EXPECT_EQ(r.mpsnr, 100.0);
  EXPECT_EQ(r.mssim, 1.0);
  EXPECT_EQ(r.ergas, 0.0);
  EXPECT_EQ(r.msam, 0.0);
  EXPECT_EQ(r.band_psnr.size(), 5u);
  EXPECT_EQ(r.band_ssim.size(), 5u);
}

TEST(Metrics, MatchOracles) {
  std::mt19937_64 eng(72);
  for (int t = 0; t < 5; ++t) {
    const Cube a = oracle::random_cube({15, 17, 6}, eng, 0.1, 1.0);
    Cube b = a;
    std::normal_distribution<double> n(0.0, 0.05 * (t + 1));
    for (double& v : b.data()) v += n(eng);
    EXPECT_NEAR(mpsnr(a, b), psnr_oracle(a, b), 1e-10);
    double ssim = 0.0;
    for (std::size_t k = 0; k < 6; ++k) ssim += oracle::ssim_direct(a, b, k) / 6.0;
    EXPECT_NEAR(mssim(a, b), ssim, 1e-10);
    EXPECT_NEAR(ergas(a, b), ergas_oracle(a, b), 1e-10);
    EXPECT_NEAR(msam(a, b), sam_oracle(a, b), 1e-10);
  }
}

TEST(Metrics, KnownPsnr) {
  const Cube a({4, 4, 2}, 0.5);
  const Cube b({4, 4, 2}, 0.6);
  EXPECT_NEAR(mpsnr(a, b), 20.0, 1e-12);
}

TEST(Metrics, SamOfScaledSpectraIsZero) {
  std::mt19937_64 eng(73);
  const Cube a = oracle::random_cube({3, 3, 8}, eng, 0.1, 1.0);
  EXPECT_NEAR(msam(a, a * 2.0), 0.0, 1e-6);
}

TEST(Metrics, DegenerateInputs) {
  const Cube a({12, 12, 2}, 0.0);
  Cube b({12, 12, 2}, 0.1);
  std::vector<std::string> w;
  EXPECT_TRUE(std::isnan(ergas(a, b, &w)));
  EXPECT_FALSE(w.empty());
  w.clear();
  EXPECT_TRUE(std::isnan(msam(a, b, &w)));
  EXPECT_FALSE(w.empty());
  EXPECT_THROW(band_ssim(Cube({5, 5, 2}), Cube({5, 5, 2})), ArgumentError);
  const MetricsReport r = evaluate(Cube({5, 5, 2}, 0.5), Cube({5, 5, 2}, 0.5));
  EXPECT_TRUE(std::isnan(r.mssim));
  EXPECT_THROW(evaluate(Cube({5, 5, 2}), Cube({5, 5, 3})), ArgumentError);
}

TEST(Metrics, CsvOutputs) {
  std::mt19937_64 eng(74);
  const Cube a = oracle::random_cube({12, 12, 3}, eng, 0.1, 1.0);
  const MetricsReport r = evaluate(a, a);
  std::ostringstream m, b;
  write_metrics_csv(m, r);
  write_band_csv(b, r);
  EXPECT_EQ(m.str(), "mpsnr,mssim,ergas,msam\n100,1,0,0\n");
  EXPECT_EQ(b.str(), "band,psnr,ssim\n1,100,1\n2,100,1\n3,100,1\n");
}
