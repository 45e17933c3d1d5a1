#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mfwtnn/cube_io.hpp"
#include "oracles.hpp"

using namespace mfwtnn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mfwtnn_test_cube_io";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  fs::remove(p);
  return p;
}

}  // namespace

TEST(CubeIo, RoundtripIsBitExact) {
  std::mt19937_64 eng(81);
  const Cube x = oracle::random_cube({4, 5, 6}, eng);
  const fs::path p = scratch("rt.cube");
  save_cube(x, p);
  EXPECT_EQ(load_cube(p), x);
}

TEST(CubeIo, Width32RelativeError) {
  std::mt19937_64 eng(82);
  const Cube x = oracle::random_cube({7, 3, 5}, eng, 0.01, 10.0);
  const fs::path p = scratch("w32.cube");
  save_cube(x, p, {32, false});
  const Cube y = load_cube(p);
  EXPECT_EQ(fs::file_size(p), 62u + 105u * 4u);
  for (std::size_t n = 0; n < x.size(); ++n) EXPECT_LE(std::abs(y[n] - x[n]) / std::abs(x[n]), 1e-6);
}

TEST(CubeIo, HeaderIsSelfDescribing) {
  std::ostringstream os;
  write_cube(os, Cube({2, 3, 4}, 1.0), 64);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("MFWCUBE 1\ndims 2 3 4\nwidth 64\nbyteorder little\nlayout ijk\nend\n", 0), 0u);
  EXPECT_EQ(s.size(), 62u + 24u * 8u);
}

TEST(CubeIo, TruncatedPayload) {
  std::ostringstream os;
  write_cube(os, Cube({2, 2, 2}, 1.0));
  std::string s = os.str();
  s.pop_back();
  std::istringstream is(s);
  EXPECT_THROW(read_cube(is), IoError);
  std::istringstream longer(os.str() + "x");
  EXPECT_THROW(read_cube(longer), IoError);
}

TEST(CubeIo, RejectsNaN) {
  Cube x({2, 2, 2}, 1.0);
  x(1, 1, 1) = std::nan("");
  std::ostringstream os;
  write_cube(os, x);
  std::istringstream is(os.str());
  EXPECT_THROW(read_cube(is), IoError);
}

TEST(CubeIo, RejectsBadHeaders) {
  for (const std::string h : {"MFWCUBE 2\n", "MFWCUBE 1\ndims 1 1 1\nwidth 16\n",
                              "MFWCUBE 1\ndims 1 1 1\nwidth 64\nbyteorder big\n",
                              "MFWCUBE 1\ndims 1 1\nend\n", "MFWCUBE 1\ndims 1 1 1\nwidth 64\nend\n",
                              "MFWCUBE 1\ncolor red\n"}) {
    std::istringstream is(h);
    EXPECT_THROW(read_cube(is), IoError) << h;
  }
}

TEST(CubeIo, MissingFile) { EXPECT_THROW(load_cube("/nonexistent/x.cube"), IoError); }

TEST(CubeIo, Normalization) {
  Cube x({2, 2, 2}, std::vector<double>{2, 3, 4, 2.5, 3.5, 2, 4, 3});
  const fs::path p = scratch("norm.cube");
  save_cube(x, p);
  const Cube y = load_cube(p, {true});
  EXPECT_EQ(*std::min_element(y.data().begin(), y.data().end()), 0.0);
  EXPECT_EQ(*std::max_element(y.data().begin(), y.data().end()), 1.0);
  EXPECT_EQ(y[1], 0.5);
}

TEST(CubeIo, OverwriteNeedsForce) {
  const fs::path p = scratch("ow.cube");
  save_cube(Cube({1, 1, 1}, 1.0), p);
  EXPECT_THROW(save_cube(Cube({1, 1, 1}, 2.0), p), IoError);
  save_cube(Cube({1, 1, 1}, 2.0), p, {64, true});
  EXPECT_EQ(load_cube(p)[0], 2.0);
}

TEST(CubeIo, RejectsEmptyCube) {
  EXPECT_THROW(save_cube(Cube{}, scratch("empty.cube")), ArgumentError);
  EXPECT_THROW(save_cube(Cube({1, 1, 1}), scratch("w.cube"), {16, false}), ArgumentError);
}

TEST(Config, RoundtripAllFields) {
  SolverConfig c;
  c.model = Model::kMfwtnn;
  c.alpha = ModalWeights::normalized(1, 2, 0.3);
  c.lambda = 0.125;
  c.lambda_s = 3.5;
  c.tau_n = 0.2;
  c.noise_sigma = 0.05;
  c.c1 = 0.4;
  c.c2 = 0.9;
  c.eps_log = 0.3;
  c.delta = 1e-7;
  c.mu0 = 2e-3;
  c.beta0 = 3e-3;
  c.rho = 1.1;
  c.mu_max = 1e8;
  c.tol = 1e-6;
  c.max_iters = 77;
  NoiseSpec n = case_spec(8, 123456789012345ULL, 20);
  n.stripes->offset_lo = -0.1;
  std::ostringstream os;
  write_solver_config(os, c);
  write_noise_spec(os, n);
  const ConfigFile back = parse_config(os.str());
  std::ostringstream again;
  write_solver_config(again, back.solver);
  write_noise_spec(again, *back.noise);
  EXPECT_EQ(again.str(), os.str());
  EXPECT_EQ(back.solver.alpha.alpha, c.alpha.alpha);
  EXPECT_EQ(*back.solver.lambda, 0.125);
  EXPECT_FALSE(back.solver.tau);
  EXPECT_EQ(*back.noise, n);
}

TEST(Config, DefaultsWhenEmpty) {
  const ConfigFile c = parse_config("# nothing\n\n");
  EXPECT_FALSE(c.noise);
  EXPECT_EQ(c.solver.lambda_s, SolverConfig{}.lambda_s);
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config("lamda_s = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("noise.gausian = 0.1\n"), ConfigError);
  EXPECT_THROW(parse_config("tol = abc\n"), ConfigError);
  EXPECT_THROW(parse_config("max_iters = 2.5\n"), ConfigError);
  EXPECT_THROW(parse_config("rho = 0.9\n"), ConfigError);
  EXPECT_THROW(parse_config("model = rpca\n"), ConfigError);
  EXPECT_THROW(parse_config("just text\n"), ConfigError);
  EXPECT_THROW(parse_config("alpha = 1,2\n"), ConfigError);
  EXPECT_THROW(parse_config("noise.seed = -1\n"), ConfigError);
}

TEST(Config, RangesAndComments) {
  const ConfigFile c = parse_config("noise.gaussian = 0.1:0.3  # per band\nnoise.stripes = 2:5\nalpha3 = 0.5\n");
  ASSERT_TRUE(c.noise);
  EXPECT_EQ(c.noise->gaussian, (LevelRange{0.1, 0.3}));
  EXPECT_EQ(c.noise->stripes->band_first, 2u);
  EXPECT_EQ(c.noise->stripes->band_last, 5u);
  EXPECT_NEAR(c.solver.alpha[3], 0.5 / 2.5, 1e-15);
}

TEST(History, Csv) {
  std::ostringstream os;
  write_history_csv(os, {{1, 0.5, 0.25, 3.0}, {2, 0.125, 0.0625, 2.0}});
  EXPECT_EQ(os.str(), "iter,rel_change,residual,objective\n1,0.5,0.25,3\n2,0.125,0.0625,2\n");
}
