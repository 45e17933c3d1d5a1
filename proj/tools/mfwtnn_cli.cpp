// mfwtnn: simulate | denoise | metrics | bench
//
// Exit codes: 0 success (denoise: converged), 2 denoise stopped at the
// iteration cap, 1 runtime error, 64 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mfwtnn/mfwtnn.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace mfwtnn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitIterationCap = 2;
constexpr int kExitUsage = 64;

struct Common {
  std::string out = ".";
  int threads = 0;
  bool force = false;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path prepare_out(const Common& c) {
  fs::path dir(c.out);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text, bool force) {
  if (!force && fs::exists(path)) throw IoError(path.string() + " exists (use --force to replace it)");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

BandRange parse_band_range(const std::string& s) {
  const auto c = s.find(':');
  if (c == std::string::npos) throw ArgumentError("band range must look like first:last");
  try {
    return {std::stoul(s.substr(0, c)), std::stoul(s.substr(c + 1))};
  } catch (const std::exception&) {
    throw ArgumentError("band range must look like first:last");
  }
}

/// "16,32x32x8,64" -> cubic or explicit dims.
std::vector<Dims> parse_sizes(const std::string& s) {
  std::vector<Dims> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) {
    std::vector<std::size_t> n;
    std::istringstream parts(item);
    std::string p;
    while (std::getline(parts, p, 'x')) {
      try {
        n.push_back(std::stoul(p));
      } catch (const std::exception&) {
        throw ArgumentError("bad size '" + item + "'");
      }
    }
    if (n.size() == 1) out.push_back({n[0], n[0], n[0]});
    else if (n.size() == 3) out.push_back({n[0], n[1], n[2]});
    else throw ArgumentError("bad size '" + item + "' (use N or N1xN2xN3)");
  }
  if (out.empty()) throw ArgumentError("no sizes given");
  return out;
}

void write_manifest(const fs::path& dir, const json& m, bool force) {
  write_text(dir / "manifest.json", m.dump(2) + "\n", force);
}

// --- simulate --------------------------------------------------------------

struct SimulateArgs {
  std::string clean;
  int case_id = 0;
  std::string spec;
  std::uint64_t seed = 0;
  std::string stripe_bands;
  bool normalize = false;
  int width = 64;
};

int cmd_simulate(const SimulateArgs& a, const Common& c) {
  const Cube x = load_cube(a.clean, {a.normalize});
  NoiseSpec spec;
  if (!a.spec.empty()) {
    const ConfigFile cfg = load_config(a.spec);
    if (!cfg.noise) throw ConfigError(a.spec + ": no noise.* keys");
    spec = *cfg.noise;
    spec.seed = a.seed;
  } else {
    std::optional<BandRange> bands;
    if (!a.stripe_bands.empty()) bands = parse_band_range(a.stripe_bands);
    spec = case_spec(a.case_id, a.seed, x.dims().n3, bands);
  }
  const auto t0 = std::chrono::steady_clock::now();
  const Cube y = apply_noise(x, spec);
  const double elapsed = seconds_since(t0);

  const fs::path dir = prepare_out(c);
  save_cube(y, dir / "noisy.cube", {a.width, c.force});
  write_text(dir / "noise.cfg", render([&](std::ostream& os) { write_noise_spec(os, spec); }), c.force);
  json m;
  m["command"] = "simulate";
  m["inputs"] = {{"clean", a.clean}};
  m["normalize"] = a.normalize;
  m["case"] = a.spec.empty() ? json(a.case_id) : json(nullptr);
  m["seed"] = a.seed;
  m["output_dir"] = dir.string();
  m["files"] = {{"noisy", "noisy.cube"}, {"noise_spec", "noise.cfg"}};
  m["timing"] = {{"seconds", elapsed}};
  write_manifest(dir, m, c.force);
  std::cout << "noisy MPSNR " << format_double(mpsnr(x, y)) << " dB -> " << (dir / "noisy.cube").string() << '\n';
  return kExitOk;
}

// --- denoise ---------------------------------------------------------------

struct DenoiseArgs {
  std::string noisy;
  std::string config;
  std::string clean;
  std::string model;
  int max_iters = 0;
  bool normalize = false;
  bool quiet = false;
  int width = 64;
};

int cmd_denoise(const DenoiseArgs& a, const Common& c) {
  SolverConfig cfg;
  if (!a.config.empty()) cfg = load_config(a.config).solver;
  if (!a.model.empty()) cfg.model = parse_model(a.model);
  if (a.max_iters > 0) cfg.max_iters = a.max_iters;
  cfg.validate();

  const Cube y = load_cube(a.noisy, {a.normalize});
  std::optional<Cube> ref;
  if (!a.clean.empty()) {
    ref = load_cube(a.clean, {a.normalize});
    ref->require_same(y);
  }

  const auto t0 = std::chrono::steady_clock::now();
  const DenoiseResult r = denoise(y, cfg, [&](const SolverState&, const IterationRecord& rec) {
    if (!a.quiet) {
      std::cerr << "iter " << rec.iter << "  rel_change " << format_double(rec.rel_change) << "  residual "
                << format_double(rec.residual) << '\n';
    }
  });
  const double elapsed = seconds_since(t0);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';

  const fs::path dir = prepare_out(c);
  const SaveOptions so{a.width, c.force};
  save_cube(r.x_hat, dir / "x_hat.cube", so);
  save_cube(r.s_hat, dir / "s_hat.cube", so);
  save_cube(r.n_hat, dir / "n_hat.cube", so);
  write_text(dir / "history.csv", render([&](std::ostream& os) { write_history_csv(os, r.history); }), c.force);
  const std::string snapshot = render([&](std::ostream& os) { write_solver_config(os, cfg); });
  write_text(dir / "config.cfg", snapshot, c.force);

  json m;
  m["command"] = "denoise";
  m["inputs"] = {{"noisy", a.noisy}, {"config", a.config.empty() ? json(nullptr) : json(a.config)}};
  m["normalize"] = a.normalize;
  m["config"] = snapshot;
  m["output_dir"] = dir.string();
  m["files"] = {{"x_hat", "x_hat.cube"}, {"s_hat", "s_hat.cube"}, {"n_hat", "n_hat.cube"},
                {"history", "history.csv"}, {"config", "config.cfg"}};
  m["iterations"] = r.iterations;
  m["converged"] = r.converged;
  m["warnings"] = r.warnings;
  if (ref) {
    const MetricsReport rep = evaluate(*ref, r.x_hat);
    write_text(dir / "metrics.csv", render([&](std::ostream& os) { write_metrics_csv(os, rep); }), c.force);
    write_text(dir / "per_band.csv", render([&](std::ostream& os) { write_band_csv(os, rep); }), c.force);
    m["inputs"]["clean"] = a.clean;
    m["files"]["metrics"] = "metrics.csv";
    m["files"]["per_band"] = "per_band.csv";
    m["metrics"] = {{"mpsnr", rep.mpsnr}, {"mssim", rep.mssim}, {"ergas", rep.ergas}, {"msam", rep.msam}};
    write_metrics_text(std::cout, rep);
  }
  m["timing"] = {{"seconds", elapsed}};
  write_manifest(dir, m, c.force);
  std::cout << to_string(cfg.model) << ": " << r.iterations << " iterations, "
            << (r.converged ? "converged" : "stopped at iteration cap") << ", " << format_double(elapsed) << " s\n";
  return r.converged ? kExitOk : kExitIterationCap;
}

// --- metrics ---------------------------------------------------------------

struct MetricsArgs {
  std::string ref;
  std::string est;
  bool normalize = false;
};

int cmd_metrics(const MetricsArgs& a, const Common& c) {
  const Cube ref = load_cube(a.ref, {a.normalize});
  const Cube est = load_cube(a.est, {a.normalize});
  const MetricsReport rep = evaluate(ref, est);
  const fs::path dir = prepare_out(c);
  write_text(dir / "metrics.csv", render([&](std::ostream& os) { write_metrics_csv(os, rep); }), c.force);
  write_text(dir / "per_band.csv", render([&](std::ostream& os) { write_band_csv(os, rep); }), c.force);
  write_metrics_text(std::cout, rep);
  return kExitOk;
}

// --- bench -----------------------------------------------------------------

struct BenchArgs {
  std::string sizes = "16,32,64";
  std::string config;
  int repeats = 5;
  std::uint64_t seed = 0;
};

int cmd_bench(const BenchArgs& a, const Common& c) {
  if (a.repeats < 1) throw ArgumentError("--repeats must be positive");
  SolverConfig cfg;
  if (!a.config.empty()) cfg = load_config(a.config).solver;
  cfg.validate();
  std::ostringstream csv;
  csv << "n1,n2,n3,repeats,median_s,min_s,max_s,stddev_s\n";
  for (const Dims& d : parse_sizes(a.sizes)) {
    const Cube x = low_rank_cube(d, 3, a.seed);
    const Cube y = apply_noise(x, case_spec(1, a.seed, d.n3));
    const SolverState init = init_state(y, cfg);
    std::vector<double> t(static_cast<std::size_t>(a.repeats));
    for (double& v : t) {
      SolverState st = init;
      const auto t0 = std::chrono::steady_clock::now();
      iterate(st, cfg, y);
      v = seconds_since(t0);
    }
    std::vector<double> sorted = t;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    double mean = 0.0;
    for (double v : t) mean += v / static_cast<double>(n);
    double var = 0.0;
    for (double v : t) var += (v - mean) * (v - mean);
    const double sd = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
    csv << d.n1 << ',' << d.n2 << ',' << d.n3 << ',' << n << ',' << format_double(median) << ','
        << format_double(sorted.front()) << ',' << format_double(sorted.back()) << ',' << format_double(sd) << '\n';
  }
  const fs::path dir = prepare_out(c);
  write_text(dir / "bench.csv", csv.str(), c.force);
  std::cout << csv.str();
  return kExitOk;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-o,--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("-t,--threads", c.threads, "Worker thread cap (default: $MFWTNN_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);
  sub->add_flag("-f,--force", c.force, "Overwrite existing output files");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-noise hyperspectral denoising with (non)convex multi-mode frequency-weighted TNN"};
  app.require_subcommand(1);

  Common common;

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Degrade a clean cube with a benchmark noise case or a noise spec");
  s->add_option("--clean", sim.clean, "Clean cube")->required()->check(CLI::ExistingFile);
  auto* case_opt = s->add_option("--case", sim.case_id, "Noise case 1..8")->check(CLI::Range(1, 8));
  auto* spec_opt = s->add_option("--spec", sim.spec, "Config file with noise.* keys")->check(CLI::ExistingFile);
  case_opt->excludes(spec_opt);
  s->add_option("--seed", sim.seed, "Noise seed")->capture_default_str();
  s->add_option("--stripe-bands", sim.stripe_bands, "Stripe bands first:last for case 8 (1-based)");
  s->add_flag("--normalize", sim.normalize, "Min-max normalize the clean cube to [0,1]");
  s->add_option("--width", sim.width, "Output scalar width")->check(CLI::IsMember({32, 64}));
  add_common(s, common);

  DenoiseArgs den;
  auto* d = app.add_subcommand("denoise", "Run the ADMM solver on a noisy cube");
  d->add_option("--noisy", den.noisy, "Noisy cube")->required()->check(CLI::ExistingFile);
  d->add_option("-c,--config", den.config, "Solver config file")->check(CLI::ExistingFile);
  d->add_option("--clean", den.clean, "Optional reference cube; writes metrics")->check(CLI::ExistingFile);
  d->add_option("--model", den.model, "Override model: mfwtnn, nonmfwtnn or tnn");
  d->add_option("--max-iters", den.max_iters, "Override the iteration cap")->check(CLI::PositiveNumber);
  d->add_flag("--normalize", den.normalize, "Min-max normalize input cubes to [0,1]");
  d->add_flag("-q,--quiet", den.quiet, "Do not print per-iteration progress");
  d->add_option("--width", den.width, "Output scalar width")->check(CLI::IsMember({32, 64}));
  add_common(d, common);

  MetricsArgs met;
  auto* m = app.add_subcommand("metrics", "Compare an estimate against a reference cube");
  m->add_option("--ref", met.ref, "Reference cube")->required()->check(CLI::ExistingFile);
  m->add_option("--est", met.est, "Estimated cube")->required()->check(CLI::ExistingFile);
  m->add_flag("--normalize", met.normalize, "Min-max normalize both cubes to [0,1]");
  add_common(m, common);

  BenchArgs ben;
  auto* b = app.add_subcommand("bench", "Time one solver iteration over a size sweep");
  b->add_option("--sizes", ben.sizes, "Comma list of N (cube) or N1xN2xN3")->capture_default_str();
  b->add_option("-c,--config", ben.config, "Solver config file")->check(CLI::ExistingFile);
  b->add_option("--repeats", ben.repeats, "Timed repeats per size")->capture_default_str();
  b->add_option("--seed", ben.seed, "Data and noise seed")->capture_default_str();
  add_common(b, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (s->parsed() && sim.spec.empty() && sim.case_id == 0) {
    std::cerr << "simulate: one of --case or --spec is required\n";
    return kExitUsage;
  }

  try {
    if (common.threads > 0) set_max_threads(static_cast<std::size_t>(common.threads));
    if (s->parsed()) return cmd_simulate(sim, common);
    if (d->parsed()) return cmd_denoise(den, common);
    if (m->parsed()) return cmd_metrics(met, common);
    if (b->parsed()) return cmd_bench(ben, common);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitUsage;
}
