// qbo: command-line front end for benchmarks, invariant checks, SDE ensembles,
// Fokker-Planck solves and benchmark surfaces.
//
// Exit codes: 0 success, 1 failed check, 2 configuration error, 3 I/O error.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "qbo/qbo.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw qbo::Error(qbo::Errc::io, "cannot create output directory '" + dir.string() + "'");
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw qbo::Error(qbo::Errc::io, "cannot open '" + path.string() + "' for writing");
  writer(out);
  out.flush();
  if (!out) throw qbo::Error(qbo::Errc::io, "write failed for '" + path.string() + "'");
}

std::string time_tag(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "t%g", t);
  return buf;
}

// ---------------------------------------------------------------------------
// bench

struct BenchOptions {
  std::vector<std::string> functions{qbo::kRegisteredFunctions.begin(), qbo::kRegisteredFunctions.end()};
  std::size_t dimension = 2;
  std::vector<std::string> algorithms{"sa", "sqa", "qbo"};
  std::uint64_t trials = 50;
  std::uint64_t seed = 0;
  std::uint64_t budget = 20000;
  double tolerance = 1e-2;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::string out = "./results";
  bool wall_time = false;

  qbo::SAParams sa;
  qbo::SQAParams sqa;
  qbo::QBOParams qbo;
  std::uint64_t qbo_period = 700;
  std::int64_t qbo_cap = 60;
  std::string qbo_clock = "iterations";
  qbo::GDParams gd;
};

void add_bench(CLI::App& app, BenchOptions& o) {
  app.add_option("--functions", o.functions, "Benchmark functions (xinsheyang_n4, salomon, dropwave, schaffer_n2)")
      ->delimiter(',');
  app.add_option("--dimension", o.dimension, "Dimension for every function");
  app.add_option("--algorithms", o.algorithms, "Algorithms (sa, sqa, qbo, gd)")->delimiter(',');
  app.add_option("--trials", o.trials, "Trials per (function, algorithm) pair");
  app.add_option("--seed", o.seed, "Base seed");
  app.add_option("--budget", o.budget, "Iterations per run");
  app.add_option("--tolerance", o.tolerance, "Success tolerance on f - f*");
  app.add_option("--workers", o.workers, "Worker threads (default: available parallelism)");
  app.add_option("--out", o.out, "Output directory");
  app.add_flag("--wall-time", o.wall_time, "Record wall_ms per trial (makes raw.csv run-dependent)");

  app.add_option("--sa-t0", o.sa.T0, "SA initial temperature")->default_str("|f(x0)|");
  app.add_option("--sa-alpha", o.sa.alpha, "SA geometric cooling factor");
  app.add_option("--sa-sigma", o.sa.proposal_sigma, "SA proposal width, fraction of box width");
  app.add_option("--sa-sigma-exponent", o.sa.sigma_exponent, "SA width scales as (T/T0)^exponent");

  app.add_option("--sqa-replicas", o.sqa.replicas, "SQA Trotter replicas");
  app.add_option("--sqa-beta", o.sqa.beta, "SQA inverse temperature");
  app.add_option("--sqa-gamma0", o.sqa.gamma0, "SQA initial transverse field");
  app.add_option("--sqa-gamma-alpha", o.sqa.gamma_alpha, "SQA transverse-field decay");
  app.add_option("--sqa-sigma", o.sqa.proposal_sigma, "SQA proposal width, fraction of box width");
  app.add_option("--sqa-k-max", o.sqa.k_max, "SQA coupling cap");

  app.add_option("--qbo-cq", o.qbo.c_q, "QBO diffusion constant C_q")->default_str("auto");
  app.add_option("--qbo-noise-fraction", o.qbo.noise_fraction,
                 "Initial QBO noise as a fraction of box width (used when --qbo-cq is auto)");
  app.add_option("--qbo-eta", o.qbo.schedule.eta, "QBO schedule scale eta");
  app.add_option("--qbo-base", o.qbo.schedule.base, "QBO schedule base");
  app.add_option("--qbo-period", o.qbo_period, "QBO schedule exponent period");
  app.add_option("--qbo-cap", o.qbo_cap, "QBO schedule exponent cap");
  app.add_option("--qbo-step", o.qbo.step_size, "QBO drift step size");
  app.add_flag("--qbo-gradient-free", o.qbo.gradient_free, "QBO without the drift term");
  app.add_option("--qbo-clock", o.qbo_clock, "QBO schedule clock")
      ->check(CLI::IsMember({"iterations", "accepted"}));

  app.add_option("--gd-step", o.gd.step_size, "Gradient-descent step size");
}

int run_bench(const BenchOptions& o) {
  qbo::ExperimentSpec spec;
  for (const auto& f : o.functions) spec.functions.push_back({f, o.dimension});
  for (const auto& name : o.algorithms) {
    switch (qbo::parse_algorithm(name)) {
      case qbo::Algorithm::sa: spec.algorithms.emplace_back(o.sa); break;
      case qbo::Algorithm::sqa: spec.algorithms.emplace_back(o.sqa); break;
      case qbo::Algorithm::qbo: {
        qbo::QBOParams p = o.qbo;
        if (o.qbo_period == 0) throw qbo::Error(qbo::Errc::configuration, "qbo-period must be >= 1");
        p.schedule.power = qbo::stepwise_power(o.qbo_period, o.qbo_cap);
        p.clock = o.qbo_clock == "accepted" ? qbo::ScheduleClock::accepted : qbo::ScheduleClock::iterations;
        spec.algorithms.emplace_back(p);
        break;
      }
      case qbo::Algorithm::gd: spec.algorithms.emplace_back(o.gd); break;
    }
  }
  spec.trials = o.trials;
  spec.base_seed = o.seed;
  spec.budget = o.budget;
  spec.success_tolerance = o.tolerance;
  spec.workers = o.workers;
  spec.record_wall_time = o.wall_time;
  spec.validate();

  const fs::path dir(o.out);
  ensure_dir(dir);
  const auto result = qbo::run_experiment(spec);
  write_file(dir / "raw.csv", [&](std::ostream& os) { qbo::write_raw_csv(os, result.rows); });
  write_file(dir / "summary.csv", [&](std::ostream& os) { qbo::write_summary_csv(os, result.summary); });
  write_file(dir / "summary.json", [&](std::ostream& os) { os << qbo::summary_json(result.summary).dump(2) << '\n'; });

  std::printf("%-14s %-4s %10s %8s %8s\n", "function", "alg", "median_it", "ratio%", "success");
  for (const auto& s : result.summary)
    std::printf("%-14s %-4s %10.1f%s %8.2f %8.2f\n", s.function.c_str(), s.algorithm.c_str(), s.median_iterations,
                s.median_budget_capped ? "*" : " ", s.mean_improvement_ratio, s.success_rate);
  std::printf("wrote %zu rows to %s\n", result.rows.size(), (dir / "raw.csv").string().c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyOptions {
  std::vector<std::string> checks{"all"};
  std::vector<double> qp{1.0, 4.0, 16.0};
  std::uint64_t paths = 100000;
  std::uint64_t seed = 7;
};

void add_verify(CLI::App& app, VerifyOptions& o) {
  std::vector<std::string> allowed{"all", "none"};
  for (auto n : qbo::verify::kCheckNames) allowed.emplace_back(n);
  app.add_option("--check", o.checks, "Checks to run (all, none, error-moments, gibbs-fixed-point, zero-current, "
                                      "sde-fpe, tunneling)")
      ->delimiter(',')
      ->check(CLI::IsMember(allowed));
  app.add_option("--qp", o.qp, "Resolutions for error-moments")->delimiter(',');
  app.add_option("--paths", o.paths, "Ensemble size for sde-fpe");
  app.add_option("--seed", o.seed, "Seed for sampled checks");
}

int run_verify(const VerifyOptions& o) {
  auto wants = [&](std::string_view name) {
    return std::find(o.checks.begin(), o.checks.end(), "all") != o.checks.end() ||
           std::find(o.checks.begin(), o.checks.end(), name) != o.checks.end();
  };
  std::vector<qbo::verify::CheckResult> results;
  bool any = false;
  for (auto name : qbo::verify::kCheckNames) any = any || wants(name);
  if (!any) throw qbo::Error(qbo::Errc::configuration, "no checks selected");

  auto report = [&](qbo::verify::CheckResult r, double seconds) {
    std::printf("%s %s: %s [%.2fs]\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.measured.c_str(), seconds);
    std::fflush(stdout);
    results.push_back(std::move(r));
  };
  auto timed = [&](auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = fn();
    report(std::move(r), std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  };
  if (wants("error-moments"))
    for (double qp : o.qp) timed([&] { return qbo::verify::error_moments(qp, 1'000'000, o.seed); });
  if (wants("gibbs-fixed-point")) timed([] { return qbo::verify::gibbs_fixed_point(); });
  if (wants("zero-current")) timed([] { return qbo::verify::zero_current(); });
  if (wants("sde-fpe")) timed([&] { return qbo::verify::sde_fpe(o.paths, o.seed); });
  if (wants("tunneling")) timed([] { return qbo::verify::tunneling(); });

  const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; });
  std::printf("%zu checks, %td failed\n", results.size(), failed);
  return failed ? kExitCheckFailed : kExitOk;
}

// ---------------------------------------------------------------------------
// sde

struct SdeOptions {
  std::string potential = "quadratic";
  double cq = 1.0;
  double qp = 1.0;
  std::uint64_t period = 0;
  int base = 2;
  double dt = 1e-3;
  double horizon = 1.0;
  std::uint64_t paths = 100000;
  std::uint64_t seed = 0;
  double x0 = 0.0;
  std::optional<double> init_lo, init_hi;
  double grid_lo = -6.0;
  double grid_hi = 6.0;
  std::size_t bins = 512;
  std::vector<double> snapshots;
  std::string out = "./results";
};

void add_sde(CLI::App& app, SdeOptions& o) {
  app.add_option("--potential", o.potential, "Potential (quadratic, doublewell, tilted_doublewell, flat)");
  app.add_option("--cq", o.cq, "Diffusion constant C_q");
  app.add_option("--qp", o.qp, "Quantization resolution Q_p (schedule scale when --period > 0)");
  app.add_option("--period", o.period, "Steps per schedule exponent; 0 keeps Q_p constant");
  app.add_option("--base", o.base, "Schedule base");
  app.add_option("--dt", o.dt, "Time step");
  app.add_option("--T", o.horizon, "Horizon");
  app.add_option("--paths", o.paths, "Number of paths");
  app.add_option("--seed", o.seed, "Seed");
  app.add_option("--x0", o.x0, "Point-mass start (ignored with --init-lo/--init-hi)");
  app.add_option("--init-lo", o.init_lo, "Uniform start, lower end")->default_str("unset");
  app.add_option("--init-hi", o.init_hi, "Uniform start, upper end")->default_str("unset");
  app.add_option("--grid-lo", o.grid_lo, "Histogram lower edge");
  app.add_option("--grid-hi", o.grid_hi, "Histogram upper edge");
  app.add_option("--bins", o.bins, "Histogram bins");
  app.add_option("--snapshots", o.snapshots, "Histogram times (default: the horizon)")->delimiter(',');
  app.add_option("--out", o.out, "Output directory");
}

int run_sde(const SdeOptions& o) {
  if (o.init_lo.has_value() != o.init_hi.has_value())
    throw qbo::Error(qbo::Errc::configuration, "--init-lo and --init-hi must be given together");
  const auto f = qbo::potential_by_name(o.potential);
  const auto init = o.init_lo ? qbo::InitialLaw::uniform(*o.init_lo, *o.init_hi) : qbo::InitialLaw::point(o.x0);
  if (!(o.dt > 0.0)) throw qbo::Error(qbo::Errc::configuration, "dt must be positive");
  const auto steps = static_cast<std::uint64_t>(std::llround(o.horizon / o.dt));
  qbo::EnsembleOptions opt;
  opt.grid_lo = o.grid_lo;
  opt.grid_hi = o.grid_hi;
  opt.bins = o.bins;
  opt.snapshot_times = o.snapshots;

  const fs::path dir(o.out);
  ensure_dir(dir);
  auto emit = [&](const qbo::EnsembleResult& r) {
    write_file(dir / "moments.txt", [&](std::ostream& os) { qbo::write_moments(os, r); });
    for (const auto& h : r.snapshots)
      write_file(dir / ("histogram_" + time_tag(h.t) + ".txt"), [&](std::ostream& os) { qbo::write_histogram(os, h); });
    for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    const auto& m = r.terminal();
    std::printf("terminal t=%g mean=%.6f variance=%.6f paths=%llu\n", m.t, m.mean, m.variance,
                static_cast<unsigned long long>(r.paths));
  };
  if (o.period == 0) {
    emit(qbo::run_ensemble(qbo::make_sde_config(f, o.cq, o.qp, o.dt, steps, init), o.paths, o.horizon, o.seed, opt));
  } else {
    qbo::QuantizationSchedule s{o.qp, o.base, qbo::stepwise_power(o.period)};
    emit(qbo::run_ensemble(qbo::make_sde_config(f, o.cq, s, o.dt, o.dt, steps, init), o.paths, o.horizon, o.seed, opt));
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// fp

struct FpCliOptions {
  std::string potential = "doublewell";
  double q = 0.5;
  double a = -3.0;
  double b = 3.0;
  std::size_t n = 512;
  double horizon = 10.0;
  double dt = 1e-2;
  std::string init = "gaussian";
  double mean = -1.0;
  double sd = 0.1;
  double init_lo = -1.5;
  double init_hi = -0.5;
  std::optional<double> barrier;
  std::vector<double> snapshots;
  std::string out = "./results";
};

void add_fp(CLI::App& app, FpCliOptions& o) {
  app.add_option("--potential", o.potential, "Potential (quadratic, doublewell, tilted_doublewell, flat)");
  app.add_option("--q", o.q, "Constant diffusion parameter Q");
  app.add_option("--a", o.a, "Domain lower end");
  app.add_option("--b", o.b, "Domain upper end");
  app.add_option("--n", o.n, "Grid nodes");
  app.add_option("--T", o.horizon, "Horizon");
  app.add_option("--dt", o.dt, "Outer time step (subdivided for stability)");
  app.add_option("--init", o.init, "Initial density")->check(CLI::IsMember({"gaussian", "uniform", "gibbs"}));
  app.add_option("--mean", o.mean, "Gaussian start mean");
  app.add_option("--sd", o.sd, "Gaussian start standard deviation");
  app.add_option("--init-lo", o.init_lo, "Uniform start, lower end");
  app.add_option("--init-hi", o.init_hi, "Uniform start, upper end");
  app.add_option("--barrier", o.barrier, "Report mass right of this point")->default_str("unset");
  app.add_option("--snapshots", o.snapshots, "Output times (default: the horizon)")->delimiter(',');
  app.add_option("--out", o.out, "Output directory");
}

int run_fp(const FpCliOptions& o) {
  const auto f = qbo::potential_by_name(o.potential);
  qbo::DensityGrid rho;
  if (o.init == "gaussian") {
    if (!(o.sd > 0.0)) throw qbo::Error(qbo::Errc::configuration, "sd must be positive");
    rho = qbo::DensityGrid::gaussian(o.a, o.b, o.n, o.mean, o.sd);
  } else if (o.init == "uniform") {
    rho = qbo::DensityGrid::uniform(o.a, o.b, o.n, o.init_lo, o.init_hi);
  } else {
    rho = qbo::gibbs_density(f, o.q, o.a, o.b, o.n);
  }
  const auto law = qbo::DiffusionLaw::constant_q(o.q);
  std::vector<double> times = o.snapshots.empty() ? std::vector<double>{o.horizon} : o.snapshots;
  std::sort(times.begin(), times.end());
  if (times.front() < 0.0) throw qbo::Error(qbo::Errc::configuration, "snapshot times must be nonnegative");

  const fs::path dir(o.out);
  ensure_dir(dir);
  double t = 0.0;
  for (double ts : times) {
    rho = qbo::fp_evolve(rho, f, law, ts - t, o.dt);
    t = ts;
    const auto vf = qbo::velocity_field(rho, f, o.q);
    write_file(dir / ("density_" + time_tag(t) + ".txt"), [&](std::ostream& os) { qbo::write_density(os, rho); });
    write_file(dir / ("velocity_" + time_tag(t) + ".txt"), [&](std::ostream& os) { qbo::write_diagnostics(os, vf); });
    std::printf("t=%g mass=%.12f max|v|=%.6e masked=%zu", t, rho.mass(), vf.max_abs_v(), vf.flagged);
    if (o.barrier) std::printf(" crossing_mass=%.6e", qbo::barrier_crossing_mass(rho, *o.barrier));
    std::printf("\n");
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// surface

struct SurfaceOptions {
  std::vector<std::string> functions{qbo::kRegisteredFunctions.begin(), qbo::kRegisteredFunctions.end()};
  std::size_t dimension = 2;
  std::size_t grid = 201;
  std::string out = "./results";
};

void add_surface(CLI::App& app, SurfaceOptions& o) {
  app.add_option("--function", o.functions, "Functions to sample")->delimiter(',');
  app.add_option("--dimension", o.dimension, "Dimension (extra coordinates pinned at the minimizer)");
  app.add_option("--grid", o.grid, "Points per axis");
  app.add_option("--out", o.out, "Output directory");
}

int run_surface(const SurfaceOptions& o) {
  std::vector<qbo::BenchmarkFunction> fns;
  for (const auto& name : o.functions) fns.push_back(qbo::lookup(name, o.dimension));
  const fs::path dir(o.out);
  ensure_dir(dir);
  for (const auto& fn : fns) {
    const fs::path path = dir / ("surface_" + fn.name + ".txt");
    write_file(path, [&](std::ostream& os) { qbo::write_surface(os, fn, o.grid); });
    std::printf("wrote %zu rows to %s\n", o.grid * o.grid, path.string().c_str());
  }
  return kExitOk;
}

int exit_code_for(const qbo::Error& e) { return e.code() == qbo::Errc::io ? kExitIo : kExitConfig; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantization-based optimization: benchmarks, invariant checks, SDE ensembles, "
               "Fokker-Planck solves and surfaces."};
  app.name("qbo");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.fallthrough();
  app.set_config("--config", "",
                 "Config file: TOML-style sections [bench], [verify], [sde], [fp], [surface] holding "
                 "key = value pairs named after the long flags; flags override file values; unknown keys are errors");

  BenchOptions bench_opt;
  VerifyOptions verify_opt;
  SdeOptions sde_opt;
  FpCliOptions fp_opt;
  SurfaceOptions surface_opt;

  auto* bench = app.add_subcommand("bench", "Run a benchmark sweep; writes raw.csv, summary.csv, summary.json");
  add_bench(*bench, bench_opt);
  auto* verify = app.add_subcommand("verify", "Run the built-in invariant checks");
  add_verify(*verify, verify_opt);
  auto* sde = app.add_subcommand("sde", "Euler-Maruyama ensemble; writes moments.txt and histogram_t*.txt");
  add_sde(*sde, sde_opt);
  auto* fp = app.add_subcommand("fp", "Fokker-Planck solve; writes density_t*.txt and velocity_t*.txt");
  add_fp(*fp, fp_opt);
  auto* surface = app.add_subcommand("surface", "Benchmark surfaces as \"x y f\" rows; writes surface_<name>.txt");
  add_surface(*surface, surface_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return kExitOk;
    if (dynamic_cast<const CLI::FileError*>(&e)) return kExitIo;
    return kExitConfig;
  }

  try {
    if (*bench) return run_bench(bench_opt);
    if (*verify) return run_verify(verify_opt);
    if (*sde) return run_sde(sde_opt);
    if (*fp) return run_fp(fp_opt);
    return run_surface(surface_opt);
  } catch (const qbo::Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", std::string(qbo::to_string(e.code())).c_str(), e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
}
