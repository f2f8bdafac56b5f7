#ifndef QBO_OPTIMIZERS_HPP
#define QBO_OPTIMIZERS_HPP

// Stochastic global optimizers over a BenchmarkFunction box:
//   sa   Metropolis simulated annealing, geometric cooling
//   sqa  path-integral (replica) Monte Carlo with an annealed transverse-field analog
//   qbo  quantization-based optimization: Euler step of the gradient SDE,
//        accepted when the quantized objective does not increase
//   gd   deterministic projected gradient descent (control)

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qbo/benchfn.hpp"
#include "qbo/error.hpp"
#include "qbo/quantize.hpp"
#include "qbo/rng.hpp"

namespace qbo {

enum class Algorithm { sa, sqa, qbo, gd };

constexpr std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::sa: return "sa";
    case Algorithm::sqa: return "sqa";
    case Algorithm::qbo: return "qbo";
    case Algorithm::gd: return "gd";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view name) {
  if (name == "sa") return Algorithm::sa;
  if (name == "sqa" || name == "qa") return Algorithm::sqa;
  if (name == "qbo") return Algorithm::qbo;
  if (name == "gd") return Algorithm::gd;
  throw Error(Errc::configuration, "unknown algorithm '" + std::string(name) + "'");
}

/// Simulated annealing. `proposal_sigma` is a fraction of each coordinate's
/// box width; the proposal width narrows with temperature as
/// sigma * max(sigma_floor, (T / T0)^sigma_exponent).
struct SAParams {
  std::optional<double> T0;  // nullopt: |f(x0)| at the start point
  double alpha = 0.9995;
  double proposal_sigma = 0.2;
  double sigma_exponent = 0.5;
  double sigma_floor = 1e-12;

  void validate() const {
    detail::require(!T0 || (std::isfinite(*T0) && *T0 > 0.0), Errc::configuration, "sa: T0 must be positive");
    detail::require(alpha > 0.0 && alpha < 1.0, Errc::configuration, "sa: alpha must lie in (0,1)");
    detail::require(proposal_sigma > 0.0, Errc::configuration, "sa: proposal_sigma must be positive");
    detail::require(sigma_exponent >= 0.0, Errc::configuration, "sa: sigma_exponent must be >= 0");
    detail::require(sigma_floor > 0.0 && sigma_floor <= 1.0, Errc::configuration, "sa: sigma_floor must lie in (0,1]");
  }
};

/// Continuous-variable simulated quantum annealing with P Trotter replicas.
/// Replica separations in the spring term are measured in box-width units.
struct SQAParams {
  int replicas = 8;
  double beta = 200.0;
  double gamma0 = 1.0;
  double gamma_alpha = 0.999;
  double proposal_sigma = 0.05;
  double sigma_exponent = 0.5;
  double sigma_floor = 1e-12;
  double k_max = 1e6;

  void validate() const {
    detail::require(replicas >= 2, Errc::configuration, "sqa: needs at least 2 replicas");
    detail::require(beta > 0.0 && gamma0 > 0.0, Errc::configuration, "sqa: beta and gamma0 must be positive");
    detail::require(gamma_alpha > 0.0 && gamma_alpha < 1.0, Errc::configuration, "sqa: gamma_alpha must lie in (0,1)");
    detail::require(proposal_sigma > 0.0, Errc::configuration, "sqa: proposal_sigma must be positive");
    detail::require(sigma_exponent >= 0.0, Errc::configuration, "sqa: sigma_exponent must be >= 0");
    detail::require(sigma_floor > 0.0 && sigma_floor <= 1.0, Errc::configuration, "sqa: sigma_floor must lie in (0,1]");
    detail::require(k_max > 0.0, Errc::configuration, "sqa: k_max must be positive");
  }
};

/// Which counter drives the quantization schedule.
enum class ScheduleClock { accepted, iterations };

/// Quantization-based optimizer. When `c_q` is unset it is chosen so that the
/// initial noise standard deviation is `noise_fraction` of the mean box width.
struct QBOParams {
  std::optional<double> c_q;
  double noise_fraction = 0.2;
  QuantizationSchedule schedule{16.0, 2, stepwise_power(700, 60)};
  double step_size = 1e-3;
  bool gradient_free = false;
  ScheduleClock clock = ScheduleClock::iterations;

  void validate() const {
    detail::require(!c_q || (std::isfinite(*c_q) && *c_q > 0.0), Errc::configuration, "qbo: c_q must be positive");
    detail::require(noise_fraction > 0.0, Errc::configuration, "qbo: noise_fraction must be positive");
    detail::require(step_size > 0.0, Errc::configuration, "qbo: step_size must be positive");
    try {
      schedule.validate();
    } catch (const Error& e) {
      throw Error(Errc::configuration, std::string("qbo: ") + e.what());
    }
  }
};

struct GDParams {
  double step_size = 1e-2;

  void validate() const { detail::require(step_size > 0.0, Errc::configuration, "gd: step_size must be positive"); }
};

using AlgorithmParams = std::variant<SAParams, SQAParams, QBOParams, GDParams>;

inline Algorithm algorithm_of(const AlgorithmParams& p) noexcept { return static_cast<Algorithm>(p.index()); }

inline AlgorithmParams default_params(Algorithm a) {
  switch (a) {
    case Algorithm::sa: return SAParams{};
    case Algorithm::sqa: return SQAParams{};
    case Algorithm::qbo: return QBOParams{};
    case Algorithm::gd: return GDParams{};
  }
  return GDParams{};
}

inline void validate(const AlgorithmParams& p) {
  std::visit([](const auto& v) { v.validate(); }, p);
}

struct RunRecord {
  Algorithm algorithm = Algorithm::gd;
  std::vector<double> best_trajectory;  // index = iteration, 0 is the start point
  Point initial_point;
  double initial_value = 0.0;
  Point final_point;
  double final_value = 0.0;
  std::uint64_t iterations_to_converge = 0;
  double improvement_ratio = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t evaluations = 0;
  std::uint64_t accepted = 0;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Outcome of one proposal. `candidate` is kept even when rejected.
struct StepResult {
  Point x;
  double value = 0.0;
  bool accepted = false;
  Point candidate;
  double candidate_value = 0.0;
  std::uint64_t evaluations = 0;
};

// ---------------------------------------------------------------------------
// Metrics

/// 100 * (f0 - f_final) / (f0 - f_star), clamped to [0, 100]; 100 when f0 == f_star.
inline double improvement_ratio(double f0, double f_final, double f_star) {
  detail::require(f0 >= f_star, Errc::invalid_input, "improvement_ratio: initial value below the global minimum");
  detail::require(f_final >= f_star - 1e-9, Errc::invalid_input,
                  "improvement_ratio: final value below the global minimum");
  if (f0 == f_star) return 100.0;
  return std::clamp(100.0 * (f0 - f_final) / (f0 - f_star), 0.0, 100.0);
}

/// First iteration whose best-so-far lies within 1e-12 of the final best.
inline std::uint64_t iterations_to_converge(std::span<const double> trajectory) {
  detail::require(!trajectory.empty(), Errc::invalid_input, "iterations_to_converge: empty trajectory");
  const double final_best = trajectory.back();
  for (std::size_t i = 0; i < trajectory.size(); ++i)
    if (trajectory[i] <= final_best + 1e-12) return i;
  return trajectory.size() - 1;
}

// ---------------------------------------------------------------------------
// Acceptance rules

inline double acceptance_probability(double delta, double temperature) {
  if (delta <= 0.0) return 1.0;
  if (!(temperature > 0.0)) return 0.0;
  return std::exp(-delta / temperature);
}

inline bool metropolis_accept(double delta, double temperature, Rng& rng) {
  if (delta <= 0.0) return true;
  return rng.uniform() < acceptance_probability(delta, temperature);
}

/// Accept iff quantize(f_candidate) <= quantize(f_current) at resolution qp.
/// Equal lattice levels are accepted, so plateau moves go through.
inline bool quantized_accept(double f_candidate, double f_current, double qp) {
  return quantize(f_candidate, qp).value <= quantize(f_current, qp).value;
}

// ---------------------------------------------------------------------------
// Single steps

namespace detail {

inline double mean_width(const BenchmarkFunction& fn) {
  double w = 0.0;
  for (const auto& b : fn.bounds) w += b.width();
  return w / static_cast<double>(fn.bounds.size());
}

inline Point gaussian_proposal(std::span<const double> x, double relative_sigma, const BenchmarkFunction& fn,
                               Rng& rng) {
  Point c(x.begin(), x.end());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += relative_sigma * fn.bounds[i].width() * rng.normal();
  fn.clamp(c);
  return c;
}

inline double c_q_for(const QBOParams& params, const BenchmarkFunction& fn) {
  if (params.c_q) return *params.c_q;
  const double s = params.noise_fraction * mean_width(fn) * qp_at(params.schedule, 0);
  return s * s;
}

}  // namespace detail

/// One Metropolis step at temperature T. `T0` sets the proposal-width scale.
inline StepResult sa_step(std::span<const double> x, double fx, double T, double T0, const SAParams& params,
                          const BenchmarkFunction& fn, Rng& rng) {
  detail::require(T > 0.0, Errc::invalid_input, "sa_step: temperature must be positive");
  const double scale = std::max(params.sigma_floor, std::pow(std::min(1.0, T / T0), params.sigma_exponent));
  StepResult r;
  r.candidate = detail::gaussian_proposal(x, params.proposal_sigma * scale, fn, rng);
  r.candidate_value = fn.evaluator(r.candidate);
  r.evaluations = 1;
  r.accepted = metropolis_accept(r.candidate_value - fx, T, rng);
  if (r.accepted) {
    r.x = r.candidate;
    r.value = r.candidate_value;
  } else {
    r.x.assign(x.begin(), x.end());
    r.value = fx;
  }
  return r;
}

/// One step of the quantization-based optimizer at schedule index t:
///   c = clamp(x - step * grad f(x) + sqrt(c_q) / qp(t) * xi)
/// accepted iff f^Q(c) <= f^Q(x) at qp(t).
inline StepResult qbo_step(std::span<const double> x, double fx, std::uint64_t t, const QBOParams& params,
                           const BenchmarkFunction& fn, Rng& rng) {
  const double qp = qp_at(params.schedule, t);
  const double noise = std::sqrt(detail::c_q_for(params, fn)) / qp;
  StepResult r;
  r.candidate.assign(x.begin(), x.end());
  if (!params.gradient_free) {
    bool analytic = false;
    Point g;
    if (fn.analytic_gradient) {
      if (auto a = fn.analytic_gradient(x)) {
        g = *std::move(a);
        analytic = true;
      }
    }
    if (!analytic) {
      g = central_difference(fn, x);
      r.evaluations += 2 * x.size();
    }
    for (std::size_t i = 0; i < g.size(); ++i) r.candidate[i] -= params.step_size * g[i];
  }
  for (double& c : r.candidate) c += noise * rng.normal();
  fn.clamp(r.candidate);
  r.candidate_value = fn.evaluator(r.candidate);
  r.evaluations += 1;
  r.accepted = quantized_accept(r.candidate_value, fx, qp);
  if (r.accepted) {
    r.x = r.candidate;
    r.value = r.candidate_value;
  } else {
    r.x.assign(x.begin(), x.end());
    r.value = fx;
  }
  return r;
}

/// Replica configuration for simulated quantum annealing.
struct ReplicaState {
  std::vector<Point> replicas;
  std::vector<double> values;
};

inline double sqa_gamma(const SQAParams& params, std::uint64_t t) {
  return params.gamma0 * std::pow(params.gamma_alpha, static_cast<double>(t));
}

/// K(t) = (1 / (2 beta)) ln coth(beta * gamma(t) / P), clamped at k_max.
inline double sqa_coupling(const SQAParams& params, std::uint64_t t) {
  const double z = params.beta * sqa_gamma(params, t) / params.replicas;
  if (!(z > 0.0)) return params.k_max;
  // ln coth z = ln(1 + e^{-2z}) - ln(1 - e^{-2z})
  const double e = std::exp(-2.0 * z);
  const double ln_coth = std::log1p(e) - std::log(-std::expm1(-2.0 * z));
  const double k = ln_coth / (2.0 * params.beta);
  return std::isfinite(k) ? std::min(k, params.k_max) : params.k_max;
}

namespace detail {

inline double scaled_distance2(std::span<const double> a, std::span<const double> b, const BenchmarkFunction& fn) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = (a[i] - b[i]) / fn.bounds[i].width();
    s += d * d;
  }
  return s;
}

}  // namespace detail

/// One Monte Carlo sweep over all replicas. Replica k is moved with Metropolis
/// acceptance on f(x_k)/P + K(t) * (|x_k - x_{k-1}|^2 + |x_k - x_{k+1}|^2),
/// periodic in k, at inverse temperature beta. Returns the number of evaluations.
inline std::uint64_t sqa_step(ReplicaState& state, std::uint64_t t, const SQAParams& params,
                              const BenchmarkFunction& fn, Rng& rng) {
  const int P = static_cast<int>(state.replicas.size());
  detail::require(P >= 2 && P == params.replicas, Errc::invalid_input, "sqa_step: replica count mismatch");
  const double K = sqa_coupling(params, t);
  const double scale =
      std::max(params.sigma_floor, std::pow(sqa_gamma(params, t) / params.gamma0, params.sigma_exponent));
  std::uint64_t evals = 0;
  for (int k = 0; k < P; ++k) {
    const Point& prev = state.replicas[(k + P - 1) % P];
    const Point& next = state.replicas[(k + 1) % P];
    Point& cur = state.replicas[k];
    Point cand = detail::gaussian_proposal(cur, params.proposal_sigma * scale, fn, rng);
    const double fc = fn.evaluator(cand);
    ++evals;
    const double spring_old = detail::scaled_distance2(cur, prev, fn) + detail::scaled_distance2(cur, next, fn);
    const double spring_new = detail::scaled_distance2(cand, prev, fn) + detail::scaled_distance2(cand, next, fn);
    const double dE = (fc - state.values[k]) / P + K * (spring_new - spring_old);
    if (metropolis_accept(params.beta * dE, 1.0, rng)) {
      cur = std::move(cand);
      state.values[k] = fc;
    }
  }
  return evals;
}

// ---------------------------------------------------------------------------
// Runs

/// Start point shared by every algorithm for a given seed.
inline Point initial_point(const BenchmarkFunction& fn, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0));
  Point x(fn.dimension);
  for (std::size_t i = 0; i < fn.dimension; ++i) x[i] = rng.uniform(fn.bounds[i].lo, fn.bounds[i].hi);
  return x;
}

/// Runs `budget` iterations from `x0`. Deterministic given (params, fn, x0, budget, seed).
inline RunRecord run_from(const AlgorithmParams& params, const BenchmarkFunction& fn, const Point& x0,
                          std::uint64_t budget, std::uint64_t seed) {
  detail::require(budget >= 1, Errc::configuration, "run: budget must be >= 1");
  detail::require(fn.in_bounds(x0), Errc::invalid_input, "run: start point outside bounds");
  validate(params);

  RunRecord rec;
  rec.algorithm = algorithm_of(params);
  rec.seed = seed;
  rec.initial_point = x0;
  rec.initial_value = fn.evaluator(x0);
  rec.evaluations = 1;
  rec.best_trajectory.reserve(budget + 1);
  rec.best_trajectory.push_back(rec.initial_value);
  rec.final_point = x0;
  rec.final_value = rec.initial_value;

  auto record = [&rec](std::span<const double> x, double fx) {
    if (fx < rec.final_value) {
      rec.final_value = fx;
      rec.final_point.assign(x.begin(), x.end());
    }
  };

  Rng rng(derive_seed(seed, 1));
  Point x = x0;
  double fx = rec.initial_value;

  switch (rec.algorithm) {
    case Algorithm::sa: {
      const auto& p = std::get<SAParams>(params);
      const double T0 = p.T0 ? *p.T0 : (std::abs(fx) > 0.0 ? std::abs(fx) : 1.0);
      double T = T0;
      for (std::uint64_t it = 1; it <= budget; ++it) {
        // Below the smallest normal the Metropolis rule is already greedy.
        T = std::max(T, std::numeric_limits<double>::min());
        StepResult s = sa_step(x, fx, T, T0, p, fn, rng);
        rec.evaluations += s.evaluations;
        rec.accepted += s.accepted;
        x = std::move(s.x);
        fx = s.value;
        record(x, fx);
        rec.best_trajectory.push_back(rec.final_value);
        T *= p.alpha;
      }
      break;
    }
    case Algorithm::qbo: {
      const auto& p = std::get<QBOParams>(params);
      std::uint64_t t = 0;
      for (std::uint64_t it = 1; it <= budget; ++it) {
        StepResult s = qbo_step(x, fx, t, p, fn, rng);
        rec.evaluations += s.evaluations;
        if (s.accepted || p.clock == ScheduleClock::iterations) ++t;
        if (s.accepted) {
          ++rec.accepted;
          x = std::move(s.x);
          fx = s.value;
          record(x, fx);
        }
        rec.best_trajectory.push_back(rec.final_value);
      }
      break;
    }
    case Algorithm::sqa: {
      const auto& p = std::get<SQAParams>(params);
      ReplicaState state{std::vector<Point>(p.replicas, x0), std::vector<double>(p.replicas, fx)};
      for (std::uint64_t it = 1; it <= budget; ++it) {
        rec.evaluations += sqa_step(state, it - 1, p, fn, rng);
        for (int k = 0; k < p.replicas; ++k) record(state.replicas[k], state.values[k]);
        rec.best_trajectory.push_back(rec.final_value);
      }
      break;
    }
    case Algorithm::gd: {
      const auto& p = std::get<GDParams>(params);
      for (std::uint64_t it = 1; it <= budget; ++it) {
        const Point g = grad(fn, x);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= p.step_size * g[i];
        fn.clamp(x);
        fx = fn.evaluator(x);
        ++rec.evaluations;
        record(x, fx);
        rec.best_trajectory.push_back(rec.final_value);
      }
      break;
    }
  }

  rec.iterations_to_converge = iterations_to_converge(rec.best_trajectory);
  rec.improvement_ratio =
      improvement_ratio(std::max(rec.initial_value, fn.global_min_value), std::max(rec.final_value, fn.global_min_value),
                        fn.global_min_value);
  return rec;
}

/// Runs from the seed's shared uniform start point.
inline RunRecord run(const AlgorithmParams& params, const BenchmarkFunction& fn, std::uint64_t budget,
                     std::uint64_t seed) {
  return run_from(params, fn, initial_point(fn, seed), budget, seed);
}

}  // namespace qbo

#endif  // QBO_OPTIMIZERS_HPP
