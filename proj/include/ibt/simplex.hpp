#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace ibt {

struct SimplexOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-6;
  /// Stop as soon as the best value is at or below this (e.g. 0 for a nonnegative objective).
  double target = -std::numeric_limits<double>::infinity();
};

struct SimplexResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

/// Derivative-free Nelder-Mead minimisation (GSL nmsimplex2) from a fixed
/// initial simplex; deterministic for a given objective and start point.
inline SimplexResult minimize_simplex(const std::function<double(std::span<const double>)>& objective,
                                      std::span<const double> start, std::span<const double> step,
                                      const SimplexOptions& opt = {}) {
  const std::size_t n = start.size();
  if (n == 0 || step.size() != n) throw std::invalid_argument("minimize_simplex: bad dimensions");
  gsl_set_error_handler_off();

  struct Vec {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
  };
  struct Min {
    void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
  };
  std::unique_ptr<gsl_vector, Vec> x(gsl_vector_alloc(n));
  std::unique_ptr<gsl_vector, Vec> ss(gsl_vector_alloc(n));
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(x.get(), i, start[i]);
    gsl_vector_set(ss.get(), i, step[i]);
  }

  struct Context {
    const std::function<double(std::span<const double>)>* f;
    std::vector<double> scratch;
  } ctx{&objective, std::vector<double>(n)};

  gsl_multimin_function fn;
  fn.n = n;
  fn.params = &ctx;
  fn.f = [](const gsl_vector* v, void* p) -> double {
    auto* c = static_cast<Context*>(p);
    for (std::size_t i = 0; i < c->scratch.size(); ++i) c->scratch[i] = gsl_vector_get(v, i);
    const double val = (*c->f)(c->scratch);
    return std::isfinite(val) ? val : std::numeric_limits<double>::max();
  };

  std::unique_ptr<gsl_multimin_fminimizer, Min> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
  gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), ss.get());

  SimplexResult r;
  auto capture = [&] {
    const gsl_vector* best = gsl_multimin_fminimizer_x(s.get());
    r.x.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) r.x[i] = gsl_vector_get(best, i);
    r.value = gsl_multimin_fminimizer_minimum(s.get());
  };
  // The minimiser's stored minimum is only valid after the first iteration.
  r.x.assign(start.begin(), start.end());
  r.value = fn.f(x.get(), &ctx);
  if (r.value <= opt.target) {
    r.converged = true;
    return r;
  }
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const int status = gsl_multimin_fminimizer_iterate(s.get());
    r.iterations = it;
    capture();
    if (status != GSL_SUCCESS) break;
    double scale = 1.0;
    for (double v : r.x) scale = std::max(scale, std::abs(v));
    if (r.value <= opt.target || gsl_multimin_fminimizer_size(s.get()) < opt.relative_tolerance * scale) {
      r.converged = true;
      break;
    }
  }
  return r;
}

}  // namespace ibt
