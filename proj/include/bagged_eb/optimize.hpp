#pragma once

#include <functional>
#include <vector>

namespace beb::optim {

using Objective = std::function<double(const std::vector<double>&)>;

struct NelderMeadOptions {
  std::vector<double> initial_step;  // per-coordinate simplex edge; empty = 0.1 each
  std::vector<double> lower;         // optional box, clamped on every trial point
  std::vector<double> upper;
  double f_tol = 1e-12;  // spread of simplex values
  double x_tol = 1e-9;   // max vertex distance from best, per coordinate
  int max_iter = 2000;
  int restarts = 2;  // fresh simplex around the incumbent after convergence
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes `f` with the standard reflection / expansion / contraction /
/// shrink simplex moves (coefficients 1, 2, 0.5, 0.5). Non-finite values are
/// treated as +infinity.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                             const NelderMeadOptions& opts = {});

struct ScalarResult {
  double x = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Root of a sign-changing `g` on [lo, hi] with g(lo) < 0 < g(hi), located
/// until hi - lo <= rel_tol * max(|hi|, abs_floor).
ScalarResult bisect_increasing(const std::function<double(double)>& g, double lo, double hi,
                               double rel_tol, int max_iter, double abs_floor = 1e-300);

/// Golden-section minimum of a unimodal `f` on [lo, hi].
ScalarResult golden_section(const std::function<double(double)>& f, double lo, double hi,
                            double rel_tol, int max_iter);

}  // namespace beb::optim
