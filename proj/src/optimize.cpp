#include "bagged_eb/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace beb::optim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Simplex {
  std::vector<std::vector<double>> x;
  std::vector<double> f;

  void sort() {
    std::vector<std::size_t> idx(f.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return f[a] < f[b]; });
    std::vector<std::vector<double>> xs;
    std::vector<double> fs;
    for (auto i : idx) {
      xs.push_back(std::move(x[i]));
      fs.push_back(f[i]);
    }
    x = std::move(xs);
    f = std::move(fs);
  }
};

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0,
                             const NelderMeadOptions& opts) {
  const std::size_t n = x0.size();
  auto clamp = [&](std::vector<double>& p) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!opts.lower.empty()) p[i] = std::max(p[i], opts.lower[i]);
      if (!opts.upper.empty()) p[i] = std::min(p[i], opts.upper[i]);
    }
  };
  auto eval = [&](const std::vector<double>& p) {
    const double v = f(p);
    return std::isfinite(v) ? v : kInf;
  };

  NelderMeadResult res;
  clamp(x0);
  res.x = x0;
  res.value = eval(x0);

  for (int round = 0; round <= opts.restarts; ++round) {
    Simplex s;
    s.x.push_back(res.x);
    s.f.push_back(res.value);
    for (std::size_t i = 0; i < n; ++i) {
      auto p = res.x;
      const double h = opts.initial_step.empty() ? 0.1 : opts.initial_step[i];
      p[i] += h;
      clamp(p);
      if (p[i] == res.x[i]) {  // pinned against the upper bound
        p[i] -= h;
        clamp(p);
      }
      s.x.push_back(p);
      s.f.push_back(eval(p));
    }

    bool converged = false;
    std::vector<double> centroid(n), trial(n);
    auto along = [&](double t, const std::vector<double>& to) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = centroid[i] + t * (to[i] - centroid[i]);
      clamp(trial);
      return eval(trial);
    };

    while (res.iterations < opts.max_iter) {
      s.sort();
      double spread = 0.0;
      for (std::size_t j = 1; j <= n; ++j)
        for (std::size_t i = 0; i < n; ++i)
          spread = std::max(spread, std::abs(s.x[j][i] - s.x[0][i]));
      if (std::abs(s.f[n] - s.f[0]) <= opts.f_tol * (1.0 + std::abs(s.f[0])) &&
          spread <= opts.x_tol) {
        converged = true;
        break;
      }
      ++res.iterations;

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) centroid[i] += s.x[j][i] / static_cast<double>(n);

      const auto& worst = s.x[n];
      const double fr = along(-1.0, worst);
      const auto reflected = trial;
      if (fr < s.f[0]) {
        const double fe = along(-2.0, worst);
        if (fe < fr) {
          s.x[n] = trial;
          s.f[n] = fe;
        } else {
          s.x[n] = reflected;
          s.f[n] = fr;
        }
      } else if (fr < s.f[n - 1]) {
        s.x[n] = reflected;
        s.f[n] = fr;
      } else {
        const bool outside = fr < s.f[n];
        const double fc = outside ? along(0.5, reflected) : along(0.5, worst);
        if (fc < (outside ? fr : s.f[n])) {
          s.x[n] = trial;
          s.f[n] = fc;
        } else {
          for (std::size_t j = 1; j <= n; ++j) {
            for (std::size_t i = 0; i < n; ++i)
              s.x[j][i] = s.x[0][i] + 0.5 * (s.x[j][i] - s.x[0][i]);
            clamp(s.x[j]);
            s.f[j] = eval(s.x[j]);
          }
        }
      }
    }
    s.sort();
    const bool improved = s.f[0] < res.value;
    if (s.f[0] <= res.value) {
      res.x = s.x[0];
      res.value = s.f[0];
    }
    res.converged = converged;
    if (!converged || (!improved && round > 0)) break;
  }
  return res;
}

ScalarResult bisect_increasing(const std::function<double(double)>& g, double lo, double hi,
                               double rel_tol, int max_iter, double abs_floor) {
  ScalarResult r;
  while (r.iterations < max_iter) {
    if (hi - lo <= rel_tol * std::max(std::abs(hi), abs_floor)) {
      r.converged = true;
      break;
    }
    ++r.iterations;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      r.converged = true;
      break;
    }
    if (g(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  r.x = 0.5 * (lo + hi);
  return r;
}

ScalarResult golden_section(const std::function<double(double)>& f, double lo, double hi,
                            double rel_tol, int max_iter) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  ScalarResult r;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c), fd = f(d);
  while (r.iterations < max_iter) {
    if (hi - lo <= rel_tol * std::max({std::abs(lo), std::abs(hi), 1e-300})) {
      r.converged = true;
      break;
    }
    ++r.iterations;
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  r.x = fc <= fd ? c : d;
  return r;
}

}  // namespace beb::optim
