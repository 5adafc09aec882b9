#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bagged_eb/bagging.hpp"
#include "bagged_eb/simulation.hpp"

namespace beb::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct LinePanel {
  std::string title;
  std::vector<Series> series;
};

/// Panels laid out left to right, sharing axis labels.
std::string line_chart(std::span<const LinePanel> panels, const std::string& x_label,
                       const std::string& y_label);

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<std::size_t> counts;
};

/// Equal-width bins over [min, max]; every value lands in exactly one bin.
Histogram make_histogram(std::span<const double> values, std::size_t bins);

struct HistogramPanel {
  std::string title;
  Histogram hist;
  std::optional<double> marker;  // vertical reference line
};

std::string histogram_chart(std::span<const HistogramPanel> panels);

/// MSE against m, one panel per truth value, one line per estimator.
std::string mse_chart(const SimResult& result);

/// One histogram per hyperparameter coordinate with the ML estimate marked.
std::string param_histograms(const ParamTable& table, std::size_t bins = 30);

}  // namespace beb::svg
