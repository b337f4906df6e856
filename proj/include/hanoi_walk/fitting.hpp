#pragma once

/**
 * @file fitting.hpp
 * @brief Log-space least-squares fits of scaling data.
 *
 * Every model is linear after taking logs:
 *
 *   PowerLaw       y = a N^b              log y                 = log a + b log N
 *   PowerSqrtLog   y = a N^b sqrt(log N)  log y - 1/2 log log N = log a + b log N
 *   PowerLog       y = a N^b log N        log y - log log N     = log a + b log N
 *   InversePower   y = c N^(-d)           log y                 = log c - d log N
 *
 * Logs are natural. The log N factors are fixed structure, not parameters.
 */

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hanoi_walk {

enum class FitModel { PowerLaw, PowerSqrtLog, PowerLog, InversePower };

inline std::string_view to_string(FitModel model) {
  switch (model) {
    case FitModel::PowerLaw:
      return "power";
    case FitModel::PowerSqrtLog:
      return "power-sqrt-log";
    case FitModel::PowerLog:
      return "power-log";
    case FitModel::InversePower:
      return "inverse-power";
  }
  return "?";
}

inline FitModel parse_fit_model(std::string_view text) {
  for (FitModel m : {FitModel::PowerLaw, FitModel::PowerSqrtLog, FitModel::PowerLog, FitModel::InversePower}) {
    if (text == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown fit model '" + std::string(text) +
                              "' (expected power, power-sqrt-log, power-log or inverse-power)");
}

/// Power of log N carried by the model.
constexpr double log_factor_power(FitModel model) {
  switch (model) {
    case FitModel::PowerSqrtLog:
      return 0.5;
    case FitModel::PowerLog:
      return 1.0;
    default:
      return 0.0;
  }
}

struct FitPoint {
  double N = 0.0;
  double y = 0.0;
};

struct FitResult {
  FitModel model = FitModel::PowerLaw;
  double amplitude = 0.0;  // a, or c for InversePower
  double exponent = 0.0;   // b, or d for InversePower
  double r_squared = 0.0;  // on the transformed residuals
  std::size_t point_count = 0;
};

namespace detail {

inline void check_fit_point(const FitPoint& p) {
  if (!(p.N >= 3.0) || !std::isfinite(p.N)) {
    throw std::domain_error("fit needs N >= 3 so that log log N > 0, got N=" + std::to_string(p.N));
  }
  if (!(p.y > 0.0) || !std::isfinite(p.y)) {
    throw std::domain_error("fit needs positive finite y, got y=" + std::to_string(p.y));
  }
}

inline double transformed(FitModel model, const FitPoint& p) {
  return std::log(p.y) - log_factor_power(model) * std::log(std::log(p.N));
}

/// (intercept, slope) of the transformed line.
inline std::pair<double, double> line_of(FitModel model, const FitResult& fit) {
  const double intercept = std::log(fit.amplitude);
  const double slope = model == FitModel::InversePower ? -fit.exponent : fit.exponent;
  return {intercept, slope};
}

}  // namespace detail

inline FitResult fit(FitModel model, const std::vector<FitPoint>& points) {
  if (points.size() < 3) {
    throw std::domain_error("fit needs at least 3 points, got " + std::to_string(points.size()));
  }
  for (const FitPoint& p : points) detail::check_fit_point(p);

  const auto count = static_cast<double>(points.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const FitPoint& p : points) {
    mean_x += std::log(p.N);
    mean_y += detail::transformed(model, p);
  }
  mean_x /= count;
  mean_y /= count;

  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const FitPoint& p : points) {
    const double dx = std::log(p.N) - mean_x;
    const double dy = detail::transformed(model, p) - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) throw std::domain_error("fit needs at least two distinct N values");

  const double slope = sxy / sxx;
  const double intercept = mean_y - slope * mean_x;

  double ss_res = 0.0;
  for (const FitPoint& p : points) {
    const double r = detail::transformed(model, p) - (intercept + slope * std::log(p.N));
    ss_res += r * r;
  }
  // Flat transformed data fits perfectly when the residuals vanish too.
  double r2 = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res <= 1e-24 ? 1.0 : 0.0);
  if (r2 < 0.0) r2 = 0.0;

  FitResult result;
  result.model = model;
  result.amplitude = std::exp(intercept);
  result.exponent = model == FitModel::InversePower ? -slope : slope;
  result.r_squared = r2;
  result.point_count = points.size();
  return result;
}

inline double evaluate(FitModel model, const FitResult& fit, double N) {
  if (!(N > 1.0)) throw std::domain_error("evaluate needs N > 1, got " + std::to_string(N));
  const double b = model == FitModel::InversePower ? -fit.exponent : fit.exponent;
  return fit.amplitude * std::pow(N, b) * std::pow(std::log(N), log_factor_power(model));
}

struct ResidualRow {
  double N = 0.0;
  double observed = 0.0;
  double predicted = 0.0;
  double log_residual = 0.0;  // in transformed space
};

inline std::vector<ResidualRow> residual_report(FitModel model, const FitResult& fit, const std::vector<FitPoint>& points) {
  if (fit.model != model) throw std::invalid_argument("residual_report: fit was produced by a different model");
  const auto [intercept, slope] = detail::line_of(model, fit);
  std::vector<ResidualRow> rows;
  rows.reserve(points.size());
  for (const FitPoint& p : points) {
    detail::check_fit_point(p);
    const double r = detail::transformed(model, p) - (intercept + slope * std::log(p.N));
    rows.push_back({p.N, p.y, evaluate(model, fit, p.N), r});
  }
  return rows;
}

}  // namespace hanoi_walk
