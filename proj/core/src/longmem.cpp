#include "spinmarket/longmem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spinmarket {

namespace {

// R/S of one window; empty when the window has no spread.
std::optional<double> window_rs(std::span<const double> x, const RsOptions& opts) {
  const auto tau = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / tau;
  double scale = 0.0, var = 0.0, z = 0.0, zmax = 0.0, zmin = 0.0;
  for (double v : x) {
    scale = std::max(scale, std::fabs(v));
    const double d = v - mean;
    var += d * d;
    z += d;
    zmax = std::max(zmax, z);
    zmin = std::min(zmin, z);
  }
  var /= tau;
  if (scale == 0.0 || var <= 1e-18 * scale * scale) return std::nullopt;

  double denom_sq = var;
  if (opts.method == RsMethod::kLo) {
    const auto autocov = [&](std::size_t lag) {
      double s = 0.0;
      for (std::size_t t = lag; t < x.size(); ++t) s += (x[t] - mean) * (x[t - lag] - mean);
      return s / tau;
    };
    int q = 0;
    if (opts.lo_bandwidth) {
      q = *opts.lo_bandwidth;
    } else {
      const double rho = std::fabs(autocov(1) / var);
      if (rho < 1.0) {
        const double b = 2.0 * rho / (1.0 - rho * rho);
        q = static_cast<int>(std::floor(std::cbrt(1.5 * tau) * std::pow(b, 2.0 / 3.0)));
      } else {
        q = static_cast<int>(x.size()) - 1;
      }
    }
    q = std::clamp(q, 0, static_cast<int>(x.size()) - 1);
    for (int j = 1; j <= q; ++j) denom_sq += 2.0 * (1.0 - j / (q + 1.0)) * autocov(j);
    if (denom_sq <= 1e-18 * scale * scale) return std::nullopt;
  }
  return (zmax - zmin) / std::sqrt(denom_sq);
}

}  // namespace

RsValue rs_statistic(std::span<const double> path, int tau, const RsOptions& opts) {
  if (tau < 2) throw DomainError("tau must be at least 2");
  if (path.size() < 2 * static_cast<std::size_t>(tau))
    throw DomainError("path shorter than 2*tau");
  std::vector<double> series;
  if (opts.input == RsInput::kIncrements) {
    series.resize(path.size() - 1);
    for (std::size_t t = 0; t + 1 < path.size(); ++t) series[t] = path[t + 1] - path[t];
  } else {
    series.assign(path.begin(), path.end());
  }

  RsValue out;
  double sum = 0.0;
  const std::size_t windows = series.size() / static_cast<std::size_t>(tau);
  for (std::size_t w = 0; w < windows; ++w) {
    const auto rs = window_rs(std::span<const double>(series).subspan(w * tau, tau), opts);
    if (!rs) {
      ++out.windows_skipped;
      continue;
    }
    sum += *rs;
    ++out.windows_used;
  }
  if (out.windows_used == 0) throw UndefinedStatistic("every R/S window has zero variance");
  out.value = sum / out.windows_used;
  return out;
}

double rs_index(std::span<const double> path, int tau, const RsOptions& opts) {
  return std::log(rs_statistic(path, tau, opts).value) / std::log(static_cast<double>(tau));
}

std::optional<double> RsCurve::at(int tau) const {
  for (std::size_t k = 0; k < taus.size(); ++k)
    if (taus[k] == tau) return index_values[k];
  return std::nullopt;
}

RsCurve rs_curve(std::span<const double> path, const std::vector<int>& taus,
                 const RsOptions& opts) {
  RsCurve c;
  c.taus = taus;
  std::sort(c.taus.begin(), c.taus.end());
  if (std::adjacent_find(c.taus.begin(), c.taus.end()) != c.taus.end())
    throw DomainError("duplicate tau values");
  if (!c.taus.empty() && path.size() < 2 * static_cast<std::size_t>(c.taus.back()))
    throw DomainError("largest tau exceeds half the path length");
  for (int tau : c.taus) c.index_values.push_back(rs_index(path, tau, opts));
  return c;
}

PersistenceSummary persistence_summary(const std::vector<RsCurve>& runs, int tau) {
  PersistenceSummary s;
  std::vector<double> values;
  for (const RsCurve& c : runs) {
    const auto v = c.at(tau);
    if (!v) throw DomainError("a run has no value at tau=" + std::to_string(tau));
    values.push_back(*v);
  }
  s.total = static_cast<int>(values.size());
  if (s.total == 0) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / s.total;
  // deviations taken about the first value keep identical runs at exactly 0
  double shift = 0.0;
  for (double v : values) shift += v - values[0];
  shift /= s.total;
  double ss = 0.0;
  for (double v : values) {
    const double d = (v - values[0]) - shift;
    ss += d * d;
    if (v > 0.5) ++s.above_half;
  }
  s.std = s.total > 1 ? std::sqrt(ss / (s.total - 1)) : 0.0;
  s.fraction_above_half = static_cast<double>(s.above_half) / s.total;
  return s;
}

std::vector<double> site_series(const std::vector<MacroState>& path) {
  std::vector<double> out;
  out.reserve(path.size());
  for (const MacroState& s : path) out.push_back(s.i);
  return out;
}

std::vector<double> arc_series(const std::vector<MacroState>& path) {
  std::vector<double> out;
  out.reserve(path.size());
  for (const MacroState& s : path) out.push_back(s.j);
  return out;
}

}  // namespace spinmarket
