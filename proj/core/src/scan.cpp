#include "spinmarket/scan.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <boost/math/tools/minima.hpp>
#include <boost/version.hpp>
#include <nlohmann/json.hpp>

#include "spinmarket/kernel.hpp"
#include "spinmarket/longmem.hpp"
#include "spinmarket/table.hpp"

namespace spinmarket {

namespace {

std::vector<MacroState> grid_neighbors(const MacroState& s, int n, Neighborhood hood) {
  std::vector<MacroState> out;
  for (int di = -1; di <= 1; ++di)
    for (int dj = -1; dj <= 1; ++dj) {
      if (di == 0 && dj == 0) continue;
      if (hood == Neighborhood::kVonNeumann && di != 0 && dj != 0) continue;
      const MacroState t{s.i + di, s.j + dj};
      if (in_grid(t, n)) out.push_back(t);
    }
  return out;
}

struct PointResult {
  SweepRecord record;
  MeasureGrid stationary;
  std::vector<std::complex<double>> eigen;
  std::vector<std::pair<std::string, RsCurve>> rs;  // series name, curve
};

PointResult analyze_full(const ModelParams& params, const ModalityOptions& modality) {
  PointResult out;
  SweepRecord& r = out.record;
  r.n = params.n;
  r.alpha = params.alpha.value();
  r.alpha_text = params.alpha.str();
  const TransitionMatrix m = assemble_matrix(params);
  out.eigen = eigenvalues(m, m.dim() <= SpectrumOptions{}.dense_limit ? m.dim()
                                                                       : std::min(m.dim(), 10));
  r.lambda2 = out.eigen.size() > 1 ? std::abs(out.eigen[1]) : 0.0;
  r.gap = std::clamp(1.0 - r.lambda2, 0.0, 1.0);
  r.half_life = r.lambda2 > 0.0 ? mixing_half_life(r.lambda2) : std::optional<long long>(0);
  const StationaryResult st = stationary_measure(m);
  out.stationary = st.measure;
  r.multiple_invariant = st.multiple();
  r.trap_mass = trap_mass(st.measure);
  const ModalityResult modes = modality_analysis(st.measure, modality);
  r.mode_count = modes.mode_count;
  for (const Mode& md : modes.modes) r.mode_locations.push_back(md.location);
  r.correlation_gap = correlation_check(st.measure);
  const auto lowest = std::min_element(st.measure.values.begin(), st.measure.values.end());
  r.argmin = index_state(static_cast<int>(lowest - st.measure.values.begin()), params.n);
  return out;
}

std::string file_alpha(const std::string& text) {
  std::string s = text;
  std::replace(s.begin(), s.end(), '/', '_');
  return s;
}

std::string states_text(const std::vector<MacroState>& states) {
  std::string out;
  for (std::size_t k = 0; k < states.size(); ++k) out += (k ? ";" : "") + to_string(states[k]);
  return out;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void write_table(const std::filesystem::path& path, const Table& t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(out, t);
}

}  // namespace

ModalityResult modality_analysis(const MeasureGrid& measure, const ModalityOptions& opts) {
  const int n = measure.n;
  const int dim = static_cast<int>(measure.values.size());
  std::vector<double> v = measure.values;
  const double top = *std::max_element(v.begin(), v.end());
  for (double& x : v)
    if (x <= opts.floor * top) x = 0.0;
  if (opts.smoothing == Smoothing::kCross) {
    std::vector<double> s(dim);
    for (int k = 0; k < dim; ++k) {
      const MacroState c = index_state(k, n);
      const auto nb = grid_neighbors(c, n, Neighborhood::kVonNeumann);
      double sum = v[k];
      for (const MacroState& t : nb) sum += v[state_index(t, n)];
      s[k] = sum / static_cast<double>(nb.size() + 1);
    }
    v = std::move(s);
  }

  ModalityResult result;
  std::vector<bool> done(dim, false);
  for (int k = 0; k < dim; ++k) {
    if (done[k] || v[k] <= 0.0) continue;
    // Flood the plateau of cells sharing this exact value.
    std::vector<int> plateau{k};
    done[k] = true;
    bool is_max = true;
    for (std::size_t p = 0; p < plateau.size(); ++p) {
      for (const MacroState& t : grid_neighbors(index_state(plateau[p], n), n, opts.neighborhood)) {
        const int q = state_index(t, n);
        if (v[q] == v[k]) {
          if (!done[q]) {
            done[q] = true;
            plateau.push_back(q);
          }
        } else if (v[q] > v[k]) {
          is_max = false;
        }
      }
    }
    if (!is_max) continue;
    Mode md;
    md.location = index_state(*std::min_element(plateau.begin(), plateau.end()), n);
    md.plateau_size = static_cast<int>(plateau.size());
    for (int q : plateau) md.mass += measure.values[q];
    result.modes.push_back(md);
  }
  std::stable_sort(result.modes.begin(), result.modes.end(),
                   [](const Mode& a, const Mode& b) { return a.mass > b.mass; });
  result.mode_count = static_cast<int>(result.modes.size());
  return result;
}

double correlation_check(const MeasureGrid& measure) {
  double total = 0.0, ei = 0.0, ej = 0.0, eij = 0.0;
  for (std::size_t k = 0; k < measure.values.size(); ++k) {
    const MacroState s = index_state(static_cast<int>(k), measure.n);
    const double p = measure.values[k];
    total += p;
    ei += p * s.i;
    ej += p * s.j;
    eij += p * s.i * s.j;
  }
  if (total <= 0.0) throw DomainError("measure has no mass");
  ei /= total;
  ej /= total;
  eij /= total;
  return eij - ei * ej;
}

double trap_mass(const MeasureGrid& measure) {
  return measure.at({measure.n, measure.n * (measure.n - 1) / 2});
}

SweepRecord analyze_point(const ModelParams& params, const ModalityOptions& modality) {
  return analyze_full(params, modality).record;
}

std::string to_string(Regime r) {
  return r == Regime::kSubcritical ? "subcritical" : "supercritical";
}

Regime classify_regime(const SweepRecord& record, double trap_threshold) {
  return record.trap_mass >= trap_threshold ? Regime::kSubcritical : Regime::kSupercritical;
}

AlphaStarResult detect_alpha_star(int n, const std::vector<double>& alpha_grid, bool refine,
                                  double trap_threshold) {
  if (!std::is_sorted(alpha_grid.begin(), alpha_grid.end()))
    throw DomainError("alpha grid must be sorted");
  AlphaStarResult out;
  const auto sub = [&](double alpha) {
    const double mass =
        trap_mass(stationary_measure(assemble_matrix(ModelParams::frozen(n, alpha))).measure);
    out.trap_masses.emplace_back(alpha, mass);
    return mass >= trap_threshold;
  };
  std::vector<bool> regime;
  for (double a : alpha_grid) regime.push_back(sub(a));
  for (std::size_t k = 0; k + 1 < alpha_grid.size() && !out.found; ++k)
    if (regime[k] && !regime[k + 1]) {
      out.found = true;
      out.lo = alpha_grid[k];
      out.hi = alpha_grid[k + 1];
    }
  bool seen_sub_later = false;
  for (std::size_t k = alpha_grid.size(); k-- > 0;) {
    if (regime[k])
      seen_sub_later = true;
    else if (seen_sub_later)
      out.violations.push_back(alpha_grid[k]);
  }
  std::reverse(out.violations.begin(), out.violations.end());
  if (out.found && refine) {
    while (std::floor(out.hi) - std::ceil(out.lo) >= 1.0 ||
           (std::ceil(out.lo) > out.lo && std::ceil(out.lo) < out.hi)) {
      double mid = std::floor((out.lo + out.hi) / 2.0);
      if (mid <= out.lo) mid = std::ceil(out.lo);
      if (mid >= out.hi || mid <= out.lo) break;
      (sub(mid) ? out.lo : out.hi) = mid;
    }
  }
  return out;
}

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("need at least two samples");
  const int n = static_cast<int>(x.size());
  std::vector<double> lx(n), ly(n);
  for (int k = 0; k < n; ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) throw DomainError("power-law fit needs positive data");
    lx[k] = std::log(x[k]);
    ly[k] = std::log(y[k]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (int k = 0; k < n; ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
  }
  if (sxx == 0.0) throw DomainError("power-law fit needs distinct x values");
  PowerLawFit f;
  f.samples = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (int k = 0; k < n; ++k)
    f.max_residual = std::max(f.max_residual, std::fabs(ly[k] - (f.intercept + f.slope * lx[k])));
  return f;
}

GapPowerLawReport gap_power_law_fit(const std::vector<SweepRecord>& records,
                                    double trap_threshold) {
  std::vector<SweepRecord> sorted = records;
  std::sort(sorted.begin(), sorted.end(),
            [](const SweepRecord& a, const SweepRecord& b) { return a.alpha < b.alpha; });
  std::vector<double> xs, ys, xp, yp;
  GapPowerLawReport rep;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const SweepRecord& r = sorted[k];
    if (k > 0 && r.gap < sorted[k - 1].gap) rep.monotonicity_violations.push_back(r.alpha);
    if (classify_regime(r, trap_threshold) == Regime::kSubcritical) {
      xs.push_back(r.alpha);
      ys.push_back(r.gap);
    } else {
      xp.push_back(r.alpha);
      yp.push_back(r.gap);
    }
  }
  if (xs.size() < 3 || xp.size() < 3)
    throw DomainError("gap power-law fit needs three samples on each side of alpha*");
  rep.sub = fit_power_law(xs, ys);
  rep.super = fit_power_law(xp, yp);
  rep.alpha_break = 0.5 * (*std::max_element(xs.begin(), xs.end()) +
                           *std::min_element(xp.begin(), xp.end()));
  rep.sub_exceeds_super = rep.sub.slope > rep.super.slope;
  return rep;
}

GapPowerLawReport gap_power_law_fit(int n, const std::vector<double>& alpha_samples,
                                    double trap_threshold) {
  std::vector<SweepRecord> records;
  for (double a : alpha_samples) records.push_back(analyze_point(ModelParams::frozen(n, a)));
  return gap_power_law_fit(records, trap_threshold);
}

GaussianFit gaussian_limit_fit(const MeasureGrid& measure, int n) {
  if (measure.n != n) throw DomainError("measure does not match N");
  const auto model = [n](const MacroState& s, double sigma) {
    const double a = 2.0 * s.i - n;
    const double b = 4.0 * s.j - static_cast<double>(n) * n + n;
    return std::exp(-(4.0 * a * a + b * b) / (32.0 * sigma * sigma)) /
           (2.0 * M_PI * sigma * sigma);
  };
  const auto sse = [&](double log_sigma) {
    const double sigma = std::exp(log_sigma);
    double s = 0.0;
    for (std::size_t k = 0; k < measure.values.size(); ++k) {
      const double d = measure.values[k] - model(index_state(static_cast<int>(k), n), sigma);
      s += d * d;
    }
    return s;
  };
  // Coarse scan, then Brent around the best bracket.
  const double lo = std::log(0.05), hi = std::log(10.0 * n * n);
  const int steps = 200;
  int best = 0;
  double best_val = sse(lo);
  for (int k = 1; k <= steps; ++k) {
    const double v = sse(lo + (hi - lo) * k / steps);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  const double a = lo + (hi - lo) * std::max(0, best - 1) / steps;
  const double b = lo + (hi - lo) * std::min(steps, best + 1) / steps;
  const auto found = boost::math::tools::brent_find_minima(sse, a, b, 52);
  GaussianFit fit;
  fit.sigma = std::exp(found.first);
  for (std::size_t k = 0; k < measure.values.size(); ++k)
    fit.max_abs_residual =
        std::max(fit.max_abs_residual,
                 std::fabs(measure.values[k] - model(index_state(static_cast<int>(k), n), fit.sigma)));
  return fit;
}

SweepConfig parse_sweep_config(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  SweepConfig c;
  try {
    for (const auto& v : doc.value("N_list", nlohmann::json::array())) {
      const int n = v.get<int>();
      if (n < 2) throw ConfigError("N_list entries must be >= 2");
      c.n_list.push_back(n);
    }
    for (const auto& v : doc.value("alpha_list", nlohmann::json::array())) {
      const std::string text = v.is_string() ? v.get<std::string>() : v.dump();
      const Coupling a = Coupling::parse(text);
      if (a.num < 0) throw ConfigError("alpha_list entries must be >= 0");
      c.alpha_list.push_back(text);
    }
    c.seed = doc.value("seed", std::uint64_t{0});
    c.steps = doc.value("steps", 0L);
    if (c.steps < 0) throw ConfigError("steps must be >= 0");
    for (const auto& v : doc.value("taus", nlohmann::json::array())) {
      const int tau = v.get<int>();
      if (tau < 2) throw ConfigError("taus must be >= 2");
      c.taus.push_back(tau);
    }
    if (doc.contains("thresholds")) {
      const auto& th = doc["thresholds"];
      if (!th.is_object()) throw ConfigError("thresholds must be an object");
      c.trap_threshold = th.value("trap", c.trap_threshold);
      c.modality.floor = th.value("mode_floor", c.modality.floor);
    }
    if (doc.contains("modality")) {
      const auto& md = doc["modality"];
      const std::string hood = md.value("neighborhood", std::string("von_neumann"));
      const std::string smooth = md.value("smoothing", std::string("none"));
      if (hood == "moore")
        c.modality.neighborhood = Neighborhood::kMoore;
      else if (hood != "von_neumann")
        throw ConfigError("modality.neighborhood must be von_neumann or moore");
      if (smooth == "cross")
        c.modality.smoothing = Smoothing::kCross;
      else if (smooth != "none")
        throw ConfigError("modality.smoothing must be none or cross");
    }
    c.threads = std::max(1, doc.value("threads", 1));
    c.write_measures = doc.value("write_measures", true);
    c.write_spectra = doc.value("write_spectra", true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field has the wrong type: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

SweepOutcome run_sweep(const SweepConfig& config, const std::filesystem::path& out_dir,
                       const std::string& config_text) {
  const auto t0 = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out_dir);

  struct Point {
    ModelParams params;
    std::string alpha_text;
  };
  std::vector<Point> points;
  for (int n : config.n_list)
    for (const std::string& a : config.alpha_list) {
      ModelParams p;
      p.n = n;
      p.alpha = Coupling::parse(a);
      points.push_back({p, a});
    }

  std::vector<PointResult> results(points.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < points.size(); k = next++) {
      PointResult& res = results[k];
      try {
        res = analyze_full(points[k].params, config.modality);
        if (config.steps > 0 && !config.taus.empty()) {
          const ModelParams& p = points[k].params;
          Rng rng = make_rng(config.seed, k);
          const auto path = simulate_macro_chain({p.n / 2, p.arc_count() / 2}, p, config.steps, rng);
          std::vector<int> taus;
          for (int tau : config.taus)
            if (2L * tau <= config.steps) taus.push_back(tau);
          RsOptions levels;
          levels.input = RsInput::kLevels;
          for (const auto& [name, series] :
               {std::pair{std::string("sites"), site_series(path)},
                std::pair{std::string("arcs"), arc_series(path)}}) {
            try {
              res.rs.emplace_back(name, rs_curve(series, taus, levels));
            } catch (const UndefinedStatistic&) {
              res.rs.emplace_back(name, RsCurve{});
            }
          }
        }
      } catch (const std::exception& e) {
        res.record.n = points[k].params.n;
        res.record.alpha = points[k].params.alpha.value();
        res.record.error = e.what();
      }
      res.record.alpha_text = points[k].alpha_text;
    }
  };
  const int threads = std::max(1, std::min<int>(config.threads, static_cast<int>(points.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  SweepOutcome outcome;
  Table records{{"N", "alpha", "gap", "lambda2", "trap_mass", "regime", "mode_count",
                 "mode_locations", "correlation_gap", "half_life", "argmin_i", "argmin_j",
                 "multiple_invariant", "error"},
                {}};
  Table rs{{"run_id", "series", "tau", "index", "alpha", "N", "seed"}, {}};
  std::vector<std::string> outputs{"records.csv"};
  for (std::size_t k = 0; k < results.size(); ++k) {
    const PointResult& res = results[k];
    const SweepRecord& r = res.record;
    outcome.records.push_back(r);
    if (!r.error.empty()) {
      ++outcome.failures;
      records.add({static_cast<long long>(r.n), r.alpha_text, std::string(), std::string(),
                   std::string(), std::string(), std::string(), std::string(), std::string(),
                   std::string(), std::string(), std::string(), std::string(), r.error});
      continue;
    }
    records.add({static_cast<long long>(r.n), r.alpha_text, r.gap, r.lambda2, r.trap_mass,
                 to_string(classify_regime(r, config.trap_threshold)),
                 static_cast<long long>(r.mode_count), states_text(r.mode_locations),
                 r.correlation_gap,
                 r.half_life ? Table::Cell(static_cast<long long>(*r.half_life))
                             : Table::Cell(std::string("inf")),
                 static_cast<long long>(r.argmin.i), static_cast<long long>(r.argmin.j),
                 std::string(r.multiple_invariant ? "true" : "false"), std::string()});
    const std::string tag = "N" + std::to_string(r.n) + "_a" + file_alpha(r.alpha_text);
    if (config.write_measures) {
      write_table(out_dir / ("measure_" + tag + ".csv"), measure_table(res.stationary));
      outputs.push_back("measure_" + tag + ".csv");
    }
    if (config.write_spectra) {
      write_table(out_dir / ("spectrum_" + tag + ".csv"), spectrum_table(res.eigen));
      outputs.push_back("spectrum_" + tag + ".csv");
    }
    for (const auto& [name, curve] : res.rs)
      for (std::size_t t = 0; t < curve.taus.size(); ++t)
        rs.add({static_cast<long long>(k), name, static_cast<long long>(curve.taus[t]),
                curve.index_values[t], r.alpha_text, static_cast<long long>(r.n),
                static_cast<long long>(config.seed)});
  }
  write_table(out_dir / "records.csv", records);
  if (config.steps > 0 && !config.taus.empty()) {
    write_table(out_dir / "rs.csv", rs);
    outputs.push_back("rs.csv");
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  nlohmann::ordered_json manifest;
  manifest["tool"] = "spinmarket";
  manifest["version"] = SPINMARKET_VERSION;
  std::ostringstream hash;
  hash << std::hex << fnv1a(config_text);
  manifest["config_hash"] = "fnv1a64:" + hash.str();
  manifest["seed"] = config.seed;
  manifest["points"] = points.size();
  manifest["failures"] = outcome.failures;
  manifest["threads"] = threads;
  manifest["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                              std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION);
  manifest["boost_version"] = BOOST_LIB_VERSION;
  manifest["compiler"] = __VERSION__;
  manifest["wall_time_seconds"] = wall;
  manifest["outputs"] = outputs;
  std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << '\n';
  return outcome;
}

}  // namespace spinmarket
