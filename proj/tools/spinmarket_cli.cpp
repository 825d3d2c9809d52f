#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spinmarket/kernel.hpp"
#include "spinmarket/longmem.hpp"
#include "spinmarket/scan.hpp"
#include "spinmarket/skeleton.hpp"
#include "spinmarket/spectral.hpp"
#include "spinmarket/spin_core.hpp"
#include "spinmarket/table.hpp"

namespace fs = std::filesystem;
using namespace spinmarket;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Globals {
  std::uint64_t seed = 1;
  std::string out_dir;
  std::string format = "csv";
  int threads = 1;
};

// Writes `t` to out_dir/name.<ext>, or to stdout when no directory was given.
void emit(const Globals& g, const std::string& name, const Table& t) {
  const bool json = g.format == "json";
  if (g.out_dir.empty()) {
    if (json)
      write_json(std::cout, t);
    else
      write_csv(std::cout, t);
    return;
  }
  fs::create_directories(g.out_dir);
  const fs::path path = fs::path(g.out_dir) / (name + (json ? ".json" : ".csv"));
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  if (json)
    write_json(out, t);
  else
    write_csv(out, t);
}

void emit_text(const Globals& g, const std::string& file, const std::string& text) {
  if (g.out_dir.empty()) {
    std::cout << text << '\n';
    return;
  }
  fs::create_directories(g.out_dir);
  std::ofstream out(fs::path(g.out_dir) / file);
  out << text << '\n';
}

ModelParams model(int n, const std::string& alpha) {
  ModelParams p;
  p.n = n;
  p.alpha = Coupling::parse(alpha);
  p.validate();
  return p;
}

MacroState parse_state(const std::string& text, int n) {
  MacroState s;
  char comma = 0;
  std::istringstream in(text);
  if (!(in >> s.i >> comma >> s.j) || comma != ',' || !(in >> std::ws).eof())
    throw DomainError("state must look like i,j: " + text);
  check_state(s, n);
  return s;
}

// One value per line; blank lines and a non-numeric header are skipped.
std::vector<double> read_series(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw DomainError("cannot read " + file);
  std::vector<double> v;
  std::string line;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    const std::string cell = comma == std::string::npos ? line : line.substr(comma + 1);
    try {
      v.push_back(std::stod(cell));
    } catch (const std::invalid_argument&) {
      if (!v.empty()) throw DomainError("bad value in " + file + ": " + line);
    }
  }
  return v;
}

struct ModelArgs {
  int n = 10;
  std::string alpha = "3";
};

void add_model_options(CLI::App* cmd, ModelArgs& m) {
  cmd->add_option("-N,--sites", m.n, "number of sites")->check(CLI::Range(2, 200));
  cmd->add_option("-a,--alpha", m.alpha, "coupling constant (integer, decimal or p/q)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin market model: kernels, spectra, skeletons, long memory and sweeps"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "master random seed");
  app.add_option("--out-dir", g.out_dir, "write files here instead of stdout");
  app.add_option("--format", g.format, "table format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", g.threads, "worker threads for sweeps")->check(CLI::PositiveNumber);

  // simulate
  ModelArgs sim_m;
  std::string sim_level = "macro", sim_start;
  long sim_steps = 1000;
  auto* sim = app.add_subcommand("simulate", "simulate a macro or micro path");
  add_model_options(sim, sim_m);
  sim->add_option("--level", sim_level, "macro chain or micro spins")
      ->check(CLI::IsMember({"macro", "micro"}));
  sim->add_option("--steps", sim_steps, "number of steps")->check(CLI::NonNegativeNumber);
  sim->add_option("--start", sim_start, "start state i,j (default N/2,C/2)");

  // kernel
  ModelArgs ker_m;
  bool ker_matrix = false;
  auto* ker = app.add_subcommand("kernel", "dump the transition probabilities");
  add_model_options(ker, ker_m);
  ker->add_flag("--matrix", ker_matrix, "also write the sparse transition matrix");

  // spectrum
  ModelArgs spec_m;
  int spec_count = 20;
  auto* spec = app.add_subcommand("spectrum", "eigen-analysis for one (N, alpha)");
  add_model_options(spec, spec_m);
  spec->add_option("--count", spec_count, "eigenvalues to report (-1 for all)");

  // skeleton
  ModelArgs sk_m;
  auto* sk = app.add_subcommand("skeleton", "drift field, automaton attractors and basins");
  add_model_options(sk, sk_m);

  // rs
  ModelArgs rs_m;
  std::string rs_input_file, rs_input = "levels", rs_method = "classic";
  long rs_steps = 100000;
  std::vector<int> rs_taus{50, 100, 200, 500, 1000};
  auto* rs = app.add_subcommand("rs", "rescaled-range index of a path");
  add_model_options(rs, rs_m);
  rs->add_option("--input", rs_input_file, "series file (one value per line); simulates if absent");
  rs->add_option("--steps", rs_steps, "simulated path length");
  rs->add_option("--taus", rs_taus, "window lengths")->delimiter(',');
  rs->add_option("--series", rs_input, "treat values as levels or take increments")
      ->check(CLI::IsMember({"levels", "increments"}));
  rs->add_option("--method", rs_method)->check(CLI::IsMember({"classic", "lo"}));

  // sweep
  std::string sweep_config;
  auto* sw = app.add_subcommand("sweep", "scan a grid of (N, alpha) points");
  sw->add_option("config", sweep_config, "JSON sweep configuration")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sim) {
      const ModelParams p = model(sim_m.n, sim_m.alpha);
      const MacroState start = sim_start.empty() ? MacroState{p.n / 2, p.arc_count() / 2}
                                                 : parse_state(sim_start, p.n);
      Rng rng = make_rng(g.seed);
      std::vector<MacroState> path{start};
      const std::vector<MacroState> rest =
          sim_level == "macro"
              ? simulate_macro_chain(start, p, sim_steps, rng)
              : run_micro(MicroConfig::with_counts(p.n, start), p, sim_steps, rng);
      path.insert(path.end(), rest.begin(), rest.end());
      emit(g, "path", path_table(path));
    } else if (*ker) {
      const ModelParams p = model(ker_m.n, ker_m.alpha);
      emit(g, "kernel", kernel_table(p));
      if (ker_matrix) emit(g, "matrix", matrix_table(assemble_matrix(p)));
    } else if (*spec) {
      const ModelParams p = model(spec_m.n, spec_m.alpha);
      const TransitionMatrix m = assemble_matrix(p);
      const SpectralSummary s = analyze(m, spec_count);
      const auto hl = mixing_half_life(s.lambda2);
      Table summary{{"N", "alpha", "lambda2", "gap", "half_life", "trap_mass", "non_ergodic"}, {}};
      summary.add({static_cast<long long>(p.n), p.alpha.value(), s.lambda2, s.gap,
                   hl ? Table::Cell{*hl} : Table::Cell{std::string("inf")},
                   trap_mass(s.stationary.measure),
                   static_cast<long long>(s.numerically_non_ergodic)});
      emit(g, "summary", summary);
      if (!g.out_dir.empty()) {
        emit(g, "spectrum", spectrum_table(eigenvalues(m, spec_count < 0 ? m.dim() : spec_count)));
        emit(g, "stationary", measure_table(s.stationary.measure));
        emit(g, "second_vector", measure_table(s.second.vector));
      }
    } else if (*sk) {
      const ModelParams p = model(sk_m.n, sk_m.alpha);
      const DriftField field = drift_field(p);
      const AttractorReport rep = attractor_report(field);
      emit_text(g, "attractors.json", attractor_json(rep));
      if (!g.out_dir.empty()) {
        emit(g, "drift", drift_table(field));
        emit(g, "basins", basin_table(rep, p.n));
      }
    } else if (*rs) {
      RsOptions o;
      o.input = rs_input == "levels" ? RsInput::kLevels : RsInput::kIncrements;
      o.method = rs_method == "lo" ? RsMethod::kLo : RsMethod::kClassic;
      Table t{{"series", "tau", "rs_index"}, {}};
      const auto add_curve = [&](const std::string& name, const std::vector<double>& v) {
        const RsCurve c = rs_curve(v, rs_taus, o);
        for (std::size_t k = 0; k < c.taus.size(); ++k)
          t.add({name, static_cast<long long>(c.taus[k]), c.index_values[k]});
      };
      if (!rs_input_file.empty()) {
        add_curve("input", read_series(rs_input_file));
      } else {
        const ModelParams p = model(rs_m.n, rs_m.alpha);
        Rng rng = make_rng(g.seed);
        const auto path =
            simulate_macro_chain({p.n / 2, p.arc_count() / 2}, p, rs_steps, rng);
        add_curve("sites", site_series(path));
        add_curve("arcs", arc_series(path));
      }
      emit(g, "rs", t);
    } else if (*sw) {
      std::ifstream in(sweep_config);
      if (!in) throw ConfigError("cannot read " + sweep_config);
      const std::string text{std::istreambuf_iterator<char>(in), {}};
      SweepConfig cfg = parse_sweep_config(text);
      if (app.get_option("--threads")->count()) cfg.threads = g.threads;
      if (app.get_option("--seed")->count()) cfg.seed = g.seed;
      const fs::path out = g.out_dir.empty() ? fs::path("sweep_out") : fs::path(g.out_dir);
      const SweepOutcome res = run_sweep(cfg, out, text);
      std::cerr << res.records.size() << " points, " << res.failures << " failed, output in "
                << out.string() << '\n';
      if (res.failures > 0) return kExitNumeric;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const UndefinedStatistic& e) {
    std::cerr << "undefined statistic: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
