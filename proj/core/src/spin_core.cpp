#include "spinmarket/spin_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace spinmarket {

namespace {

void check_spin(int spin) {
  if (spin != 1 && spin != -1) throw DomainError("spin must be +1 or -1");
}

std::vector<int> site_neighborhood(int n, int y, int a_plus, Rng& rng) {
  const int size = sample_hypergeometric(n - 1, n * (n - 1) / 2, a_plus, rng);
  std::vector<int> others;
  others.reserve(n - 1);
  for (int x = 0; x < n; ++x)
    if (x != y) others.push_back(x);
  std::vector<int> chosen;
  chosen.reserve(size);
  std::sample(others.begin(), others.end(), std::back_inserter(chosen), size, rng);
  return chosen;
}

ArcNeighborhood arc_neighborhood(int n, const Arc& arc, int s_plus, Rng& rng) {
  // Two draws without replacement; the first ball stands for x, the second for y.
  std::uniform_int_distribution<int> ball;
  const bool x_red = ball(rng, decltype(ball)::param_type(0, n - 1)) < s_plus;
  const bool y_red = ball(rng, decltype(ball)::param_type(0, n - 2)) < s_plus - (x_red ? 1 : 0);

  ArcNeighborhood out;
  out.star = x_red ? (y_red ? StarCase::kBoth : StarCase::kStarX)
                   : (y_red ? StarCase::kStarY : StarCase::kNone);
  const auto add_star = [&](int centre, int other) {
    for (int z = 0; z < n; ++z)
      if (z != centre && z != other) out.members.push_back(Arc{std::min(centre, z), std::max(centre, z)});
  };
  if (x_red) add_star(arc.x, arc.y);
  if (y_red) add_star(arc.y, arc.x);
  return out;
}

// Resolves the new spin of an element with potential sign `sign` (frozen)
// or real potential `h` (finite beta).
int resolve_spin(int old_spin, int local_sum, const MacroState& state,
                 const ModelParams& params, Rng& rng) {
  if (params.is_frozen()) {
    const int sign = potential_sign(local_sum, old_spin, state, params);
    if (sign != 0) return sign;
    if (params.tie_policy == TiePolicy::kFlipOnTie) return -old_spin;
    return std::bernoulli_distribution(0.5)(rng) ? 1 : -1;
  }
  const double h = local_sum - params.alpha.value() * old_spin *
                                   global_imbalance(state, params.n);
  const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * *params.beta * h));
  return std::bernoulli_distribution(p_plus)(rng) ? 1 : -1;
}

UpdateRecord step_with_counts(MicroConfig& config, const MacroState& counts,
                              const ModelParams& params, Rng& rng) {
  const int n = config.n();
  const int arcs = n * (n - 1) / 2;
  std::uniform_int_distribution<int> pick(0, n + arcs - 1);
  const int e = pick(rng);

  UpdateRecord rec;
  if (e < n) {
    rec.is_site = true;
    rec.element = e;
    rec.old_spin = config.site(e);
    const auto nbhd = site_neighborhood(n, e, counts.j, rng);
    int local = 0;
    for (int y : nbhd) local += config.site(y);
    rec.new_spin = resolve_spin(rec.old_spin, local, counts, params, rng);
    if (rec.new_spin != rec.old_spin) config.set_site(e, rec.new_spin);
  } else {
    rec.is_site = false;
    rec.element = e - n;
    const Arc a = arc_at(rec.element, n);
    rec.old_spin = config.arc(a);
    const auto nbhd = arc_neighborhood(n, a, counts.i, rng);
    // Members of the star are mapped to +-1 by a hypergeometric draw from the
    // other arcs, so the neighbor signs do not depend on which arcs form the star.
    const int m = static_cast<int>(nbhd.members.size());
    const int others_plus = counts.j - (rec.old_spin > 0 ? 1 : 0);
    const int k = sample_hypergeometric(m, arcs - 1, others_plus, rng);
    rec.new_spin = resolve_spin(rec.old_spin, 2 * k - m, counts, params, rng);
    if (rec.new_spin != rec.old_spin) config.set_arc(a.x, a.y, rec.new_spin);
  }
  return rec;
}

void apply_counts(MacroState& counts, const UpdateRecord& rec) {
  if (rec.new_spin == rec.old_spin) return;
  const int delta = rec.new_spin > 0 ? 1 : -1;
  if (rec.is_site)
    counts.i += delta;
  else
    counts.j += delta;
}

}  // namespace

int arc_index(int x, int y, int n) {
  if (x == y || x < 0 || y < 0 || x >= n || y >= n)
    throw DomainError("invalid arc (" + std::to_string(x) + "," + std::to_string(y) + ")");
  if (x > y) std::swap(x, y);
  return x * (2 * n - x - 1) / 2 + (y - x - 1);
}

Arc arc_at(int index, int n) {
  if (index < 0 || index >= n * (n - 1) / 2) throw DomainError("arc index out of range");
  int x = 0;
  while (index >= n - 1 - x) {
    index -= n - 1 - x;
    ++x;
  }
  return {x, x + 1 + index};
}

MicroConfig::MicroConfig(int n)
    : n_(n), sites_(static_cast<std::size_t>(n), -1),
      arcs_(static_cast<std::size_t>(n) * (n - 1) / 2, -1) {
  if (n < 2) throw DomainError("N must be at least 2");
}

MicroConfig::MicroConfig(std::vector<std::int8_t> sites, std::vector<std::int8_t> arcs)
    : n_(static_cast<int>(sites.size())), sites_(std::move(sites)), arcs_(std::move(arcs)) {
  if (n_ < 2) throw DomainError("N must be at least 2");
  if (arcs_.size() != static_cast<std::size_t>(n_) * (n_ - 1) / 2)
    throw DomainError("arc vector must hold C(N,2) spins");
  for (int s : sites_) check_spin(s);
  for (int s : arcs_) check_spin(s);
}

MicroConfig MicroConfig::with_counts(int n, const MacroState& counts) {
  check_state(counts, n);
  MicroConfig c(n);
  std::fill_n(c.sites_.begin(), counts.i, 1);
  std::fill_n(c.arcs_.begin(), counts.j, 1);
  return c;
}

void MicroConfig::set_site(int x, int spin) {
  check_spin(spin);
  sites_.at(x) = static_cast<std::int8_t>(spin);
}

void MicroConfig::set_arc(int x, int y, int spin) {
  check_spin(spin);
  arcs_.at(arc_index(x, y, n_)) = static_cast<std::int8_t>(spin);
}

MacroState macro_counts(const MicroConfig& config) {
  const auto plus = [](const auto& v) {
    return static_cast<int>(std::count(v.begin(), v.end(), 1));
  };
  return {plus(config.sites()), plus(config.arcs())};
}

std::string to_text(const MicroConfig& config) {
  std::ostringstream out;
  const auto line = [&out](const std::vector<std::int8_t>& v) {
    for (std::size_t k = 0; k < v.size(); ++k) out << (k ? " " : "") << int{v[k]};
    out << '\n';
  };
  line(config.sites());
  line(config.arcs());
  return out.str();
}

MicroConfig parse_micro_config(const std::string& text) {
  std::istringstream in(text);
  std::string site_line, arc_line;
  if (!std::getline(in, site_line) || !std::getline(in, arc_line))
    throw DomainError("config text needs two lines");
  const auto read = [](const std::string& line) {
    std::istringstream ls(line);
    std::vector<std::int8_t> out;
    int v = 0;
    while (ls >> v) {
      check_spin(v);
      out.push_back(static_cast<std::int8_t>(v));
    }
    if (!ls.eof()) throw DomainError("non-numeric token in config text");
    return out;
  };
  return MicroConfig(read(site_line), read(arc_line));
}

int sample_hypergeometric(int draws, int population, int successes, Rng& rng) {
  if (draws < 0 || successes < 0 || successes > population || draws > population)
    throw DomainError("invalid hypergeometric parameters");
  int hits = 0;
  std::uniform_int_distribution<int> ball;
  for (int d = 0; d < draws; ++d) {
    const int left = population - d;
    if (ball(rng, decltype(ball)::param_type(0, left - 1)) < successes - hits) ++hits;
  }
  return hits;
}

std::vector<int> sample_site_neighborhood(const MicroConfig& config, int y, Rng& rng) {
  if (y < 0 || y >= config.n()) throw DomainError("site out of range");
  return site_neighborhood(config.n(), y, macro_counts(config).j, rng);
}

ArcNeighborhood sample_arc_neighborhood(const MicroConfig& config, const Arc& arc, Rng& rng) {
  arc_index(arc.x, arc.y, config.n());  // validates
  return arc_neighborhood(config.n(), arc, macro_counts(config).i, rng);
}

double site_potential(const MicroConfig& config, int x, const std::vector<int>& nbhd,
                      double alpha, const MacroState& state) {
  int sum = 0;
  for (int y : nbhd) {
    if (y == x) throw DomainError("site neighborhood contains the site itself");
    sum += config.site(y);
  }
  return sum - alpha * config.site(x) * global_imbalance(state, config.n());
}

double arc_potential(const MicroConfig& config, const Arc& arc, const std::vector<Arc>& nbhd,
                     double alpha, const MacroState& state) {
  int sum = 0;
  for (const Arc& b : nbhd) {
    if (arc_index(b.x, b.y, config.n()) == arc_index(arc.x, arc.y, config.n()))
      throw DomainError("arc neighborhood contains the arc itself");
    sum += config.arc(b);
  }
  return sum - alpha * config.arc(arc) * global_imbalance(state, config.n());
}

UpdateRecord heat_bath_step(MicroConfig& config, const ModelParams& params, Rng& rng) {
  params.validate();
  if (config.n() != params.n) throw DomainError("config size does not match N");
  MacroState counts = macro_counts(config);
  return step_with_counts(config, counts, params, rng);
}

MicroConfig heat_bath_update(const MicroConfig& config, const ModelParams& params, Rng& rng) {
  MicroConfig next = config;
  heat_bath_step(next, params, rng);
  return next;
}

std::vector<MacroState> run_micro(MicroConfig config, const ModelParams& params, long steps,
                                  Rng& rng) {
  params.validate();
  if (steps < 0) throw DomainError("steps must be non-negative");
  if (config.n() != params.n) throw DomainError("config size does not match N");
  MacroState counts = macro_counts(config);
  std::vector<MacroState> path;
  path.reserve(static_cast<std::size_t>(steps));
  for (long s = 0; s < steps; ++s) {
    const UpdateRecord rec = step_with_counts(config, counts, params, rng);
    apply_counts(counts, rec);
    path.push_back(counts);
  }
  return path;
}

}  // namespace spinmarket
