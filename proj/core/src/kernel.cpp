#include "spinmarket/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>

namespace spinmarket {

__extension__ typedef __int128 i128;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

const std::vector<double>& log_factorials() {
  static const std::vector<double> table = [] {
    std::vector<double> t(1 << 15);
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = std::lgamma(static_cast<double>(k) + 1.0);
    return t;
  }();
  return table;
}

double log_factorial(int n) {
  const auto& t = log_factorials();
  if (static_cast<std::size_t>(n) < t.size()) return t[n];
  return std::lgamma(static_cast<double>(n) + 1.0);
}

// log pmf of drawing k marked balls in m draws from `pop` balls, `marked` of them marked.
double log_hyper(int k, int m, int pop, int marked) {
  return log_binomial(marked, k) + log_binomial(pop - marked, m - k) - log_binomial(pop, m);
}

// Sum of exp(logs) after a max-log shift, Neumaier-compensated.
double sum_exp(const std::vector<double>& logs) {
  double top = kNegInf;
  for (double l : logs) top = std::max(top, l);
  if (top == kNegInf) return 0.0;
  double sum = 0.0, comp = 0.0;
  for (double l : logs) {
    if (l == kNegInf) continue;
    const double x = std::exp(l - top);
    const double t = sum + x;
    comp += std::fabs(sum) >= x ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return std::exp(top) * (sum + comp);
}

i128 floor_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

i128 ceil_div(i128 a, i128 b) { return -floor_div(-a, b); }

// Exact thresholds for an element with m neighbors at a state.
// t = alpha |4(i+j) - K| / (2K), K = N(N+1), alpha = a/b; everything is
// scaled by 4Kb so the floor/ceil are taken on integers.
class Thresholds {
 public:
  Thresholds(const MacroState& s, const ModelParams& p) {
    const i128 k = static_cast<i128>(p.n) * (p.n + 1);
    const i128 d = std::abs(4 * (s.i + s.j) - static_cast<int>(k));
    two_kb_ = 2 * k * p.alpha.den;
    shift_ = static_cast<i128>(p.alpha.num) * d;
  }

  // A +1 element keeps its spin iff its positive-neighbor count k >= this.
  long plus_keep_min(int m) const {
    return static_cast<long>(1 + floor_div(two_kb_ * m + shift_, 2 * two_kb_));
  }
  // A -1 element keeps its spin iff k <= this.
  long minus_keep_max(int m) const {
    return static_cast<long>(ceil_div(two_kb_ * m - shift_, 2 * two_kb_) - 1);
  }
  // Count k at which the potential of a +1 (resp. -1) element is exactly 0.
  std::optional<long> plus_tie(int m) const { return exact_half(two_kb_ * m + shift_); }
  std::optional<long> minus_tie(int m) const { return exact_half(two_kb_ * m - shift_); }

 private:
  std::optional<long> exact_half(i128 num) const {
    if (num % (2 * two_kb_) != 0) return std::nullopt;
    return static_cast<long>(num / (2 * two_kb_));
  }
  i128 two_kb_ = 1;
  i128 shift_ = 0;
};

// Collects log-weights of the positive-neighbor counts k in [lo, hi] for m
// neighbors drawn from `pop` with `marked` positives, plus a half-weight for
// the tie count when the tie policy splits ties.
void add_tail(std::vector<double>& logs, double log_outer, int m, int pop, int marked, long lo,
              long hi, std::optional<long> tie, const ModelParams& p) {
  lo = std::max<long>({lo, 0, m - (pop - marked)});
  hi = std::min<long>({hi, m, marked});
  for (long k = lo; k <= hi; ++k) logs.push_back(log_outer + log_hyper(k, m, pop, marked));
  if (p.tie_policy == TiePolicy::kHeatBathHalf && tie && *tie >= 0 && *tie <= m &&
      *tie <= marked && m - *tie <= pop - marked)
    logs.push_back(log_outer + std::log(0.5) + log_hyper(static_cast<int>(*tie), m, pop, marked));
}

void require_frozen(const ModelParams& p) {
  p.validate();
  if (!p.is_frozen()) throw DomainError("closed-form kernel exists only in the frozen limit");
}

// Site stay probability; `plus` selects the sign of the chosen site.
double site_stay(int i, int j, const ModelParams& p, bool plus) {
  const int n = p.n;
  const int arcs = p.arc_count();
  const Thresholds th({i, j}, p);
  const int c_other = (n - 1) * (n - 2) / 2;
  // Positive sites among the other N-1 sites.
  const int marked = plus ? i - 1 : i;
  std::vector<double> logs;
  for (int l = std::max(0, j - c_other); l <= std::min(j, n - 1); ++l) {
    const double outer = log_hyper(l, n - 1, arcs, j);
    if (plus)
      add_tail(logs, outer, l, n - 1, marked, th.plus_keep_min(l), l, th.plus_tie(l), p);
    else
      add_tail(logs, outer, l, n - 1, marked, 0, th.minus_keep_max(l), th.minus_tie(l), p);
  }
  return std::min(1.0, sum_exp(logs));
}

// Arc stay probability: the neighbor count is z(N-2) where z is the number of
// positive endpoints among two sites drawn from the urn.
double arc_stay(int i, int j, const ModelParams& p, bool plus) {
  const int n = p.n;
  const int arcs = p.arc_count();
  const Thresholds th({i, j}, p);
  const int marked = plus ? j - 1 : j;
  std::vector<double> logs;
  for (int z = 0; z <= 2; ++z) {
    const double outer = log_hyper(z, 2, n, i);
    if (outer == kNegInf) continue;
    const int m = z * (n - 2);
    if (plus)
      add_tail(logs, outer, m, arcs - 1, marked, th.plus_keep_min(m), m, th.plus_tie(m), p);
    else
      add_tail(logs, outer, m, arcs - 1, marked, 0, th.minus_keep_max(m), th.minus_tie(m), p);
  }
  return std::min(1.0, sum_exp(logs));
}

void check_args(int i, int j, const ModelParams& p) {
  require_frozen(p);
  check_state({i, j}, p.n);
}

}  // namespace

double log_binomial(int n, int k) {
  if (n < 0) throw DomainError("log_binomial needs n >= 0");
  if (k < 0 || k > n) return kNegInf;
  if (k == 0 || k == n) return 0.0;
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double p_plus_plus(int i, int j, const ModelParams& params) {
  check_args(i, j, params);
  if (i < 1) throw DomainError("P++ needs a +1 site (i >= 1)");
  return site_stay(i, j, params, true);
}

double p_minus_minus(int i, int j, const ModelParams& params) {
  check_args(i, j, params);
  if (i > params.n - 1) throw DomainError("P-- needs a -1 site (i <= N-1)");
  return site_stay(i, j, params, false);
}

double q_plus_plus(int i, int j, const ModelParams& params) {
  check_args(i, j, params);
  if (j < 1) throw DomainError("Q++ needs a +1 arc (j >= 1)");
  return arc_stay(i, j, params, true);
}

double q_minus_minus(int i, int j, const ModelParams& params) {
  check_args(i, j, params);
  if (j > params.arc_count() - 1) throw DomainError("Q-- needs a -1 arc (j <= C(N,2)-1)");
  return arc_stay(i, j, params, false);
}

StayProbabilities stay_probabilities(const MacroState& s, const ModelParams& params) {
  check_args(s.i, s.j, params);
  StayProbabilities out;
  if (s.i >= 1) out.site_plus = site_stay(s.i, s.j, params, true);
  if (s.i <= params.n - 1) out.site_minus = site_stay(s.i, s.j, params, false);
  if (s.j >= 1) out.arc_plus = arc_stay(s.i, s.j, params, true);
  if (s.j <= params.arc_count() - 1) out.arc_minus = arc_stay(s.i, s.j, params, false);
  return out;
}

std::vector<std::pair<MacroState, double>> StepDistribution::entries() const {
  std::vector<std::pair<MacroState, double>> out;
  const auto add = [&out](MacroState s, double p) {
    if (p > 0.0) out.emplace_back(s, p);
  };
  add({from.i + 1, from.j}, up_site);
  add({from.i - 1, from.j}, down_site);
  add({from.i, from.j + 1}, up_arc);
  add({from.i, from.j - 1}, down_arc);
  add(from, hold);
  return out;
}

StepDistribution macro_step_distribution(const MacroState& s, const ModelParams& params) {
  const StayProbabilities st = stay_probabilities(s, params);
  const int n = params.n;
  const int arcs = params.arc_count();
  const double k = static_cast<double>(n) * (n + 1);
  StepDistribution d;
  d.from = s;
  d.up_site = 2.0 * (n - s.i) / k * (1.0 - st.site_minus);
  d.down_site = 2.0 * s.i / k * (1.0 - st.site_plus);
  d.up_arc = 2.0 * (arcs - s.j) / k * (1.0 - st.arc_minus);
  d.down_arc = 2.0 * s.j / k * (1.0 - st.arc_plus);
  d.hold = 2.0 *
           ((n - s.i) * st.site_minus + s.i * st.site_plus + (arcs - s.j) * st.arc_minus +
            s.j * st.arc_plus) /
           k;
  return d;
}

bool is_trapping(const MacroState& s, const ModelParams& params) {
  return macro_step_distribution(s, params).hold == 1.0;
}

std::vector<MacroState> simulate_macro_chain(const MacroState& start, const ModelParams& params,
                                             long steps, Rng& rng) {
  require_frozen(params);
  check_state(start, params.n);
  if (steps < 0) throw DomainError("steps must be non-negative");
  const int width = params.n + 1;
  std::vector<std::optional<std::array<double, 4>>> cumulative(
      static_cast<std::size_t>(params.state_count()));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<MacroState> path;
  path.reserve(static_cast<std::size_t>(steps));
  MacroState cur = start;
  for (long t = 0; t < steps; ++t) {
    auto& slot = cumulative[static_cast<std::size_t>(cur.j) * width + cur.i];
    if (!slot) {
      const StepDistribution d = macro_step_distribution(cur, params);
      slot = std::array<double, 4>{d.up_site, d.up_site + d.down_site,
                                   d.up_site + d.down_site + d.up_arc,
                                   d.up_site + d.down_site + d.up_arc + d.down_arc};
    }
    const double u = unit(rng);
    const auto& c = *slot;
    if (u < c[0])
      ++cur.i;
    else if (u < c[1])
      --cur.i;
    else if (u < c[2])
      ++cur.j;
    else if (u < c[3])
      --cur.j;
    path.push_back(cur);
  }
  return path;
}

}  // namespace spinmarket
