#include "spinmarket/oracle.hpp"

#include <cstdlib>

namespace spinmarket {

namespace {

using boost::multiprecision::cpp_int;

cpp_int binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  cpp_int r = 1;
  for (int t = 1; t <= k; ++t) {
    r *= n - k + t;
    r /= t;
  }
  return r;
}

Rational hyper(int k, int m, int pop, int marked) {
  const cpp_int den = binomial(pop, m);
  if (den == 0) return 0;
  return Rational(binomial(marked, k) * binomial(pop - marked, m - k), den);
}

// Stay weight for a chosen element of sign `spin` whose m neighbors include k positives.
Rational stay_weight(int k, int m, int spin, const Rational& alpha_g, TiePolicy tie) {
  const Rational h = Rational(2 * k - m) - alpha_g * spin;
  if (h == 0) return tie == TiePolicy::kHeatBathHalf ? Rational(1, 2) : Rational(0);
  return (h > 0) == (spin > 0) ? Rational(1) : Rational(0);
}

}  // namespace

Rational brute_force_flip_oracle(int i, int j, const ModelParams& params, ElementKind kind) {
  params.validate();
  if (params.n > 6) throw DomainError("brute-force oracle refuses N > 6");
  if (!params.is_frozen()) throw DomainError("oracle covers the frozen limit only");
  check_state({i, j}, params.n);
  const int n = params.n;
  const int arcs = params.arc_count();
  const int k_all = n * (n + 1);
  const Rational alpha(params.alpha.num, params.alpha.den);
  const Rational alpha_g = alpha * Rational(std::abs(4 * (i + j) - k_all), 2 * k_all);

  Rational total = 0;
  switch (kind) {
    case ElementKind::kSitePlus:
    case ElementKind::kSiteMinus: {
      const bool plus = kind == ElementKind::kSitePlus;
      if (plus ? i < 1 : i > n - 1) throw DomainError("no site of the requested sign");
      const int others_plus = plus ? i - 1 : i;
      for (int l = 0; l <= n - 1; ++l) {
        const Rational w = hyper(l, n - 1, arcs, j);
        if (w == 0) continue;
        for (int k = 0; k <= l; ++k) {
          const Rational u = hyper(k, l, n - 1, others_plus);
          if (u == 0) continue;
          total += w * u * stay_weight(k, l, plus ? 1 : -1, alpha_g, params.tie_policy);
        }
      }
      break;
    }
    case ElementKind::kArcPlus:
    case ElementKind::kArcMinus: {
      const bool plus = kind == ElementKind::kArcPlus;
      if (plus ? j < 1 : j > arcs - 1) throw DomainError("no arc of the requested sign");
      const int others_plus = plus ? j - 1 : j;
      for (int z = 0; z <= 2; ++z) {
        const Rational w = hyper(z, 2, n, i);
        if (w == 0) continue;
        const int m = z * (n - 2);
        for (int k = 0; k <= m; ++k) {
          const Rational u = hyper(k, m, arcs - 1, others_plus);
          if (u == 0) continue;
          total += w * u * stay_weight(k, m, plus ? 1 : -1, alpha_g, params.tie_policy);
        }
      }
      break;
    }
  }
  return total;
}

ExactStepDistribution exact_step_distribution(const MacroState& s, const ModelParams& params) {
  check_state(s, params.n);
  const int n = params.n;
  const int arcs = params.arc_count();
  const auto stay = [&](bool exists, ElementKind kind) -> Rational {
    return exists ? brute_force_flip_oracle(s.i, s.j, params, kind) : Rational(0);
  };
  const Rational pp = stay(s.i >= 1, ElementKind::kSitePlus);
  const Rational pm = stay(s.i <= n - 1, ElementKind::kSiteMinus);
  const Rational qp = stay(s.j >= 1, ElementKind::kArcPlus);
  const Rational qm = stay(s.j <= arcs - 1, ElementKind::kArcMinus);
  const Rational k(n * (n + 1));
  ExactStepDistribution d;
  d.from = s;
  d.up_site = Rational(2 * (n - s.i)) / k * (1 - pm);
  d.down_site = Rational(2 * s.i) / k * (1 - pp);
  d.up_arc = Rational(2 * (arcs - s.j)) / k * (1 - qm);
  d.down_arc = Rational(2 * s.j) / k * (1 - qp);
  d.hold = 2 * ((n - s.i) * pm + s.i * pp + (arcs - s.j) * qm + s.j * qp) / k;
  return d;
}

Rational parse_rational(const std::string& text) {
  const auto integer = [&](const std::string& part) {
    const bool digits = !part.empty() && part.find_first_not_of("0123456789", part[0] == '-') ==
                                             std::string::npos && part != "-";
    if (!digits) throw DomainError("malformed rational: " + text);
    return cpp_int(part);
  };
  const auto slash = text.find('/');
  if (slash == std::string::npos) return Rational(integer(text));
  const cpp_int den = integer(text.substr(slash + 1));
  if (den == 0) throw DomainError("zero denominator: " + text);
  return Rational(integer(text.substr(0, slash)), den);
}

}  // namespace spinmarket
