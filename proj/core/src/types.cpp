#include "spinmarket/types.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numeric>

namespace spinmarket {

__extension__ typedef __int128 i128;

namespace {

Coupling reduced(std::int64_t num, std::int64_t den) {
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return {num, den};
}

bool parse_int(std::string_view text, std::int64_t& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

Coupling Coupling::parse(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  if (text.empty()) throw DomainError("empty coupling value");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::int64_t p = 0, q = 0;
    if (!parse_int(text.substr(0, slash), p) || !parse_int(text.substr(slash + 1), q) ||
        q == 0)
      throw DomainError("malformed rational coupling: " + std::string(text));
    return reduced(p, q);
  }

  // Decimal literal, read digit by digit so that "0.1" is exactly 1/10.
  std::string_view body = text;
  bool negative = false;
  if (body.front() == '+' || body.front() == '-') {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  std::int64_t exponent = 0;
  if (auto e = body.find_first_of("eE"); e != std::string_view::npos) {
    if (!parse_int(body.substr(e + 1), exponent))
      throw DomainError("malformed coupling exponent: " + std::string(text));
    body = body.substr(0, e);
  }
  std::string digits;
  bool seen_point = false;
  for (char c : body) {
    if (c == '.' && !seen_point) {
      seen_point = true;
    } else if (c >= '0' && c <= '9') {
      digits.push_back(c);
      if (seen_point) --exponent;
    } else {
      throw DomainError("malformed coupling: " + std::string(text));
    }
  }
  if (digits.empty()) throw DomainError("malformed coupling: " + std::string(text));
  while (digits.size() > 1 && digits.front() == '0') digits.erase(digits.begin());

  if (digits.size() + static_cast<std::size_t>(std::max<std::int64_t>(exponent, 0)) > 17 ||
      exponent < -17)
    return from_double(std::strtod(std::string(text).c_str(), nullptr));

  std::int64_t num = std::stoll(digits);
  std::int64_t den = 1;
  for (; exponent > 0; --exponent) num *= 10;
  for (; exponent < 0; ++exponent) den *= 10;
  return reduced(negative ? -num : num, den);
}

Coupling Coupling::from_double(double value) {
  if (!std::isfinite(value)) throw DomainError("coupling must be finite");
  constexpr std::int64_t kMaxDen = 1'000'000'000;
  const bool negative = value < 0;
  double x = std::fabs(value);
  if (x > 9e15) throw DomainError("coupling too large");

  // Continued-fraction convergents h/k.
  std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double rem = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a_d = std::floor(rem);
    const auto a = static_cast<std::int64_t>(a_d);
    const std::int64_t h2 = a * h1 + h0;
    const std::int64_t k2 = a * k1 + k0;
    if (k2 > kMaxDen) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    if (std::fabs(static_cast<double>(h1) / static_cast<double>(k1) - x) <=
        1e-15 * std::max(1.0, x))
      break;
    const double frac = rem - a_d;
    if (frac < 1e-300) break;
    rem = 1.0 / frac;
  }
  return reduced(negative ? -h1 : h1, k1);
}

std::string Coupling::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

ModelParams ModelParams::frozen(int n, double alpha, TiePolicy tie) {
  ModelParams p;
  p.n = n;
  p.alpha = Coupling::from_double(alpha);
  p.tie_policy = tie;
  p.validate();
  return p;
}

void ModelParams::validate() const {
  if (n < 2) throw DomainError("N must be at least 2");
  if (alpha.den <= 0 || alpha.num < 0) throw DomainError("alpha must be >= 0");
  if (beta && !(*beta > 0.0)) throw DomainError("beta must be positive");
}

std::string to_string(const MacroState& s) {
  return "(" + std::to_string(s.i) + "," + std::to_string(s.j) + ")";
}

bool in_grid(const MacroState& s, int n) {
  return s.i >= 0 && s.i <= n && s.j >= 0 && s.j <= n * (n - 1) / 2;
}

void check_state(const MacroState& s, int n) {
  if (!in_grid(s, n))
    throw DomainError("state " + to_string(s) + " outside grid for N=" + std::to_string(n));
}

double global_imbalance(const MacroState& s, int n) {
  check_state(s, n);
  const double k = static_cast<double>(n) * (n + 1);
  return 0.5 * std::fabs(4.0 * (s.i + s.j) / k - 1.0);
}

int potential_sign(int local_sum, int spin, const MacroState& state,
                   const ModelParams& params) {
  // h = S - (a/b) s |4(i+j) - K| / (2K), scaled by 2Kb > 0.
  const i128 k = static_cast<i128>(params.n) * (params.n + 1);
  const i128 d = std::abs(4 * (state.i + state.j) - static_cast<int>(k));
  const i128 scaled = 2 * k * params.alpha.den * local_sum -
                          static_cast<i128>(params.alpha.num) * spin * d;
  return (scaled > 0) - (scaled < 0);
}

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

}  // namespace spinmarket
