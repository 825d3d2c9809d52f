#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spinmarket/types.hpp"

namespace spinmarket {

/// An unordered site pair, stored with x < y.
struct Arc {
  int x = 0;
  int y = 1;
  friend auto operator<=>(const Arc&, const Arc&) = default;
};

/// Lexicographic position of (x,y) among all pairs of {0..n-1}; order of x,y is irrelevant.
int arc_index(int x, int y, int n);
Arc arc_at(int index, int n);

/// Site spins and arc spins of the complete graph on n sites.
///
/// Arcs are stored in lexicographic pair order: (0,1), (0,2), ..., (n-2,n-1).
class MicroConfig {
 public:
  /// All spins -1.
  explicit MicroConfig(int n);
  MicroConfig(std::vector<std::int8_t> sites, std::vector<std::int8_t> arcs);

  /// First i sites and first j arcs set to +1, the rest -1.
  static MicroConfig with_counts(int n, const MacroState& counts);

  int n() const { return n_; }
  int site(int x) const { return sites_.at(x); }
  int arc(int x, int y) const { return arcs_.at(arc_index(x, y, n_)); }
  int arc(const Arc& a) const { return arc(a.x, a.y); }
  void set_site(int x, int spin);
  void set_arc(int x, int y, int spin);

  const std::vector<std::int8_t>& sites() const { return sites_; }
  const std::vector<std::int8_t>& arcs() const { return arcs_; }

  friend bool operator==(const MicroConfig&, const MicroConfig&) = default;

 private:
  int n_;
  std::vector<std::int8_t> sites_;
  std::vector<std::int8_t> arcs_;
};

MacroState macro_counts(const MicroConfig& config);

/// Two lines of space-separated +-1 values: sites, then arcs in lexicographic order.
std::string to_text(const MicroConfig& config);
MicroConfig parse_micro_config(const std::string& text);

/// Draws without replacement `draws` balls from an urn of `population`
/// holding `successes` marked balls and returns the marked count.
int sample_hypergeometric(int draws, int population, int successes, Rng& rng);

/// Random site neighborhood of y: a uniform subset of the other sites whose
/// size is hypergeometric(N-1 draws, C(N,2) population, A+ successes).
std::vector<int> sample_site_neighborhood(const MicroConfig& config, int y, Rng& rng);

enum class StarCase { kNone, kStarX, kStarY, kBoth };

struct ArcNeighborhood {
  StarCase star = StarCase::kNone;
  std::vector<Arc> members;
};

/// Random arc neighborhood of (x,y): the two endpoints are drawn from an urn
/// of N sites with S+ marked; each marked endpoint contributes its star
/// minus the arc itself.
ArcNeighborhood sample_arc_neighborhood(const MicroConfig& config, const Arc& arc, Rng& rng);

/// sum of nbhd spins - alpha * spin(x) * G(state)
double site_potential(const MicroConfig& config, int x, const std::vector<int>& nbhd,
                      double alpha, const MacroState& state);
double arc_potential(const MicroConfig& config, const Arc& arc, const std::vector<Arc>& nbhd,
                     double alpha, const MacroState& state);

/// Which element an update touched and what it became.
struct UpdateRecord {
  bool is_site = true;
  int element = 0;  // site index or arc index
  int old_spin = 0;
  int new_spin = 0;
};

/// One epoch of the embedded jump chain, applied in place.
UpdateRecord heat_bath_step(MicroConfig& config, const ModelParams& params, Rng& rng);

/// Value-semantics form of heat_bath_step.
MicroConfig heat_bath_update(const MicroConfig& config, const ModelParams& params, Rng& rng);

/// Macro counts after each of `steps` epochs (initial state excluded).
std::vector<MacroState> run_micro(MicroConfig config, const ModelParams& params, long steps,
                                  Rng& rng);

}  // namespace spinmarket
