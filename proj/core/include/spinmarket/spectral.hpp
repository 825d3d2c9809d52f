#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "spinmarket/types.hpp"

namespace spinmarket {

/// Flat index j*(N+1) + i of a macro state.
int state_index(const MacroState& s, int n);
MacroState index_state(int k, int n);
/// (N+1)(C(N,2)+1)
int state_count(int n);

/// Row-stochastic matrix over macro states, rows and columns in flat order.
class TransitionMatrix {
 public:
  using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  TransitionMatrix(int n, Sparse entries);

  int sites() const { return n_; }
  int dim() const { return static_cast<int>(entries_.rows()); }
  const Sparse& sparse() const { return entries_; }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(entries_); }
  double at(int row, int col) const { return entries_.coeff(row, col); }

 private:
  int n_;
  Sparse entries_;
};

TransitionMatrix assemble_matrix(const ModelParams& params);

/// Values on the macro grid in flat order.
struct MeasureGrid {
  enum class Kind { kProbability, kSigned };

  int n = 0;
  Kind kind = Kind::kProbability;
  std::vector<double> values;

  static MeasureGrid point_mass(int n, const MacroState& s);
  static MeasureGrid uniform(int n);

  double at(const MacroState& s) const { return values.at(state_index(s, n)); }
  double& at(const MacroState& s) { return values.at(state_index(s, n)); }
  MacroState argmax_abs() const;
};

struct StationaryResult {
  MeasureGrid measure;
  double residual = 0.0;    // sup |mu M - mu|
  int closed_classes = 1;   // > 1 means the invariant measure is not unique
  bool multiple() const { return closed_classes > 1; }
};

/// Invariant probability measure by a sparse LU solve of the balance
/// equations with the normalization replacing one equation. When several
/// closed classes exist, the one holding the lowest flat index is used.
StationaryResult stationary_measure(const TransitionMatrix& m);

struct SpectrumOptions {
  /// Dense eigensolve up to this dimension, ARPACK (implicitly restarted Arnoldi) above it.
  int dense_limit = 2000;
  int krylov_dim = 0;       // ARPACK ncv; 0 picks max(2*count+1, 20)
  int max_restarts = 300;   // ARPACK iteration limit
  double tolerance = 1e-10;
};

/// The `count` eigenvalues of largest modulus, sorted by modulus descending
/// (ties broken by real part, then imaginary part).
std::vector<std::complex<double>> eigenvalues(const TransitionMatrix& m, int count,
                                              const SpectrumOptions& opts = {});
/// Moduli of eigenvalues(m, count).
std::vector<double> spectrum(const TransitionMatrix& m, int count,
                             const SpectrumOptions& opts = {});
/// 1 - |lambda_2|
double spectral_gap(const TransitionMatrix& m, const SpectrumOptions& opts = {});

struct SecondVector {
  MeasureGrid vector;               // signed, sup-norm 1, largest-|entry| positive
  std::complex<double> lambda2;
  double residual = 0.0;            // sup |v M - lambda2 v| on the complex eigenvector
  bool simple = true;               // false when |lambda_2| is shared (e.g. a complex pair)
};

/// Left eigenvector of the second eigenvalue by shifted inverse iteration.
SecondVector second_eigenvector(const TransitionMatrix& m, const SpectrumOptions& opts = {});

/// ceil(ln 2 / -ln lambda2); empty when lambda2 >= 1. Throws for lambda2 <= 0.
std::optional<long long> mixing_half_life(double lambda2);

/// mu0 M^n
MeasureGrid propagate_measure(const TransitionMatrix& m, const MeasureGrid& mu0, long n);

/// sup_k |mu_k - nu_k|
double variation_distance(const MeasureGrid& mu, const MeasureGrid& nu);

struct SpectralSummary {
  std::vector<double> eigenvalue_moduli;
  double lambda2 = 0.0;
  double gap = 0.0;
  bool numerically_non_ergodic = false;  // gap < 1e-12
  StationaryResult stationary;
  SecondVector second;
};

SpectralSummary analyze(const TransitionMatrix& m, int count = -1,
                        const SpectrumOptions& opts = {});

/// Largest value b such that a 4-neighbour grid path from `from` to `to`
/// exists on which every |value| >= b (a widest-path bottleneck).
double ridge_bottleneck(const MeasureGrid& field, const MacroState& from, const MacroState& to);

}  // namespace spinmarket
