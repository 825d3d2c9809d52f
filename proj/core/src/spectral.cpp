#include "spinmarket/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <arpack/arpack.hpp>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/strong_components.hpp>

#include "spinmarket/kernel.hpp"

namespace spinmarket {

namespace {

using Complex = std::complex<double>;

bool by_modulus(const Complex& a, const Complex& b) {
  const double ma = std::abs(a), mb = std::abs(b);
  if (ma != mb) return ma > mb;
  if (a.real() != b.real()) return a.real() > b.real();
  return a.imag() > b.imag();
}

Eigen::VectorXd seeded_vector(int dim, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  Eigen::VectorXd v(dim);
  for (int k = 0; k < dim; ++k) v[k] = u(rng);
  return v.normalized();
}

// Strongly connected components with no outgoing edge.
std::vector<std::vector<int>> closed_classes(const TransitionMatrix& m) {
  using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS>;
  const int dim = m.dim();
  Graph g(dim);
  const auto& sp = m.sparse();
  for (int r = 0; r < dim; ++r)
    for (TransitionMatrix::Sparse::InnerIterator it(sp, r); it; ++it)
      if (it.value() > 0.0 && it.col() != r) boost::add_edge(r, static_cast<int>(it.col()), g);

  std::vector<int> comp(dim);
  const int count = boost::strong_components(g, comp.data());
  std::vector<bool> closed(count, true);
  for (int r = 0; r < dim; ++r)
    for (TransitionMatrix::Sparse::InnerIterator it(sp, r); it; ++it)
      if (it.value() > 0.0 && comp[it.col()] != comp[r]) closed[comp[r]] = false;

  std::vector<std::vector<int>> members(count);
  for (int r = 0; r < dim; ++r)
    if (closed[comp[r]]) members[comp[r]].push_back(r);
  std::vector<std::vector<int>> out;
  for (auto& c : members)
    if (!c.empty()) out.push_back(std::move(c));
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

double stationary_residual(const TransitionMatrix& m, const Eigen::VectorXd& mu) {
  const Eigen::VectorXd next = m.sparse().transpose() * mu;
  return (next - mu).cwiseAbs().maxCoeff();
}

std::vector<Complex> dense_eigenvalues(const TransitionMatrix& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m.dense(), false);
  if (es.info() != Eigen::Success) throw NumericError("dense eigensolve failed", 0.0);
  std::vector<Complex> out(es.eigenvalues().data(),
                           es.eigenvalues().data() + es.eigenvalues().size());
  return out;
}

// Largest-modulus eigenvalues by ARPACK's implicitly restarted Arnoldi.
std::vector<Complex> arpack_eigenvalues(const TransitionMatrix& m, int count,
                                        const SpectrumOptions& opts) {
  const a_int n = m.dim();
  if (count > n - 2) return dense_eigenvalues(m);
  const a_int nev = count;
  a_int ncv = opts.krylov_dim > 0 ? opts.krylov_dim : std::max<a_int>(2 * nev + 1, 20);
  ncv = std::clamp<a_int>(ncv, nev + 2, n);
  const a_int lworkl = 3 * ncv * ncv + 6 * ncv;
  const Eigen::VectorXd seed = seeded_vector(static_cast<int>(n), 0x5eed);
  std::vector<double> resid(seed.data(), seed.data() + n), v(n * ncv), workd(3 * n),
      workl(lworkl);
  a_int iparam[11] = {1, 0, std::max<a_int>(300, opts.max_restarts), 1, 0, 0, 1, 0, 0, 0, 0};
  a_int ipntr[14] = {};
  a_int ido = 0, info = 1;  // info = 1: start from resid
  const auto& a = m.sparse();
  while (true) {
    arpack::naupd(ido, arpack::bmat::identity, n, arpack::which::largest_magnitude, nev,
                  opts.tolerance, resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(),
                  workl.data(), lworkl, info);
    if (ido != 1 && ido != -1) break;
    Eigen::Map<const Eigen::VectorXd> x(&workd[ipntr[0] - 1], n);
    Eigen::Map<Eigen::VectorXd> y(&workd[ipntr[1] - 1], n);
    y = a * x;
  }
  if (info == 1) throw NumericError("Arnoldi iteration hit its restart limit", opts.tolerance);
  if (info != 0) throw NumericError("ARPACK dnaupd failed, info " + std::to_string(info), 0.0);

  std::vector<a_int> select(ncv);
  std::vector<double> dr(nev + 1), di(nev + 1), workev(3 * ncv);
  arpack::neupd(0, arpack::howmny::ritz_vectors, select.data(), dr.data(), di.data(), v.data(), n,
                0.0, 0.0, workev.data(), arpack::bmat::identity, n,
                arpack::which::largest_magnitude, nev, opts.tolerance, resid.data(), ncv, v.data(),
                n, iparam, ipntr, workd.data(), workl.data(), lworkl, info);
  if (info != 0) throw NumericError("ARPACK dneupd failed, info " + std::to_string(info), 0.0);
  std::vector<Complex> out;
  for (a_int k = 0; k < std::min<a_int>(iparam[4], nev + 1); ++k) out.emplace_back(dr[k], di[k]);
  if (static_cast<a_int>(out.size()) < nev)
    throw NumericError("ARPACK converged on too few eigenvalues", opts.tolerance);
  return out;
}

}  // namespace

int state_count(int n) { return (n + 1) * (n * (n - 1) / 2 + 1); }

int state_index(const MacroState& s, int n) {
  check_state(s, n);
  return s.j * (n + 1) + s.i;
}

MacroState index_state(int k, int n) {
  if (k < 0 || k >= state_count(n)) throw DomainError("flat index out of range");
  return {k % (n + 1), k / (n + 1)};
}

TransitionMatrix::TransitionMatrix(int n, Sparse entries) : n_(n), entries_(std::move(entries)) {
  if (entries_.rows() != state_count(n) || entries_.cols() != state_count(n))
    throw DomainError("matrix dimension does not match N");
  entries_.makeCompressed();
}

TransitionMatrix assemble_matrix(const ModelParams& params) {
  params.validate();
  const int n = params.n;
  const int dim = state_count(n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(dim) * 5);
  for (int r = 0; r < dim; ++r) {
    const StepDistribution d = macro_step_distribution(index_state(r, n), params);
    for (const auto& [s, p] : d.entries()) trip.emplace_back(r, state_index(s, n), p);
  }
  TransitionMatrix::Sparse sp(dim, dim);
  sp.setFromTriplets(trip.begin(), trip.end());
  return TransitionMatrix(n, std::move(sp));
}

MeasureGrid MeasureGrid::point_mass(int n, const MacroState& s) {
  MeasureGrid g{n, Kind::kProbability, std::vector<double>(state_count(n), 0.0)};
  g.at(s) = 1.0;
  return g;
}

MeasureGrid MeasureGrid::uniform(int n) {
  const int dim = state_count(n);
  return {n, Kind::kProbability, std::vector<double>(dim, 1.0 / dim)};
}

MacroState MeasureGrid::argmax_abs() const {
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (std::fabs(values[k]) > std::fabs(values[best])) best = k;
  return index_state(static_cast<int>(best), n);
}

StationaryResult stationary_measure(const TransitionMatrix& m) {
  const int dim = m.dim();
  const auto classes = closed_classes(m);
  StationaryResult result;
  result.closed_classes = static_cast<int>(classes.size());

  // With one closed class the balance equations have a one-dimensional
  // solution space on the full grid; otherwise restrict to the first class.
  std::vector<int> states;
  if (classes.size() == 1) {
    states.resize(dim);
    for (int k = 0; k < dim; ++k) states[k] = k;
  } else {
    states = classes.front();
  }
  const int sub = static_cast<int>(states.size());
  std::vector<int> local(dim, -1);
  for (int k = 0; k < sub; ++k) local[states[k]] = k;

  // A = (I - P)^T with its last row replaced by ones.
  std::vector<Eigen::Triplet<double>> trip;
  const auto& sp = m.sparse();
  for (int a = 0; a < sub; ++a) {
    const int r = states[a];
    if (a != sub - 1) trip.emplace_back(a, a, 1.0);
    for (TransitionMatrix::Sparse::InnerIterator it(sp, r); it; ++it) {
      const int b = local[it.col()];
      if (b < 0 || b == sub - 1) continue;
      trip.emplace_back(b, a, -it.value());
    }
    trip.emplace_back(sub - 1, a, 1.0);
  }
  Eigen::SparseMatrix<double> a(sub, sub);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw NumericError("balance-equation factorization failed", 1.0);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sub);
  rhs[sub - 1] = 1.0;

  Eigen::VectorXd x = lu.solve(rhs);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(dim);
  const auto embed = [&] {
    mu.setZero();
    for (int k = 0; k < sub; ++k) mu[states[k]] = std::max(0.0, x[k]);
    mu /= mu.sum();
  };
  embed();
  result.residual = stationary_residual(m, mu);
  for (int refine = 0; refine < 3 && result.residual > 1e-12; ++refine) {
    x += lu.solve(rhs - a * x);
    embed();
    result.residual = stationary_residual(m, mu);
  }
  if (!(result.residual <= 1e-10))
    throw NumericError("stationary solve residual above 1e-10", result.residual);
  result.measure = {m.sites(), MeasureGrid::Kind::kProbability,
                    std::vector<double>(mu.data(), mu.data() + dim)};
  return result;
}

std::vector<std::complex<double>> eigenvalues(const TransitionMatrix& m, int count,
                                              const SpectrumOptions& opts) {
  if (count < 1 || count > m.dim()) throw DomainError("eigenvalue count out of range");
  std::vector<Complex> vals = m.dim() <= opts.dense_limit ? dense_eigenvalues(m)
                                                          : arpack_eigenvalues(m, count, opts);
  std::sort(vals.begin(), vals.end(), by_modulus);
  vals.resize(std::min<std::size_t>(vals.size(), count));
  return vals;
}

std::vector<double> spectrum(const TransitionMatrix& m, int count, const SpectrumOptions& opts) {
  std::vector<double> out;
  for (const Complex& z : eigenvalues(m, count, opts)) out.push_back(std::abs(z));
  return out;
}

double spectral_gap(const TransitionMatrix& m, const SpectrumOptions& opts) {
  if (m.dim() < 2) return 0.0;
  const auto moduli = spectrum(m, 2, opts);
  return std::max(0.0, 1.0 - moduli[1]);
}

SecondVector second_eigenvector(const TransitionMatrix& m, const SpectrumOptions& opts) {
  const int dim = m.dim();
  if (dim < 2) throw DomainError("second eigenvector needs at least two states");
  const auto vals = eigenvalues(m, std::min(dim, 3), opts);
  SecondVector out;
  out.lambda2 = vals[1];
  out.simple = vals.size() < 3 || std::abs(vals[2]) < std::abs(vals[1]) * (1.0 - 1e-9);
  if (std::abs(std::abs(vals[1]) - std::abs(vals[0])) < 1e-12) out.simple = false;

  // Inverse iteration on M^T - sigma I, sigma slightly off lambda_2.
  const Complex sigma = out.lambda2 + 1e-10 * std::max(1.0, std::abs(out.lambda2));
  Eigen::SparseMatrix<Complex> b = m.sparse().transpose().cast<Complex>();
  for (int k = 0; k < dim; ++k) b.coeffRef(k, k) -= sigma;
  b.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu;
  lu.compute(b);
  if (lu.info() != Eigen::Success) throw NumericError("inverse-iteration factorization failed", 1.0);

  const Eigen::SparseMatrix<double> mt = m.sparse().transpose();
  Eigen::VectorXcd v = seeded_vector(dim, 0x2b).cast<Complex>();
  for (int iter = 0; iter < 50; ++iter) {
    v = lu.solve(v);
    v /= v.cwiseAbs().maxCoeff();
    const Eigen::VectorXcd r = mt.cast<Complex>() * v - out.lambda2 * v;
    out.residual = r.cwiseAbs().maxCoeff();
    if (out.residual < 1e-13) break;
  }

  Eigen::Index top = 0;
  v.cwiseAbs().maxCoeff(&top);
  v *= std::conj(v[top]) / std::abs(v[top]);
  v /= std::abs(v[top]);
  out.vector = {m.sites(), MeasureGrid::Kind::kSigned, std::vector<double>(dim)};
  for (int k = 0; k < dim; ++k) out.vector.values[k] = v[k].real();
  return out;
}

std::optional<long long> mixing_half_life(double lambda2) {
  if (!(lambda2 > 0.0)) throw DomainError("half-life needs lambda2 > 0");
  if (lambda2 >= 1.0) return std::nullopt;
  const double ratio = std::log(2.0) / -std::log1p(lambda2 - 1.0);
  const double nearest = std::round(ratio);
  if (std::fabs(ratio - nearest) <= 1e-12 * ratio) return static_cast<long long>(nearest);
  return static_cast<long long>(std::ceil(ratio));
}

MeasureGrid propagate_measure(const TransitionMatrix& m, const MeasureGrid& mu0, long n) {
  if (mu0.n != m.sites() || static_cast<int>(mu0.values.size()) != m.dim())
    throw DomainError("measure does not match matrix");
  if (mu0.kind != MeasureGrid::Kind::kProbability) throw DomainError("need a probability measure");
  if (n < 0) throw DomainError("step count must be non-negative");
  const Eigen::SparseMatrix<double> mt = m.sparse().transpose();
  Eigen::VectorXd mu = Eigen::Map<const Eigen::VectorXd>(mu0.values.data(), m.dim());
  for (long s = 0; s < n; ++s) mu = mt * mu;
  MeasureGrid out = mu0;
  out.values.assign(mu.data(), mu.data() + m.dim());
  return out;
}

double variation_distance(const MeasureGrid& mu, const MeasureGrid& nu) {
  if (mu.values.size() != nu.values.size()) throw DomainError("measure dimensions differ");
  double d = 0.0;
  for (std::size_t k = 0; k < mu.values.size(); ++k)
    d = std::max(d, std::fabs(mu.values[k] - nu.values[k]));
  return d;
}

SpectralSummary analyze(const TransitionMatrix& m, int count, const SpectrumOptions& opts) {
  SpectralSummary s;
  if (count < 0) count = m.dim() <= opts.dense_limit ? m.dim() : std::min(m.dim(), 10);
  s.eigenvalue_moduli = spectrum(m, std::max(count, std::min(2, m.dim())), opts);
  s.lambda2 = s.eigenvalue_moduli.size() > 1 ? s.eigenvalue_moduli[1] : 0.0;
  s.gap = std::max(0.0, 1.0 - s.lambda2);
  s.numerically_non_ergodic = s.gap < 1e-12;
  s.stationary = stationary_measure(m);
  if (m.dim() >= 2) s.second = second_eigenvector(m, opts);
  return s;
}

double ridge_bottleneck(const MeasureGrid& field, const MacroState& from, const MacroState& to) {
  const int n = field.n;
  const int dim = static_cast<int>(field.values.size());
  std::vector<double> best(dim, -1.0);
  using Item = std::pair<double, int>;
  std::priority_queue<Item> queue;
  const int start = state_index(from, n);
  const int goal = state_index(to, n);
  best[start] = std::fabs(field.values[start]);
  queue.emplace(best[start], start);
  while (!queue.empty()) {
    const auto [width, k] = queue.top();
    queue.pop();
    if (width < best[k]) continue;
    if (k == goal) return width;
    const MacroState s = index_state(k, n);
    const MacroState nbrs[4] = {{s.i + 1, s.j}, {s.i - 1, s.j}, {s.i, s.j + 1}, {s.i, s.j - 1}};
    for (const MacroState& t : nbrs) {
      if (!in_grid(t, n)) continue;
      const int q = state_index(t, n);
      const double w = std::min(width, std::fabs(field.values[q]));
      if (w > best[q]) {
        best[q] = w;
        queue.emplace(w, q);
      }
    }
  }
  return best[goal];
}

}  // namespace spinmarket
