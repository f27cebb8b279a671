#include "magfiber/eigensolver.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#ifdef MAGFIBER_HAVE_CHOLMOD
#include <Eigen/CholmodSupport>
#endif

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <string>

#include "magfiber/error.hpp"

namespace magfiber {

namespace {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using SpMat = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;

void apply(const HermitianSparse& H, const Mat& X, Mat& Y) {
  const Eigen::Index n = X.rows();
  Y.resize(n, X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c)
    H.multiply(std::span<const Complex>(X.col(c).data(), static_cast<std::size_t>(n)),
               std::span<Complex>(Y.col(c).data(), static_cast<std::size_t>(n)));
}

double relative_residual(double norm, double value) { return norm / std::max(std::abs(value), 1.0); }

/// Orthonormalize the columns of Q through an eigen-decomposition of the
/// scaled Gram matrix, dropping numerically dependent directions.
void orthonormalize(Mat& Q, Mat* HQ = nullptr) {
  if (Q.cols() == 0) return;
  Eigen::VectorXd scale(Q.cols());
  for (Eigen::Index c = 0; c < Q.cols(); ++c) {
    const double nrm = Q.col(c).norm();
    scale(c) = nrm > 0.0 ? 1.0 / nrm : 0.0;
  }
  const Mat D = scale.cast<Complex>().asDiagonal();
  Mat G = D * (Q.adjoint() * Q) * D;
  G = 0.5 * (G + G.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> es(G);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = std::max(ev.maxCoeff(), 0.0);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = ev.size() - 1; i >= 0; --i)
    if (ev(i) > 1e-13 * top && ev(i) > 0.0) keep.push_back(i);
  Mat T(Q.cols(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    T.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]) / std::sqrt(ev(keep[c]));
  T = D * T;
  Q = (Q * T).eval();
  if (HQ) *HQ = (*HQ * T).eval();
}

void project_out(const Mat& X, Mat& Q) {
  for (int pass = 0; pass < 2; ++pass) Q -= X * (X.adjoint() * Q);
}

SpMat lower_shifted(const HermitianSparse& H, double shift) {
  const int n = H.dim();
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(H.nnz());
  const auto off = H.row_offsets();
  const auto col = H.col_indices();
  const auto val = H.values();
  for (int r = 0; r < n; ++r)
    for (int p = off[r]; p < off[r + 1]; ++p) {
      if (col[p] > r) continue;  // lower triangle only, row r / column col[p]
      Complex v = val[p];
      if (col[p] == r) v -= shift;
      trip.emplace_back(r, col[p], v);
    }
  SpMat A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

#ifdef MAGFIBER_HAVE_CHOLMOD

// Supernodal Cholesky; it stops at the first nonpositive pivot, so success
// doubles as the positive-definiteness test.
class Factorization {
public:
  Factorization(const HermitianSparse& H, double shift) : shift_(shift) {
    solver_.cholmod().print = 0;
    solver_.compute(lower_shifted(H, shift));
    ok_ = solver_.info() == Eigen::Success;
    definite_ = ok_;
  }

  bool ok() const noexcept { return ok_; }
  bool positive_definite() const noexcept { return definite_; }
  double shift() const noexcept { return shift_; }
  Mat solve(const Mat& R) const { return solver_.solve(R); }

private:
  mutable Eigen::CholmodSupernodalLLT<SpMat, Eigen::Lower> solver_;
  double shift_;
  bool ok_ = false;
  bool definite_ = false;
};

#else

class Factorization {
public:
  Factorization(const HermitianSparse& H, double shift) : shift_(shift) {
    solver_.compute(lower_shifted(H, shift));
    ok_ = solver_.info() == Eigen::Success;
    if (ok_) {
      const auto d = solver_.vectorD();
      definite_ = true;
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (!std::isfinite(std::abs(d(i))) || d(i) == Complex(0.0)) ok_ = false;
        // Sylvester inertia: a negative pivot means an eigenvalue below the shift
        if (d(i).real() < 0.0) definite_ = false;
      }
    }
  }

  bool ok() const noexcept { return ok_; }
  bool positive_definite() const noexcept { return ok_ && definite_; }
  double shift() const noexcept { return shift_; }

  Mat solve(const Mat& R) const {
    Mat W(R.rows(), R.cols());
    for (Eigen::Index c = 0; c < R.cols(); ++c) W.col(c) = solver_.solve(Vec(R.col(c)));
    return W;
  }

private:
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> solver_;
  double shift_;
  bool ok_ = false;
  bool definite_ = false;
};

#endif

std::unique_ptr<Factorization> factor_near(const HermitianSparse& H, double shift) {
  // a shift landing exactly on an eigenvalue gives a zero pivot, and the
  // Cholesky backend also refuses shifts above the spectrum bottom; nudge it down
  double s = shift;
  for (int attempt = 0; attempt < 12; ++attempt) {
    auto f = std::make_unique<Factorization>(H, s);
    if (f->ok()) return f;
    s -= 1e-8 * std::max(1.0, std::abs(shift)) * std::pow(10.0, attempt);
  }
  return nullptr;
}

struct RitzState {
  Mat X;
  Mat HX;
  Eigen::VectorXd theta;
};

/// Rayleigh-Ritz on the orthonormal basis S with images HS; keeps the m lowest pairs.
Eigen::MatrixXcd rayleigh_ritz(const Mat& S, const Mat& HS, Eigen::Index m, Eigen::VectorXd& theta) {
  Mat A = S.adjoint() * HS;
  A = 0.5 * (A + A.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  theta = es.eigenvalues().head(m);
  return es.eigenvectors().leftCols(m);
}

void residuals(const RitzState& st, int k, Eigen::VectorXd& norms, Mat& R) {
  R = st.HX - st.X * st.theta.cast<Complex>().asDiagonal();
  norms.resize(st.X.cols());
  for (Eigen::Index c = 0; c < st.X.cols(); ++c) norms(c) = relative_residual(R.col(c).norm(), st.theta(c));
  (void)k;
}

double worst(const Eigen::VectorXd& norms, int k) { return norms.head(k).maxCoeff(); }

// Deterministic ordering inside a degenerate cluster: value first, then the
// index of the first dominant coordinate.
void canonical_order(RitzState& st) {
  const Eigen::Index m = st.X.cols();
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(m));
  std::vector<Eigen::Index> dominant(static_cast<std::size_t>(m));
  for (Eigen::Index c = 0; c < m; ++c) {
    perm[c] = c;
    Eigen::Index idx = 0;
    st.X.col(c).cwiseAbs().maxCoeff(&idx);
    dominant[c] = idx;
  }
  std::stable_sort(perm.begin(), perm.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double scale = std::max({1.0, std::abs(st.theta(a)), std::abs(st.theta(b))});
    if (std::abs(st.theta(a) - st.theta(b)) > 1e-12 * scale) return st.theta(a) < st.theta(b);
    return dominant[a] < dominant[b];
  });
  Mat X(st.X.rows(), m), HX(st.X.rows(), m);
  Eigen::VectorXd th(m);
  for (Eigen::Index c = 0; c < m; ++c) {
    Eigen::Index src = perm[c];
    // fix the global phase: the dominant coordinate is made real and positive
    const Complex z = st.X(dominant[src], src);
    const Complex ph = std::abs(z) > 0.0 ? std::conj(z) / std::abs(z) : Complex(1.0);
    X.col(c) = st.X.col(src) * ph;
    HX.col(c) = st.HX.col(src) * ph;
    th(c) = st.theta(src);
  }
  st.X = std::move(X);
  st.HX = std::move(HX);
  st.theta = std::move(th);
}

EigenResult pack(const RitzState& st, int k, const Eigen::VectorXd& norms, int iterations, bool converged) {
  RitzState sorted = st;
  canonical_order(sorted);
  // residual norms follow the reordering
  Mat R = sorted.HX - sorted.X * sorted.theta.cast<Complex>().asDiagonal();
  EigenResult out;
  out.iterations = iterations;
  out.converged = converged;
  for (int c = 0; c < k; ++c) {
    out.values.push_back(sorted.theta(c));
    out.residuals.push_back(relative_residual(R.col(c).norm(), sorted.theta(c)));
    out.vectors.emplace_back(sorted.X.col(c).data(), sorted.X.col(c).data() + sorted.X.rows());
  }
  (void)norms;
  return out;
}

EigenResult dense_small(const HermitianSparse& H, int k) {
  const int n = H.dim();
  Mat A = Mat::Zero(n, n);
  const auto off = H.row_offsets();
  const auto col = H.col_indices();
  const auto val = H.values();
  for (int r = 0; r < n; ++r)
    for (int p = off[r]; p < off[r + 1]; ++p) A(r, col[p]) = val[p];
  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  RitzState st;
  st.X = es.eigenvectors().leftCols(k);
  st.theta = es.eigenvalues().head(k);
  apply(H, st.X, st.HX);
  Eigen::VectorXd norms;
  Mat R;
  residuals(st, k, norms, R);
  EigenResult out = pack(st, k, norms, 1, true);
  out.rayleigh_history.push_back(st.theta(0));
  return out;
}

/// Block inverse iteration with Rayleigh-Ritz extraction around `shift`.
bool shift_invert_finish(const HermitianSparse& H, RitzState& st, int k, double tol, double shift, int max_iter,
                         int& iterations, std::vector<double>& history) {
  auto fact = factor_near(H, shift);
  if (!fact) return false;
  Eigen::VectorXd norms;
  Mat R;
  for (int it = 0; it < max_iter; ++it) {
    residuals(st, k, norms, R);
    if (worst(norms, k) <= tol) return true;
    Mat Y = fact->solve(st.X);
    orthonormalize(Y);
    Mat HY;
    apply(H, Y, HY);
    const Eigen::Index m = std::min<Eigen::Index>(st.X.cols(), Y.cols());
    const Mat C = rayleigh_ritz(Y, HY, m, st.theta);
    st.X = Y * C;
    st.HX = HY * C;
    history.push_back(st.theta(0));
    ++iterations;
  }
  residuals(st, k, norms, R);
  return worst(norms, k) <= tol;
}

}  // namespace

EigenResult smallest_eigs(const HermitianSparse& H, const EigenConfig& cfg) {
  const int n = H.dim();
  if (cfg.k < 1 || cfg.k >= n)
    throw DimensionError("smallest_eigs requires 1 <= k < dim (k=" + std::to_string(cfg.k) +
                         ", dim=" + std::to_string(n) + ")");
  if (!(cfg.tol > 0.0)) throw InvalidArgument("smallest_eigs: tol must be positive");

  const int k = cfg.k;
  const int m = std::min(n, k + std::max(cfg.extra_columns, 0));
  if (n <= 4 * m + 8) return dense_small(H, k);

  // start block: warm-start columns first, seeded noise for the rest
  RitzState st;
  st.X.resize(n, m);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int c = 0; c < m; ++c) {
    const bool warm = c < static_cast<int>(cfg.initial.size()) && static_cast<int>(cfg.initial[c].size()) == n;
    for (int r = 0; r < n; ++r) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      st.X(r, c) = warm ? cfg.initial[c][r] : Complex(re, im);
    }
  }
  orthonormalize(st.X);
  if (st.X.cols() < m) throw DimensionError("smallest_eigs: start block is rank deficient");
  apply(H, st.X, st.HX);
  {
    const Mat C = rayleigh_ritz(st.X, st.HX, m, st.theta);
    st.X = (st.X * C).eval();
    st.HX = (st.HX * C).eval();
  }

  std::unique_ptr<Factorization> fact;
  Eigen::VectorXd inv_diag;
  int factorizations = 0;
  double shift_used = 0.0;
  if (cfg.preconditioner == Preconditioner::ShiftInvert) {
    // an indefinite preconditioner breaks the minimization, so lower the shift
    // until it sits below the whole spectrum
    double shift = cfg.shift;
    double step = std::max(0.1 * std::abs(shift), 1e-3);
    for (int attempt = 0; attempt < 40; ++attempt) {
      fact = factor_near(H, shift);
      ++factorizations;
      if (fact && fact->positive_definite()) break;
      fact.reset();
      shift -= step;
      step *= 2.0;
    }
    if (!fact) throw Error("smallest_eigs: no positive definite shift found below " + std::to_string(cfg.shift));
    shift_used = fact->shift();
  } else {
    const auto d = H.diagonal();
    double dmax = 0.0;
    for (double x : d) dmax = std::max(dmax, std::abs(x));
    const double floor = std::max(1e-3 * dmax, 1e-300);
    inv_diag.resize(n);
    for (int i = 0; i < n; ++i) inv_diag(i) = 1.0 / std::max(std::abs(d[i]), floor);
  }

  std::vector<double> history;
  std::vector<double> worst_history;
  Mat P, HP;
  Eigen::VectorXd norms;
  Mat R;
  int it = 0;
  bool converged = false;
  bool stagnated = false;

  for (; it < cfg.max_iter; ++it) {
    residuals(st, k, norms, R);
    const double w = worst(norms, k);
    worst_history.push_back(w);
    if (w <= cfg.tol) {
      converged = true;
      break;
    }
    const int win = cfg.stagnation_window;
    if (win > 0 && static_cast<int>(worst_history.size()) > win) {
      const double before = worst_history[worst_history.size() - 1 - static_cast<std::size_t>(win)];
      if (w > (1.0 - cfg.stagnation_reduction) * before) {
        stagnated = true;
        break;
      }
    }

    Mat W = fact ? fact->solve(R) : Mat(inv_diag.cast<Complex>().asDiagonal() * R);
    Mat Q(n, W.cols() + P.cols());
    Q << W, P;
    project_out(st.X, Q);
    orthonormalize(Q);
    project_out(st.X, Q);
    orthonormalize(Q);
    Mat HQ;
    apply(H, Q, HQ);

    Mat S(n, m + Q.cols()), HS(n, m + Q.cols());
    S << st.X, Q;
    HS << st.HX, HQ;
    const Mat C = rayleigh_ritz(S, HS, m, st.theta);
    const Mat Cq = C.bottomRows(Q.cols());
    P = Q * Cq;
    HP = HQ * Cq;
    st.X = S * C;
    st.HX = HS * C;
    history.push_back(st.theta(0));

    if ((it + 1) % 25 == 0) {
      // keep the Ritz block orthonormal despite rounding drift
      orthonormalize(st.X);
      apply(H, st.X, st.HX);
      const Mat C2 = rayleigh_ritz(st.X, st.HX, m, st.theta);
      st.X = (st.X * C2).eval();
      st.HX = (st.HX * C2).eval();
    }
  }

  bool fallback = false;
  if (!converged) {
    residuals(st, k, norms, R);
    double spread = 0.0;
    for (int c = 0; c < k; ++c) spread = std::max(spread, R.col(c).norm());
    const double gap_guard = std::max(2.0 * spread, 1e-6 * std::max(1.0, std::abs(st.theta(0))));
    const double shift = st.theta(0) - gap_guard;
    int extra_it = 0;
    converged = shift_invert_finish(H, st, k, cfg.tol, shift, std::max(200, cfg.max_iter / 10), extra_it, history);
    it += extra_it;
    fallback = true;
  }
  (void)stagnated;

  residuals(st, k, norms, R);
  EigenResult out = pack(st, k, norms, it, converged);
  out.used_fallback = fallback;
  out.shift_used = shift_used;
  out.factorizations = factorizations + (fallback ? 1 : 0);
  out.rayleigh_history = std::move(history);
  return out;
}

const char* factorization_backend() noexcept {
#ifdef MAGFIBER_HAVE_CHOLMOD
  return "CHOLMOD supernodal LLT";
#else
  return "Eigen SimplicialLDLT";
#endif
}

double residual_norm(const HermitianSparse& H, std::span<const Complex> v, double lambda) {
  if (static_cast<int>(v.size()) != H.dim()) throw DimensionError("residual_norm: vector length mismatch");
  double nrm2 = 0.0;
  for (const auto& z : v) nrm2 += std::norm(z);
  if (!(nrm2 > 0.0)) throw InvalidArgument("residual_norm: zero vector");
  const double inv = 1.0 / std::sqrt(nrm2);
  const auto Hv = H.multiply(v);
  double r2 = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) r2 += std::norm((Hv[i] - lambda * v[i]) * inv);
  return std::sqrt(r2) / std::max(std::abs(lambda), 1.0);
}

namespace {

// Number of eigenvalues of the symmetric tridiagonal (d, e) strictly below x.
int sturm_count(const std::vector<double>& d, const std::vector<double>& e2, double x) {
  int count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    q = d[i] - x - (i > 0 ? e2[i - 1] / q : 0.0);
    if (q == 0.0) q = -1e-300;
    if (q < 0.0) ++count;
  }
  return count;
}

// Solves (T - shift) y = b for tridiagonal T by Gaussian elimination with partial pivoting.
std::vector<double> tridiagonal_solve(const std::vector<double>& d, const std::vector<double>& e, double shift,
                                      std::vector<double> b) {
  const std::size_t n = d.size();
  // row i holds (sub, diag, sup, sup2) after pivoting; sup2 appears from row swaps
  std::vector<double> lo(n, 0.0), di(n), up(n, 0.0), up2(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    di[i] = d[i] - shift;
    if (i + 1 < n) up[i] = e[i];
    if (i > 0) lo[i] = e[i - 1];
  }
  const double tiny = 1e-300;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(lo[i + 1]) > std::abs(di[i])) {
      // swap rows i and i+1
      std::swap(di[i], lo[i + 1]);
      std::swap(up[i], di[i + 1]);
      std::swap(up2[i], up[i + 1]);
      std::swap(b[i], b[i + 1]);
    }
    if (di[i] == 0.0) di[i] = tiny;
    const double m = lo[i + 1] / di[i];
    di[i + 1] -= m * up[i];
    up[i + 1] -= m * up2[i];
    b[i + 1] -= m * b[i];
    lo[i + 1] = 0.0;
  }
  if (di[n - 1] == 0.0) di[n - 1] = tiny;
  std::vector<double> y(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    if (k + 1 < n) s -= up[k] * y[k + 1];
    if (k + 2 < n) s -= up2[k] * y[k + 2];
    y[k] = s / di[k];
  }
  return y;
}

}  // namespace

EigenResult smallest_eigs_tridiagonal(const HermitianSparse& H, int k) {
  const int n = H.dim();
  if (k < 1 || k > n) throw DimensionError("smallest_eigs_tridiagonal requires 1 <= k <= dim");
  std::vector<double> d(n), e(n > 1 ? n - 1 : 0, 0.0);
  const auto off = H.row_offsets();
  const auto col = H.col_indices();
  const auto val = H.values();
  for (int r = 0; r < n; ++r)
    for (int p = off[r]; p < off[r + 1]; ++p) {
      const int c = col[p];
      if (val[p].imag() != 0.0 || std::abs(c - r) > 1)
        throw InvalidArgument("smallest_eigs_tridiagonal: matrix is not real tridiagonal");
      if (c == r) d[r] = val[p].real();
      if (c == r + 1) e[r] = val[p].real();
    }
  std::vector<double> e2(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) e2[i] = e[i] * e[i];
  double glo = std::numeric_limits<double>::infinity();
  double ghi = -glo;
  for (int i = 0; i < n; ++i) {
    const double rad = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < n ? std::abs(e[i]) : 0.0);
    glo = std::min(glo, d[i] - rad);
    ghi = std::max(ghi, d[i] + rad);
  }
  EigenResult out;
  out.converged = true;
  const double eps = std::numeric_limits<double>::epsilon();
  std::mt19937_64 rng(20240917);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<double>> found;
  for (int j = 0; j < k; ++j) {
    // bisection for the (j+1)-th smallest eigenvalue
    double lo = glo, hi = ghi;
    int steps = 0;
    while (hi - lo > 2.0 * eps * std::max(std::abs(lo), std::abs(hi)) + 1e-300 && steps < 200) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (sturm_count(d, e2, mid) > j) hi = mid;
      else lo = mid;
      ++steps;
    }
    const double lambda = 0.5 * (lo + hi);
    // inverse iteration, orthogonalized against earlier vectors of a cluster
    std::vector<double> v(n);
    for (auto& x : v) x = gauss(rng);
    const double shift = lambda - 8.0 * eps * std::max(1.0, std::abs(lambda));
    for (int it = 0; it < 4; ++it) {
      v = tridiagonal_solve(d, e, shift, std::move(v));
      for (const auto& w : found) {
        double dot = 0.0;
        for (int i = 0; i < n; ++i) dot += w[i] * v[i];
        for (int i = 0; i < n; ++i) v[i] -= dot * w[i];
      }
      double nrm = 0.0;
      for (double x : v) nrm += x * x;
      nrm = std::sqrt(nrm);
      for (double& x : v) x /= nrm;
    }
    // sign convention: the dominant coordinate is positive
    std::size_t dom = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(v[i]) > std::abs(v[dom])) dom = static_cast<std::size_t>(i);
    if (v[dom] < 0.0)
      for (double& x : v) x = -x;
    std::vector<Complex> vc(v.begin(), v.end());
    out.values.push_back(lambda);
    out.residuals.push_back(residual_norm(H, vc, lambda));
    out.vectors.push_back(std::move(vc));
    out.iterations += steps;
    found.push_back(std::move(v));
  }
  out.rayleigh_history = {out.values.front()};
  return out;
}

}  // namespace magfiber
