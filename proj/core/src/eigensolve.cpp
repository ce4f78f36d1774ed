#include "qbnf/eigensolve.hpp"

#include <Eigen/Eigenvalues>
#include <bit>
#include <cmath>
#include <numeric>

namespace qbnf {
namespace {

std::uint64_t matrix_hash(const Eigen::MatrixXcd& M) {
  std::uint64_t hash = 1469598103934665603ULL;
  auto mix = [&hash](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      hash ^= (v >> (8 * b)) & 0xffU;
      hash *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(M.rows()));
  for (Eigen::Index j = 0; j < M.cols(); ++j)
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      mix(std::bit_cast<std::uint64_t>(M(i, j).real()));
      mix(std::bit_cast<std::uint64_t>(M(i, j).imag()));
    }
  return hash;
}

int find_root(std::vector<int>& parent, int i) {
  while (parent[static_cast<std::size_t>(i)] != i) {
    parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
    i = parent[static_cast<std::size_t>(i)];
  }
  return i;
}

// Connected components of the undirected graph i ~ j iff M(i,j) or M(j,i) is nonzero.
// Each strongly connected component is contained in one of these, so the spectrum of M
// is the union of the block spectra up to the coupling between blocks, which is zero.
std::vector<std::vector<int>> components(const Eigen::MatrixXcd& M) {
  const int n = static_cast<int>(M.rows());
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (i != j && M(i, j) != Complex{0.0}) {
        const int a = find_root(parent, i), b = find_root(parent, j);
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
      }
  std::vector<std::vector<int>> out;
  std::vector<int> slot(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    const int r = find_root(parent, i);
    if (slot[static_cast<std::size_t>(r)] < 0) {
      slot[static_cast<std::size_t>(r)] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[static_cast<std::size_t>(slot[static_cast<std::size_t>(r)])].push_back(i);
  }
  return out;
}

}  // namespace

Eigen::VectorXd balance_scaling(const Eigen::MatrixXcd& M) {
  const Eigen::Index n = M.rows();
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  Eigen::MatrixXcd B = M;
  constexpr double radix = 2.0;
  bool changed = true;
  for (int sweep = 0; changed && sweep < 100; ++sweep) {
    changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(B(j, i));
        r += std::abs(B(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      const double s = c + r;
      double f = 1.0;
      double cc = c, rr = r;
      while (cc < rr / radix) {
        cc *= radix;
        rr /= radix;
        f *= radix;
      }
      while (cc >= rr * radix) {
        cc /= radix;
        rr *= radix;
        f /= radix;
      }
      if ((cc + rr) < 0.95 * s) {
        changed = true;
        d(i) *= f;
        B.col(i) *= f;
        B.row(i) /= f;
      }
    }
  }
  return d;
}

Spectrum eigenvalues(const Eigen::MatrixXcd& M, const EigenOptions& opts) {
  if (M.rows() != M.cols() || M.rows() == 0) throw SpecError("eigenvalues: need a nonempty square matrix");
  if (!M.allFinite()) throw SpecError("eigenvalues: matrix has non-finite entries");
  Spectrum out;
  out.norm = M.norm();
  out.matrix_fingerprint = matrix_hash(M);
  for (const auto& block : components(M)) {
    const int m = static_cast<int>(block.size());
    Eigen::MatrixXcd B(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        B(a, b) = M(block[static_cast<std::size_t>(a)], block[static_cast<std::size_t>(b)]);
    if (m == 1) {
      out.eigenvalues.push_back(B(0, 0));
      out.residuals.push_back(0.0);
      continue;
    }
    const Eigen::VectorXd d = opts.balance ? balance_scaling(B) : Eigen::VectorXd::Ones(m);
    const Eigen::MatrixXcd Bal = d.cwiseInverse().asDiagonal() * B * d.asDiagonal();
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver;
    solver.setMaxIterations(opts.iteration_factor * m);
    solver.compute(Bal, true);
    if (solver.info() != Eigen::Success)
      throw EigenConvergenceError("eigenvalues: QR iteration did not converge for a block of size " +
                                      std::to_string(m),
                                  out);
    const Eigen::MatrixXcd V = d.asDiagonal() * solver.eigenvectors();
    for (int a = 0; a < m; ++a) {
      const Complex lam = solver.eigenvalues()(a);
      const Eigen::VectorXcd v = V.col(a);
      const double vn = v.norm();
      const double res = vn > 0.0 ? (B * v - lam * v).norm() / vn : 0.0;
      out.eigenvalues.push_back(lam);
      out.residuals.push_back(res);
    }
  }
  return out;
}

Spectrum eigenvalues(const OperatorMatrix& M, const EigenOptions& opts) {
  return eigenvalues(M.matrix, opts);
}

}  // namespace qbnf
