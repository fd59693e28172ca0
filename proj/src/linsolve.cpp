#include "cgoh/linsolve.hpp"

#include <umfpack.h>

#include <Eigen/CholmodSupport>

#include <algorithm>

namespace cgoh {

SparseLU::SparseLU(const SparseMatrixC& A_in) {
  SparseMatrixC A = A_in;
  A.makeCompressed();
  if (A.rows() != A.cols() || A.rows() == 0) throw ArgumentError("sparse LU: matrix must be square and non-empty");
  n_ = static_cast<int>(A.rows());
  Ap_.assign(A.outerIndexPtr(), A.outerIndexPtr() + n_ + 1);
  Ai_.assign(A.innerIndexPtr(), A.innerIndexPtr() + A.nonZeros());
  Ax_.assign(A.valuePtr(), A.valuePtr() + A.nonZeros());
  for (int c = 0; c < n_; ++c) {
    double s = 0.0;
    for (int p = Ap_[c]; p < Ap_[c + 1]; ++p) s += std::abs(Ax_[p]);
    norm1_ = std::max(norm1_, s);
  }
  const double* ax = reinterpret_cast<const double*>(Ax_.data());
  // Stencil matrices have a symmetric pattern; nested dissection keeps the
  // 3D fill manageable.
  double control[UMFPACK_CONTROL];
  umfpack_zi_defaults(control);
  control[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;
  control[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;
  void* symbolic = nullptr;
  int status = umfpack_zi_symbolic(n_, n_, Ap_.data(), Ai_.data(), ax, nullptr, &symbolic, control, nullptr);
  if (status != UMFPACK_OK) throw SolverError("sparse LU: symbolic analysis failed (" + std::to_string(status) + ")");
  status = umfpack_zi_numeric(Ap_.data(), Ai_.data(), ax, nullptr, symbolic, &numeric_, control, nullptr);
  umfpack_zi_free_symbolic(&symbolic);
  if (status == UMFPACK_WARNING_singular_matrix) {
    umfpack_zi_free_numeric(&numeric_);
    throw SolverError("sparse LU: matrix is singular");
  }
  if (status != UMFPACK_OK) throw SolverError("sparse LU: numeric factorisation failed (" + std::to_string(status) + ")");
}

SparseLU::~SparseLU() {
  if (numeric_) umfpack_zi_free_numeric(&numeric_);
}

VectorC SparseLU::run(int sys, const VectorC& b) const {
  if (b.size() != n_) throw ArgumentError("sparse LU: right-hand side size mismatch");
  VectorC x(n_);
  const double* ax = reinterpret_cast<const double*>(Ax_.data());
  const int status = umfpack_zi_solve(sys, Ap_.data(), Ai_.data(), ax, nullptr, reinterpret_cast<double*>(x.data()),
                                      nullptr, reinterpret_cast<const double*>(b.data()), nullptr, numeric_, nullptr,
                                      nullptr);
  if (status != UMFPACK_OK) throw SolverError("sparse LU: solve failed (" + std::to_string(status) + ")");
  for (int i = 0; i < n_; ++i)
    if (!std::isfinite(x[i].real()) || !std::isfinite(x[i].imag())) throw SolverError("sparse LU: non-finite solution");
  return x;
}

VectorC SparseLU::solve(const VectorC& b) const { return run(UMFPACK_A, b); }
VectorC SparseLU::solve_adjoint(const VectorC& b) const { return run(UMFPACK_At, b); }

double SparseLU::condition_estimate() const {
  // Hager's method for ||A^{-1}||_1, a few sweeps.
  VectorC x = VectorC::Constant(n_, cplx(1.0 / n_));
  double est = 0.0;
  int last = -1;
  for (int it = 0; it < 5; ++it) {
    const VectorC y = solve(x);
    const double ny = y.cwiseAbs().sum();
    if (ny <= est && it > 0) break;
    est = ny;
    VectorC s(n_);
    for (int i = 0; i < n_; ++i) s[i] = std::abs(y[i]) > 0.0 ? y[i] / std::abs(y[i]) : cplx(1.0);
    const VectorC z = solve_adjoint(s);
    int j = 0;
    double zmax = -1.0;
    for (int i = 0; i < n_; ++i)
      if (std::abs(z[i]) > zmax) {
        zmax = std::abs(z[i]);
        j = i;
      }
    if (j == last) break;
    last = j;
    x.setZero();
    x[j] = 1.0;
  }
  return est * norm1_;
}

struct HermitianSolver::Impl {
  Eigen::CholmodSupernodalLLT<SparseMatrixC, Eigen::Lower> llt;
};

HermitianSolver::HermitianSolver(const SparseMatrixC& A) : impl_(std::make_unique<Impl>()) {
  if (A.rows() != A.cols() || A.rows() == 0) throw ArgumentError("cholesky: matrix must be square and non-empty");
  impl_->llt.compute(A);
  if (impl_->llt.info() != Eigen::Success) throw SolverError("cholesky: factorisation failed (matrix not positive definite)");
}

HermitianSolver::~HermitianSolver() = default;

VectorC HermitianSolver::solve(const VectorC& b) const {
  if (b.size() != impl_->llt.rows()) throw ArgumentError("cholesky: right-hand side size mismatch");
  VectorC x = impl_->llt.solve(b);
  for (int i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i].real()) || !std::isfinite(x[i].imag())) throw SolverError("cholesky: non-finite solution");
  return x;
}

double relative_residual(const SparseMatrixC& A, const VectorC& x, const VectorC& b) {
  const double nb = b.norm();
  return nb > 0.0 ? (A * x - b).norm() / nb : (A * x).norm();
}

}  // namespace cgoh
