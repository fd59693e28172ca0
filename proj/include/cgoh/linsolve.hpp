#pragma once

#include <Eigen/SparseCore>
#include <memory>
#include <vector>

#include "cgoh/common.hpp"

namespace cgoh {

using SparseMatrixC = Eigen::SparseMatrix<cplx, Eigen::ColMajor, int>;
using VectorC = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;

// Sparse LU factorisation (UMFPACK) with solves against A and A^H.
class SparseLU {
 public:
  explicit SparseLU(const SparseMatrixC& A);
  ~SparseLU();
  SparseLU(const SparseLU&) = delete;
  SparseLU& operator=(const SparseLU&) = delete;

  VectorC solve(const VectorC& b) const;
  VectorC solve_adjoint(const VectorC& b) const;
  // Estimate of ||A||_1 ||A^{-1}||_1 (Hager / Higham).
  double condition_estimate() const;
  int size() const { return n_; }

 private:
  int n_ = 0;
  std::vector<int> Ap_, Ai_;
  std::vector<cplx> Ax_;
  double norm1_ = 0.0;
  void* numeric_ = nullptr;
  VectorC run(int sys, const VectorC& b) const;
};

// Sparse Cholesky factorisation (CHOLMOD, supernodal) of a Hermitian positive
// definite matrix.
class HermitianSolver {
 public:
  explicit HermitianSolver(const SparseMatrixC& A);
  ~HermitianSolver();
  HermitianSolver(const HermitianSolver&) = delete;
  HermitianSolver& operator=(const HermitianSolver&) = delete;
  VectorC solve(const VectorC& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

double relative_residual(const SparseMatrixC& A, const VectorC& x, const VectorC& b);

}  // namespace cgoh
