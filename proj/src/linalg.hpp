#pragma once

#include <vector>

#include "matrix.hpp"

namespace iisim {

struct SymEig {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

// All eigenvalues of a symmetric matrix, ascending, via cyclic Jacobi
// rotations. The input must be symmetric to within 1e-10 (relative to its
// largest entry); it is symmetrized by averaging before the sweeps start.
std::vector<double> eig_sym_all(const Matrix& m);

// Extreme eigenvalues of a symmetric matrix.
SymEig eig_sym(const Matrix& m);

// Largest singular value, computed as sqrt(lambda_max) of the Gram matrix on
// the smaller side. Works for rectangular input.
double spectral_norm(const Matrix& m);

struct ComplexEig {
  double re = 0.0;
  double im = 0.0;
};

// Eigenvalues of a general square matrix: reduction to upper Hessenberg form
// followed by the double-shift QR iteration. Suited to the small dense
// matrices this library deals with.
std::vector<ComplexEig> eig_general(const Matrix& a);

// True when every eigenvalue of `a` has real part < -tol.
bool is_hurwitz(const Matrix& a, double tol = 1e-9);

// Solves A^T P + P A = -I for symmetric positive definite P by assembling the
// n^2 x n^2 linear system over the entries of P and eliminating densely.
// Requires `a` Hurwitz; throws a precondition error otherwise.
Matrix solve_lyapunov(const Matrix& a);

// Dense partial-pivot Gaussian elimination on a square system (used by the
// Lyapunov solve and available to tests as an oracle building block).
Vec solve_dense(Matrix a, Vec b);

}  // namespace iisim
