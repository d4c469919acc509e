#include "linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"

namespace iisim {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_square_finite(const Matrix& m, const char* what) {
  if (!m.square()) throw Error::dimension(std::string(what) + ": matrix must be square");
  if (!m.all_finite()) throw Error::invalid_argument(std::string(what) + ": non-finite entries");
}

double off_diagonal_frobenius(const Matrix& w) {
  double acc = 0.0;
  for (std::size_t p = 0; p + 1 < w.rows(); ++p)
    for (std::size_t q = p + 1; q < w.cols(); ++q) acc += w(p, q) * w(p, q);
  return std::sqrt(2.0 * acc);
}

double frobenius(const Matrix& w) {
  double acc = 0.0;
  for (double v : w.data()) acc += v * v;
  return std::sqrt(acc);
}

}  // namespace

std::vector<double> eig_sym_all(const Matrix& m) {
  require_square_finite(m, "eig_sym");
  const std::size_t n = m.rows();

  // Reject clearly asymmetric input, then average away roundoff-level skew.
  double skew = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) skew = std::max(skew, std::abs(m(i, j) - m(j, i)));
  if (skew > 1e-10 * std::max(1.0, m.max_abs()))
    throw Error::invalid_argument("eig_sym: matrix is not symmetric within tolerance");

  Matrix w(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) w(i, j) = 0.5 * (m(i, j) + m(j, i));

  if (n == 1) return {w(0, 0)};

  const double scale = std::max(1.0, frobenius(w));
  for (int sweep = 0; sweep < 100; ++sweep) {
    if (off_diagonal_frobenius(w) <= 1e-15 * scale) break;

    // One cyclic sweep of Jacobi rotations.
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = w(p, q);
        if (std::abs(apq) <= 1e-300) continue;

        double theta = (w(q, q) - w(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 1.0 / (2.0 * theta);  // avoid overflow in theta^2
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;

        // Rotate rows/columns p and q; diagonal gets the closed-form update.
        double app = w(p, p), aqq = w(q, q);
        w(p, p) = app - t * apq;
        w(q, q) = aqq + t * apq;
        w(p, q) = 0.0;
        w(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          double akp = w(k, p), akq = w(k, q);
          w(k, p) = c * akp - s * akq;
          w(p, k) = w(k, p);
          w(k, q) = s * akp + c * akq;
          w(q, k) = w(k, q);
        }
      }
    }
  }

  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = w(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

SymEig eig_sym(const Matrix& m) {
  auto eig = eig_sym_all(m);
  return {eig.front(), eig.back()};
}

double spectral_norm(const Matrix& m) {
  if (m.empty()) throw Error::dimension("spectral_norm: empty matrix");
  if (!m.all_finite()) throw Error::invalid_argument("spectral_norm: non-finite entries");

  // Gram matrix on the smaller side keeps the symmetric solve as small as
  // possible for rectangular input.
  Matrix g = (m.cols() <= m.rows()) ? m.transposed() * m : m * m.transposed();
  double lmax = eig_sym(g).lambda_max;
  return std::sqrt(std::max(0.0, lmax));
}

namespace {

// Reduction to upper Hessenberg form by stabilized elementary similarity
// transformations (pivoted Gaussian elimination applied from both sides).
void to_hessenberg(Matrix& a) {
  const std::size_t n = a.rows();
  for (std::size_t m = 1; m + 1 < n; ++m) {
    double x = 0.0;
    std::size_t i = m;
    for (std::size_t j = m; j < n; ++j) {
      if (std::abs(a(j, m - 1)) > std::abs(x)) {
        x = a(j, m - 1);
        i = j;
      }
    }
    if (i != m) {
      for (std::size_t j = m - 1; j < n; ++j) std::swap(a(i, j), a(m, j));
      for (std::size_t j = 0; j < n; ++j) std::swap(a(j, i), a(j, m));
    }
    if (x != 0.0) {
      for (i = m + 1; i < n; ++i) {
        double y = a(i, m - 1);
        if (y == 0.0) continue;
        y /= x;
        a(i, m - 1) = y;
        for (std::size_t j = m; j < n; ++j) a(i, j) -= y * a(m, j);
        for (std::size_t j = 0; j < n; ++j) a(j, m) += y * a(j, i);
      }
    }
  }
  // The elimination leaves its multipliers below the subdiagonal; the QR
  // iteration expects genuine zeros there.
  for (std::size_t i = 2; i < n; ++i)
    for (std::size_t j = 0; j + 1 < i; ++j) a(i, j) = 0.0;
}

double sign_of(double magnitude, double carrier) {
  return carrier >= 0.0 ? std::abs(magnitude) : -std::abs(magnitude);
}

// Double-shift QR iteration on an upper Hessenberg matrix. Classic Francis
// algorithm; deflates 1x1 and 2x2 trailing blocks as they converge.
std::vector<ComplexEig> hqr_eigenvalues(Matrix& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<ComplexEig> eig(n);

  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));
  if (anorm == 0.0) return eig;  // zero matrix

  int nn = n - 1;
  double t = 0.0;
  while (nn >= 0) {
    int its = 0;
    int l;
    do {
      for (l = nn; l >= 1; --l) {
        double s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) <= kEps * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      double x = a(nn, nn);
      if (l == nn) {
        // single real eigenvalue converged
        eig[nn] = {x + t, 0.0};
        --nn;
      } else {
        double y = a(nn - 1, nn - 1);
        double w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          // trailing 2x2 block: solve its quadratic directly
          double p = 0.5 * (y - x);
          double q = p * p + w;
          double z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign_of(z, p);
            eig[nn - 1] = {x + z, 0.0};
            eig[nn] = {z != 0.0 ? x - w / z : x + z, 0.0};
          } else {
            eig[nn - 1] = {x + p, -z};
            eig[nn] = {x + p, z};
          }
          nn -= 2;
        } else {
          if (its == 60) throw Error::numeric("eig_general: QR iteration did not converge");
          if (its == 10 || its == 20 || its == 30 || its == 40 || its == 50) {
            // exceptional shift to break symmetry-induced stalls
            t += x;
            for (int i = 0; i <= nn; ++i) a(i, i) -= x;
            double s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;

          // find two consecutive small subdiagonal elements to start the sweep
          int m;
          double p = 0.0, q = 0.0, r = 0.0;
          for (m = nn - 2; m >= l; --m) {
            double z = a(m, m);
            double rr = x - z;
            double ss = y - z;
            p = (rr * ss - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - rr - ss;
            r = a(m + 2, m + 1);
            double s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            double v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) +
                                      std::abs(a(m + 1, m + 1)));
            if (u <= kEps * v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) a(i, i - 3) = 0.0;
          }

          // the double QR sweep itself
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = (k != nn - 1) ? a(k + 2, k - 1) : 0.0;
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            double s = sign_of(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0.0) continue;
            if (k == m) {
              if (l != m) a(k, k - 1) = -a(k, k - 1);
            } else {
              a(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            double z = r / s;
            q /= p;
            r /= p;
            for (int j = k; j <= nn; ++j) {
              double pp = a(k, j) + q * a(k + 1, j);
              if (k != nn - 1) {
                pp += r * a(k + 2, j);
                a(k + 2, j) -= pp * z;
              }
              a(k + 1, j) -= pp * y;
              a(k, j) -= pp * x;
            }
            int mmin = nn < k + 3 ? nn : k + 3;
            for (int i = l; i <= mmin; ++i) {
              double pp = x * a(i, k) + y * a(i, k + 1);
              if (k != nn - 1) {
                pp += z * a(i, k + 2);
                a(i, k + 2) -= pp * r;
              }
              a(i, k + 1) -= pp * q;
              a(i, k) -= pp;
            }
          }
        }
      }
    } while (l < nn - 1);
  }
  return eig;
}

}  // namespace

std::vector<ComplexEig> eig_general(const Matrix& a) {
  require_square_finite(a, "eig_general");
  Matrix work = a;
  if (work.rows() == 1) return {{work(0, 0), 0.0}};
  to_hessenberg(work);
  auto eig = hqr_eigenvalues(work);
  std::sort(eig.begin(), eig.end(), [](const ComplexEig& u, const ComplexEig& v) {
    return u.re != v.re ? u.re < v.re : u.im < v.im;
  });
  return eig;
}

bool is_hurwitz(const Matrix& a, double tol) {
  auto eig = eig_general(a);
  for (const auto& e : eig)
    if (e.re >= -tol) return false;
  return true;
}

Vec solve_dense(Matrix a, Vec b) {
  if (!a.square() || a.rows() != b.size())
    throw Error::dimension("solve_dense: shape mismatch");
  const std::size_t n = a.rows();

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) < 1e-300)
      throw Error::numeric("solve_dense: matrix is singular to working precision");
    if (piv != k) {
      for (std::size_t j = k; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      a(i, k) = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  Vec x(n, 0.0);
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) acc -= a(ii, j) * x[j];
    x[ii] = acc / a(ii, ii);
  }
  return x;
}

Matrix solve_lyapunov(const Matrix& a) {
  require_square_finite(a, "solve_lyapunov");
  if (!is_hurwitz(a))
    throw Error::precondition("solve_lyapunov: matrix is not Hurwitz");

  const std::size_t n = a.rows();
  // Unknowns are the entries of P laid out row-major. Equation (i,j) collects
  // the (i,j) entry of A^T P + P A = -I:
  //   sum_k A(k,i) P(k,j) + sum_k P(i,k) A(k,j) = -delta_ij
  Matrix sys(n * n, n * n);
  Vec rhs(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t row = i * n + j;
      for (std::size_t k = 0; k < n; ++k) {
        sys(row, k * n + j) += a(k, i);
        sys(row, i * n + k) += a(k, j);
      }
      rhs[row] = (i == j) ? -1.0 : 0.0;
    }
  }

  Vec p = solve_dense(std::move(sys), std::move(rhs));
  Matrix result(n, n, std::move(p));

  // Exact solutions are symmetric; average out elimination roundoff and make
  // sure the residual is at solver precision before handing the matrix back.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = 0.5 * (result(i, j) + result(j, i));
      result(i, j) = v;
      result(j, i) = v;
    }

  Matrix residual = a.transposed() * result + result * a + Matrix::identity(n);
  if (spectral_norm(residual) > 1e-6 * std::max(1.0, result.max_abs()))
    throw Error::numeric("solve_lyapunov: residual too large; system is badly conditioned");

  return result;
}

}  // namespace iisim
