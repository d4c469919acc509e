#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace iisim {

using Vec = std::vector<double>;

// Dense row-major matrix. Everything in this library works on systems with a
// handful of states, so the representation favours clarity over blocking or
// expression templates. A default-constructed Matrix is the empty sentinel
// (0x0) used by "not set yet" fields; all named constructors require at least
// one row and one column.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }
  bool square() const { return rows_ > 0 && rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }

  Matrix transposed() const;
  bool all_finite() const;
  double max_abs() const;

  Matrix& operator+=(const Matrix& rhs);
  Matrix& operator-=(const Matrix& rhs);
  Matrix& operator*=(double s);

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }
  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend bool operator==(const Matrix& a, const Matrix& b);

  // this * x for a state-sized vector
  Vec apply(const Vec& x) const;

private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

// Small vector helpers shared across the library.
double vec_norm(const Vec& x);                       // Euclidean norm
double vec_dot(const Vec& a, const Vec& b);
Vec vec_add(const Vec& a, const Vec& b);
Vec vec_sub(const Vec& a, const Vec& b);
Vec vec_scaled(const Vec& a, double s);
void vec_axpy(Vec& y, double a, const Vec& x);        // y += a*x
bool vec_all_finite(const Vec& x);

// Throws Error::dimension with a message naming `what` when the shape is off.
void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, const std::string& what);

}  // namespace iisim
