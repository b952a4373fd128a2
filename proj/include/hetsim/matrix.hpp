#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hetsim {

// Dense row-major matrix of 64-bit reals. All model math runs in f64;
// narrower element widths only enter the byte accounting.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

inline void check_dims(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("dimension mismatch: ") + what);
}

// c = a * b
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  check_dims(a.cols == b.rows, "matmul");
  Matrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = ai[k];
      if (aik == 0.0) continue;
      const double* bk = b.row(k);
      for (std::size_t j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

// c += a^T * b
inline void matmul_tn_acc(const Matrix& a, const Matrix& b, Matrix& c) {
  check_dims(a.rows == b.rows && c.rows == a.cols && c.cols == b.cols, "matmul_tn_acc");
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    const double* bi = b.row(i);
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = ai[k];
      if (aik == 0.0) continue;
      double* ck = c.row(k);
      for (std::size_t j = 0; j < b.cols; ++j) ck[j] += aik * bi[j];
    }
  }
}

// c = a * b^T
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  check_dims(a.cols == b.cols, "matmul_nt");
  Matrix c(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* bj = b.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) s += ai[k] * bj[k];
      ci[j] = s;
    }
  }
  return c;
}

inline void add_inplace(Matrix& a, const Matrix& b) {
  check_dims(a.same_shape(b), "add_inplace");
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  check_dims(a.same_shape(b), "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    double d = a.data[i] - b.data[i];
    if (d < 0) d = -d;
    if (d > m) m = d;
  }
  return m;
}

}  // namespace hetsim
