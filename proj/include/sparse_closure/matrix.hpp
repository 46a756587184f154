#ifndef SPARSE_CLOSURE_MATRIX_HPP
#define SPARSE_CLOSURE_MATRIX_HPP

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace sparse_closure {

using Rational = mpq_class;
using BigInt = mpz_class;

/*
 * Dense row-major matrix over an exact or floating scalar.
 *
 * Used for rational analysis (Rational) and for small real-valued
 * factor payloads (double). The training path uses Eigen instead.
 */
template <typename T>
class Matrix {
 public:
  using Scalar = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}

  Matrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw std::invalid_argument("ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  // Ones on the anti-diagonal: m(i, n-1-i) = 1.
  static Matrix anti_identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, n - 1 - i) = T(1);
    return m;
  }

  [[nodiscard]] std::size_t rows() const { return rows_; }
  [[nodiscard]] std::size_t cols() const { return cols_; }
  [[nodiscard]] bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  [[nodiscard]] const std::vector<T>& data() const { return data_; }

  [[nodiscard]] Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) throw std::out_of_range("matrix block out of range");
    Matrix out(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j) out(i, j) = (*this)(r0 + i, c0 + j);
    return out;
  }

  [[nodiscard]] Matrix transpose() const {
    Matrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }

  [[nodiscard]] bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](const T& v) { return v == T(0); });
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product shape mismatch");
    Matrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T& aik = a(i, k);
        if (aik == T(0)) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw std::invalid_argument("matrix difference shape mismatch");
    Matrix out = a;
    for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] -= b.data_[i];
    return out;
  }

  friend std::ostream& operator<<(std::ostream& os, const Matrix& m) {
    os << "[";
    for (std::size_t i = 0; i < m.rows_; ++i) {
      os << (i ? ", [" : "[");
      for (std::size_t j = 0; j < m.cols_; ++j) os << (j ? ", " : "") << m(i, j);
      os << "]";
    }
    return os << "]";
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RationalMatrix = Matrix<Rational>;
using RealMatrix = Matrix<double>;

// Parses "p/q", "p" or a decimal literal such as "-0.25" into an exact rational.
inline Rational parse_rational(const std::string& text) {
  std::string s = text;
  s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return c == ' ' || c == '+'; }), s.end());
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  const auto dot = s.find('.');
  const auto exp = s.find_first_of("eE");
  if (dot == std::string::npos && exp == std::string::npos) {
    Rational q;
    if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad rational literal: " + text);
    if (q.get_den() == 0) throw std::invalid_argument("zero denominator: " + text);
    q.canonicalize();
    return q;
  }
  // Decimal: mantissa digits over a power of ten, exponent applied exactly.
  std::string mant = exp == std::string::npos ? s : s.substr(0, exp);
  long e10 = 0;
  if (exp != std::string::npos) e10 = std::stol(s.substr(exp + 1));
  if (const auto d = mant.find('.'); d != std::string::npos) {
    e10 -= static_cast<long>(mant.size() - d - 1);
    mant.erase(d, 1);
  }
  BigInt num;
  if (mant.empty() || mant == "-" || num.set_str(mant, 10) != 0) throw std::invalid_argument("bad rational literal: " + text);
  BigInt scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(e10 < 0 ? -e10 : e10));
  Rational q = e10 < 0 ? Rational(num, scale) : Rational(num * scale);
  q.canonicalize();
  return q;
}

inline std::string format_rational(const Rational& q) { return q.get_str(10); }

inline Rational to_rational(double v) { return Rational(v); }

inline RealMatrix to_real(const RationalMatrix& m) {
  RealMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).get_d();
  return out;
}

inline RationalMatrix to_rational(const RealMatrix& m) {
  RationalMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = Rational(m(i, j));
  return out;
}

template <typename T>
double frobenius_norm(const Matrix<T>& m) {
  double s = 0.0;
  for (const auto& v : m.data()) {
    double x;
    if constexpr (std::is_same_v<T, Rational>) x = v.get_d(); else x = static_cast<double>(v);
    s += x * x;
  }
  return std::sqrt(s);
}

// Rank by fraction-exact Gaussian elimination; no tolerances.
inline std::size_t exact_rank(RationalMatrix m) {
  std::size_t rank = 0;
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && m(pivot, c) == 0) ++pivot;
    if (pivot == rows) continue;
    if (pivot != rank)
      for (std::size_t j = c; j < cols; ++j) std::swap(m(pivot, j), m(rank, j));
    for (std::size_t r = rank + 1; r < rows; ++r) {
      if (m(r, c) == 0) continue;
      const Rational f = m(r, c) / m(rank, c);
      for (std::size_t j = c; j < cols; ++j) m(r, j) -= f * m(rank, j);
    }
    ++rank;
  }
  return rank;
}

}  // namespace sparse_closure

#endif  // SPARSE_CLOSURE_MATRIX_HPP
