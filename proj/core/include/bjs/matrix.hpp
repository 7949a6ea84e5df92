#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "bjs/errors.hpp"
#include "bjs/rational.hpp"

namespace bjs {

using MatD = Eigen::MatrixXd;
using VecD = Eigen::VectorXd;

// Dense d x d matrix with exact rational entries, row-major.
struct RatMat {
  int d = 0;
  std::vector<Rational> a;

  RatMat() = default;
  explicit RatMat(int dim) : d(dim), a(static_cast<size_t>(dim) * dim) {}

  Rational& at(int i, int j) { return a[static_cast<size_t>(i) * d + j]; }
  const Rational& at(int i, int j) const { return a[static_cast<size_t>(i) * d + j]; }

  static RatMat identity(int dim) {
    RatMat m(dim);
    for (int i = 0; i < dim; ++i) m.at(i, i) = 1;
    return m;
  }

  bool operator==(const RatMat& o) const { return d == o.d && a == o.a; }
};

inline RatMat rat_mul(const RatMat& x, const RatMat& y) {
  RatMat z(x.d);
  for (int i = 0; i < x.d; ++i)
    for (int k = 0; k < x.d; ++k) {
      const Rational& xik = x.at(i, k);
      if (xik == 0) continue;
      for (int j = 0; j < x.d; ++j) z.at(i, j) += xik * y.at(k, j);
    }
  return z;
}

inline RatMat rat_transpose(const RatMat& x) {
  RatMat z(x.d);
  for (int i = 0; i < x.d; ++i)
    for (int j = 0; j < x.d; ++j) z.at(i, j) = x.at(j, i);
  return z;
}

inline Rational rat_det(const RatMat& x) {
  // Fraction-free Gaussian elimination on a working copy.
  RatMat m = x;
  Rational det = 1;
  for (int col = 0; col < m.d; ++col) {
    int pivot = -1;
    for (int r = col; r < m.d; ++r)
      if (m.at(r, col) != 0) {
        pivot = r;
        break;
      }
    if (pivot < 0) return 0;
    if (pivot != col) {
      for (int j = 0; j < m.d; ++j) std::swap(m.at(pivot, j), m.at(col, j));
      det = -det;
    }
    det *= m.at(col, col);
    Rational inv = Rational(1) / m.at(col, col);
    for (int r = col + 1; r < m.d; ++r) {
      Rational f = m.at(r, col) * inv;
      if (f == 0) continue;
      for (int j = col; j < m.d; ++j) m.at(r, j) -= f * m.at(col, j);
    }
  }
  return det;
}

inline RatMat rat_inverse(const RatMat& x) {
  RatMat m = x;
  RatMat inv = RatMat::identity(x.d);
  for (int col = 0; col < m.d; ++col) {
    int pivot = -1;
    for (int r = col; r < m.d; ++r)
      if (m.at(r, col) != 0) {
        pivot = r;
        break;
      }
    if (pivot < 0) throw Error(ErrorKind::LinearAlgebraFailure, "singular rational matrix");
    if (pivot != col)
      for (int j = 0; j < m.d; ++j) {
        std::swap(m.at(pivot, j), m.at(col, j));
        std::swap(inv.at(pivot, j), inv.at(col, j));
      }
    Rational p = m.at(col, col);
    for (int j = 0; j < m.d; ++j) {
      m.at(col, j) /= p;
      inv.at(col, j) /= p;
    }
    for (int r = 0; r < m.d; ++r) {
      if (r == col) continue;
      Rational f = m.at(r, col);
      if (f == 0) continue;
      for (int j = 0; j < m.d; ++j) {
        m.at(r, j) -= f * m.at(col, j);
        inv.at(r, j) -= f * inv.at(col, j);
      }
    }
  }
  return inv;
}

inline MatD rat_to_double(const RatMat& x) {
  MatD m(x.d, x.d);
  for (int i = 0; i < x.d; ++i)
    for (int j = 0; j < x.d; ++j) m(i, j) = to_double(x.at(i, j));
  return m;
}

// Sign normalization: flip so the first nonzero entry is positive.  Matrices
// acting projectively are deduplicated modulo this flip.
inline RatMat rat_sign_normalize(const RatMat& x) {
  for (const Rational& v : x.a) {
    if (v == 0) continue;
    if (v < 0) {
      RatMat z = x;
      for (Rational& w : z.a) w = -w;
      return z;
    }
    return x;
  }
  return x;
}

inline MatD matd_sign_normalize(const MatD& x) {
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) {
      double v = x(i, j);
      if (v == 0.0) continue;
      return v < 0 ? MatD(-x) : x;
    }
  return x;
}

inline std::string rat_key(const RatMat& x) {
  RatMat n = rat_sign_normalize(x);
  std::ostringstream os;
  for (const Rational& v : n.a) os << v << '|';
  return os.str();
}

// Float-mode canonical key: entries quantized on a dyadic grid after sign
// normalization.  Entries too large for the grid to remain injective signal
// precision exhaustion.
inline std::string matd_key(const MatD& x, double grid) {
  MatD n = matd_sign_normalize(x);
  std::ostringstream os;
  for (int i = 0; i < n.rows(); ++i)
    for (int j = 0; j < n.cols(); ++j) {
      double q = n(i, j) / grid;
      if (!std::isfinite(q) || std::abs(q) > 9.0e18)
        throw Error(ErrorKind::PrecisionExhausted, "entry exceeds the key grid range");
      os << static_cast<int64_t>(std::llround(q)) << '|';
    }
  return os.str();
}

inline std::string rat_mat_pretty(const RatMat& x) {
  std::ostringstream os;
  os << '[';
  for (int i = 0; i < x.d; ++i) {
    os << '[';
    for (int j = 0; j < x.d; ++j) {
      os << x.at(i, j);
      if (j + 1 < x.d) os << ',';
    }
    os << ']';
    if (i + 1 < x.d) os << ',';
  }
  os << ']';
  return os.str();
}

}  // namespace bjs
