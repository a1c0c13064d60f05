#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace procknow {

using Vec = std::vector<double>;

// Dense row-major matrix. Just enough for the encoders and heads.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }

  const double* row(int r) const { return a.data() + static_cast<std::size_t>(r) * cols; }
  double* row(int r) { return a.data() + static_cast<std::size_t>(r) * cols; }
};

// out = m * x
inline void matvec(const Mat& m, const double* x, double* out) {
  for (int r = 0; r < m.rows; ++r) {
    const double* row = m.row(r);
    double s = 0.0;
    for (int c = 0; c < m.cols; ++c) s += row[c] * x[c];
    out[r] = s;
  }
}

// out += m * x
inline void matvec_add(const Mat& m, const double* x, double* out) {
  for (int r = 0; r < m.rows; ++r) {
    const double* row = m.row(r);
    double s = 0.0;
    for (int c = 0; c < m.cols; ++c) s += row[c] * x[c];
    out[r] += s;
  }
}

// out += m^T * u
inline void matTvec_add(const Mat& m, const double* u, double* out) {
  for (int r = 0; r < m.rows; ++r) {
    const double* row = m.row(r);
    const double ur = u[r];
    for (int c = 0; c < m.cols; ++c) out[c] += row[c] * ur;
  }
}

// g += u * v^T
inline void add_outer(Mat& g, const double* u, const double* v) {
  for (int r = 0; r < g.rows; ++r) {
    double* row = g.row(r);
    const double ur = u[r];
    for (int c = 0; c < g.cols; ++c) row[c] += ur * v[c];
  }
}

inline void axpy(double alpha, const Vec& x, Vec& y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace procknow
