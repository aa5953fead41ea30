#include "bimodal/linalg.hpp"

#include <cmath>

namespace bimodal {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vector Matrix::column(std::size_t c) const {
  Vector out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

double Matrix::frobenius_norm() const noexcept {
  double sum = 0.0;
  for (double x : data_) sum += x * x;
  return std::sqrt(sum);
}

std::string Matrix::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix matmul(const Matrix& a, const Matrix& b, Transpose ta, Transpose tb) {
  const bool at = ta == Transpose::Yes;
  const bool bt = tb == Transpose::Yes;
  const std::size_t m = at ? a.cols() : a.rows();
  const std::size_t k = at ? a.rows() : a.cols();
  const std::size_t kb = bt ? b.cols() : b.rows();
  const std::size_t n = bt ? b.rows() : b.cols();
  if (k != kb) {
    throw ShapeError("matmul: inner dimensions disagree: " + a.shape_string() +
                     (at ? "^T" : "") + " * " + b.shape_string() + (bt ? "^T" : ""));
  }
  Matrix out(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) {
        const double x = at ? a(p, i) : a(i, p);
        const double y = bt ? b(j, p) : b(p, j);
        acc += x * y;
      }
      out(i, j) = acc;
    }
  }
  return out;
}

Vector matvec(const Matrix& a, std::span<const double> x, Transpose ta) {
  if (ta == Transpose::No) {
    if (a.cols() != x.size()) {
      throw ShapeError("matvec: " + a.shape_string() + " * vector of length " +
                       std::to_string(x.size()));
    }
    Vector out(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), x);
    return out;
  }
  if (a.rows() != x.size()) {
    throw ShapeError("matvec: (" + a.shape_string() + ")^T * vector of length " +
                     std::to_string(x.size()));
  }
  // Row-major walk; each out[j] still accumulates in increasing i.
  Vector out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    const auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += r[j] * xi;
  }
  return out;
}

Vector hadamard(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ShapeError("hadamard: lengths " + std::to_string(u.size()) + " and " +
                     std::to_string(v.size()));
  }
  Vector out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] * v[i];
  return out;
}

double dot(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ShapeError("dot: lengths " + std::to_string(u.size()) + " and " +
                     std::to_string(v.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
  return acc;
}

void add_outer(Matrix& m, std::span<const double> u, std::span<const double> v, double scale) {
  if (m.rows() != u.size() || m.cols() != v.size()) {
    throw ShapeError("add_outer: " + m.shape_string() + " += outer(" + std::to_string(u.size()) +
                     ", " + std::to_string(v.size()) + ")");
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double ui = scale * u[i];
    auto r = m.row(i);
    for (std::size_t j = 0; j < v.size(); ++j) r[j] += ui * v[j];
  }
}

void axpy(double scale, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) {
    throw ShapeError("axpy: lengths " + std::to_string(x.size()) + " and " +
                     std::to_string(y.size()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += scale * x[i];
}

void frobenius_project_inplace(Matrix& m, double lambda) {
  if (!(lambda > 0.0)) throw ParameterError("frobenius_project: lambda must be positive");
  const double norm = m.frobenius_norm();
  if (norm <= lambda) return;
  const double scale = lambda / norm;
  for (double& x : m.values()) x *= scale;
  // Rounding can leave the norm a few ulps above lambda; nudge it inside.
  while (m.frobenius_norm() > lambda) {
    for (double& x : m.values()) x = std::nextafter(x, 0.0);
  }
}

Matrix frobenius_project(const Matrix& m, double lambda) {
  Matrix out = m;
  frobenius_project_inplace(out, lambda);
  return out;
}

bool all_finite(std::span<const double> values) noexcept {
  for (double x : values) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace bimodal
