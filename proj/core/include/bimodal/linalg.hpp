#ifndef BIMODAL_LINALG_HPP_
#define BIMODAL_LINALG_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bimodal {

/// Raised when operand shapes do not agree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a scalar or structural parameter is out of its domain.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Vector = std::vector<double>;

/// Dense row-major double-precision matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  Vector column(std::size_t c) const;

  double frobenius_norm() const noexcept;

  /// "rows x cols", used in error messages.
  std::string shape_string() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class Transpose { No, Yes };

/// Matrix product op(a) * op(b). Each output cell is summed left to right
/// over the inner index.
Matrix matmul(const Matrix& a, const Matrix& b, Transpose ta = Transpose::No,
              Transpose tb = Transpose::No);

/// op(a) * x.
Vector matvec(const Matrix& a, std::span<const double> x, Transpose ta = Transpose::No);

Vector hadamard(std::span<const double> u, std::span<const double> v);

double dot(std::span<const double> u, std::span<const double> v);

/// m += scale * u v^T
void add_outer(Matrix& m, std::span<const double> u, std::span<const double> v,
               double scale = 1.0);

/// y += scale * x
void axpy(double scale, std::span<const double> x, std::span<double> y);

/// Scales m onto the Frobenius ball of radius lambda: m * min(1, lambda / ||m||_F).
Matrix frobenius_project(const Matrix& m, double lambda);
void frobenius_project_inplace(Matrix& m, double lambda);

bool all_finite(std::span<const double> values) noexcept;

}  // namespace bimodal

#endif  // BIMODAL_LINALG_HPP_
