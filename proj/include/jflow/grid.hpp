#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "jflow/errors.hpp"
#include "jflow/herm.hpp"

namespace jflow {

using Index = Eigen::Index;

/// Uniform periodic grid on the unit torus [0,1)^n, stored row-major
/// (axis 0 slowest).
class PeriodicGrid {
 public:
  PeriodicGrid(int n, int points_per_axis);

  int n() const { return n_; }
  int points_per_axis() const { return points_; }
  double spacing() const { return 1.0 / points_; }
  Index total_points() const { return total_; }
  double cell_volume() const { return std::pow(spacing(), n_); }

  /// Stride of axis j in the flat index.
  Index stride(int axis) const;
  int coordinate_index(Index p, int axis) const;
  double coordinate(Index p, int axis) const {
    return coordinate_index(p, axis) * spacing();
  }

  bool operator==(const PeriodicGrid& o) const {
    return n_ == o.n_ && points_ == o.points_;
  }

 private:
  int n_;
  int points_;
  Index total_;
};

/// Real scalar field on a periodic grid (potentials phi, psi, rho, eta).
class ScalarField {
 public:
  explicit ScalarField(const PeriodicGrid& grid)
      : grid_(grid), data_(Eigen::VectorXd::Zero(grid.total_points())) {}
  ScalarField(const PeriodicGrid& grid, Eigen::VectorXd data);

  template <typename F>
  static ScalarField from_function(const PeriodicGrid& grid, F&& f) {
    ScalarField s(grid);
    Eigen::VectorXd x(grid.n());
    for (Index p = 0; p < grid.total_points(); ++p) {
      for (int j = 0; j < grid.n(); ++j) x(j) = grid.coordinate(p, j);
      s.data_(p) = f(x);
    }
    return s;
  }

  const PeriodicGrid& grid() const { return grid_; }
  const Eigen::VectorXd& data() const { return data_; }
  Eigen::VectorXd& data() { return data_; }
  double operator[](Index p) const { return data_(p); }

  double max() const { return data_.maxCoeff(); }
  double min() const { return data_.minCoeff(); }
  bool all_finite() const { return data_.allFinite(); }

  ScalarField operator+(const ScalarField& o) const;
  ScalarField operator-(const ScalarField& o) const;
  ScalarField operator*(double s) const;
  ScalarField operator+(double k) const;

 private:
  PeriodicGrid grid_;
  Eigen::VectorXd data_;
};

/// Field of n x n self-adjoint matrices, one per grid point, stored as an
/// (n*n) x P column-major block so that column p is the matrix at point p.
/// Scalar is double for real symmetric fields or std::complex<double> for
/// general Hermitian ones.
template <typename Scalar>
class FormField {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  /// Provenance of a "Kahler-from-potential" field: base + complex_hessian(potential).
  struct Potential {
    Matrix base;
    std::shared_ptr<const ScalarField> potential;
  };

  explicit FormField(const PeriodicGrid& grid)
      : grid_(grid),
        entries_(Matrix::Zero(grid.n() * grid.n(), grid.total_points())) {}

  static FormField constant(const PeriodicGrid& grid, const Matrix& value) {
    if (value.rows() != grid.n() || value.cols() != grid.n())
      throw ArgumentError("FormField::constant: value has wrong size");
    FormField f(grid);
    const Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> col(
        value.data(), value.size());
    f.entries_.colwise() = col;
    return f;
  }

  const PeriodicGrid& grid() const { return grid_; }
  int dim() const { return grid_.n(); }
  Index size() const { return grid_.total_points(); }

  Eigen::Map<const Matrix> at(Index p) const {
    return Eigen::Map<const Matrix>(entries_.col(p).data(), dim(), dim());
  }
  Eigen::Map<Matrix> at(Index p) {
    return Eigen::Map<Matrix>(entries_.col(p).data(), dim(), dim());
  }

  HermForm form(Index p) const {
    if constexpr (std::is_same_v<Scalar, double>)
      return HermForm(Eigen::MatrixXd(at(p)));
    else
      return HermForm(ComplexMatrix(at(p)));
  }

  const Matrix& entries() const { return entries_; }
  Matrix& entries() { return entries_; }

  FormField operator+(const FormField& o) const {
    if (!(o.grid_ == grid_)) throw ArgumentError("FormField: grid mismatch");
    FormField r(grid_);
    r.entries_ = entries_ + o.entries_;
    return r;
  }
  FormField operator*(double s) const {
    FormField r(grid_);
    r.entries_ = entries_ * s;
    return r;
  }

  const std::optional<Potential>& provenance() const { return provenance_; }
  void set_provenance(Potential p) { provenance_ = std::move(p); }
  bool kahler_from_potential() const { return provenance_.has_value(); }

  /// True when every point holds the same matrix.
  bool is_constant() const {
    for (Index p = 1; p < size(); ++p)
      if (entries_.col(p) != entries_.col(0)) return false;
    return true;
  }

 private:
  PeriodicGrid grid_;
  Matrix entries_;
  std::optional<Potential> provenance_;
};

using SymFormField = FormField<double>;
using HermFormField = FormField<Complex>;

HermFormField to_hermitian(const SymFormField& f);

}  // namespace jflow
