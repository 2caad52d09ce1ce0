#include "jflow/grid.hpp"

namespace jflow {

PeriodicGrid::PeriodicGrid(int n, int points_per_axis)
    : n_(n), points_(points_per_axis), total_(1) {
  if (n < 1) throw ArgumentError("PeriodicGrid: n must be >= 1");
  if (points_per_axis < 4 || points_per_axis % 2 != 0)
    throw ArgumentError("PeriodicGrid: points per axis must be even and >= 4");
  for (int j = 0; j < n; ++j) total_ *= points_per_axis;
}

Index PeriodicGrid::stride(int axis) const {
  Index s = 1;
  for (int j = axis + 1; j < n_; ++j) s *= points_;
  return s;
}

int PeriodicGrid::coordinate_index(Index p, int axis) const {
  return static_cast<int>((p / stride(axis)) % points_);
}

ScalarField::ScalarField(const PeriodicGrid& grid, Eigen::VectorXd data)
    : grid_(grid), data_(std::move(data)) {
  if (data_.size() != grid.total_points())
    throw ArgumentError("ScalarField: data length does not match grid");
  if (!data_.allFinite()) throw ArgumentError("ScalarField: non-finite entry");
}

ScalarField ScalarField::operator+(const ScalarField& o) const {
  if (!(o.grid_ == grid_)) throw ArgumentError("ScalarField: grid mismatch");
  return ScalarField(grid_, data_ + o.data_);
}

ScalarField ScalarField::operator-(const ScalarField& o) const {
  if (!(o.grid_ == grid_)) throw ArgumentError("ScalarField: grid mismatch");
  return ScalarField(grid_, data_ - o.data_);
}

ScalarField ScalarField::operator*(double s) const {
  return ScalarField(grid_, data_ * s);
}

ScalarField ScalarField::operator+(double k) const {
  return ScalarField(grid_, (data_.array() + k).matrix());
}

HermFormField to_hermitian(const SymFormField& f) {
  HermFormField h(f.grid());
  h.entries() = f.entries().cast<Complex>();
  return h;
}

}  // namespace jflow
