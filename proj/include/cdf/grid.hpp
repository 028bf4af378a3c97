#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cdf/errors.hpp"
#include "cdf/state.hpp"

namespace cdf {

/// Uniform cell-centred axis. Ghost layers are added by the solver.
struct Grid1D {
  static constexpr int ghost = 2;

  int n_cells = 4;
  double x_min = 0.0;
  double x_max = 1.0;

  void validate() const {
    if (n_cells < 4) throw ConfigurationError("grid needs at least 4 cells");
    if (!(x_max > x_min)) throw ConfigurationError("grid needs x_max > x_min");
  }
  double dx() const { return (x_max - x_min) / n_cells; }
  double center(int i) const { return x_min + (i + 0.5) * dx(); }
  double length() const { return x_max - x_min; }
};

/// Cell states on a 1D grid or a 2D tensor grid (x index fastest).
class Field {
 public:
  Field() = default;

  Field(const Grid1D& x, int n_conserved, int n_dissipative) : x_(x) {
    x_.validate();
    cells_.assign(static_cast<std::size_t>(x_.n_cells), StateVector(n_conserved, n_dissipative));
  }

  Field(const Grid1D& x, const Grid1D& y, int n_conserved, int n_dissipative) : x_(x), y_(y) {
    x_.validate();
    y_->validate();
    cells_.assign(static_cast<std::size_t>(x_.n_cells) * static_cast<std::size_t>(y_->n_cells),
                  StateVector(n_conserved, n_dissipative));
  }

  int dim() const { return y_ ? 2 : 1; }
  int nx() const { return x_.n_cells; }
  int ny() const { return y_ ? y_->n_cells : 1; }
  int cell_count() const { return static_cast<int>(cells_.size()); }
  const Grid1D& x_axis() const { return x_; }
  const std::optional<Grid1D>& y_axis() const { return y_; }
  double spacing(int direction) const { return direction == 0 ? x_.dx() : y_->dx(); }
  double cell_volume() const { return x_.dx() * (y_ ? y_->dx() : 1.0); }

  int index(int i, int j = 0) const { return j * nx() + i; }
  StateVector& at(int i, int j = 0) { return cells_[static_cast<std::size_t>(index(i, j))]; }
  const StateVector& at(int i, int j = 0) const { return cells_[static_cast<std::size_t>(index(i, j))]; }

  std::vector<StateVector>& cells() { return cells_; }
  const std::vector<StateVector>& cells() const { return cells_; }

  /// Component k of every cell, in storage order.
  std::vector<double> component(int k) const {
    std::vector<double> out;
    out.reserve(cells_.size());
    for (const auto& c : cells_) out.push_back(c[k]);
    return out;
  }

 private:
  Grid1D x_;
  std::optional<Grid1D> y_;
  std::vector<StateVector> cells_;
};

/// Fills a field by evaluating `init(x, y)` at cell centres (y = 0 in 1D).
inline Field sample_field(Field field, const std::function<StateVector(double, double)>& init) {
  for (int j = 0; j < field.ny(); ++j) {
    const double y = field.y_axis() ? field.y_axis()->center(j) : 0.0;
    for (int i = 0; i < field.nx(); ++i) field.at(i, j) = init(field.x_axis().center(i), y);
  }
  return field;
}

}  // namespace cdf
