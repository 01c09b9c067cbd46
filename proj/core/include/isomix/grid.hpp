#pragma once

#include <cstddef>

#include "isomix/frame.hpp"

namespace isomix {

/// Uniform cell-centered grid on [0, L]. Ghost values are never stored; the
/// boundary closures are applied inside the stencils.
class Grid1D {
 public:
  /// Throws ValidationError unless n_cells >= 8 and length > 0.
  Grid1D(std::size_t n_cells, double length);

  std::size_t n_cells() const noexcept { return n_cells_; }
  double length() const noexcept { return length_; }
  double dx() const noexcept { return dx_; }
  double center(std::size_t i) const noexcept { return (static_cast<double>(i) + 0.5) * dx_; }
  /// Position of face i, i = 0..n_cells; faces 0 and n_cells are the walls.
  double face(std::size_t i) const noexcept { return static_cast<double>(i) * dx_; }

 private:
  std::size_t n_cells_;
  double length_;
  double dx_;
};

/// Grid fields evolved by the solver. q stores one column per cell.
struct DiscreteState {
  Vector varrho;
  Matrix q;  // (N-2) x n_cells
  Vector zeta;
  Vector v;
  double time = 0.0;

  std::size_t n_cells() const noexcept { return static_cast<std::size_t>(varrho.size()); }
};

}  // namespace isomix
