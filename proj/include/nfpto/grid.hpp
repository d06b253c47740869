#pragma once

#include <span>
#include <vector>

namespace nfpto {

// Uniform grid of unit-square cells. Cell (cx, cy) with cy = 0 at the bottom;
// dummy rows (no design variables, density only) sit below / above the design
// rows. Cell ids run column-major: id = cx * total_rows() + cy.
struct CellGrid {
  int nelx = 1;  // columns
  int nely = 1;  // design rows
  int dummy_bottom = 0;
  int dummy_top = 0;
  double cell_area = 1.0;

  int total_rows() const { return nely + dummy_bottom + dummy_top; }
  int cell_count() const { return nelx * total_rows(); }
  int design_count() const { return nelx * nely; }

  int cell_index(int cx, int cy) const { return cx * total_rows() + cy; }
  int cell_x(int cell) const { return cell / total_rows(); }
  int cell_y(int cell) const { return cell % total_rows(); }

  bool is_design_cell(int cell) const {
    const int cy = cell_y(cell);
    return cy >= dummy_bottom && cy < dummy_bottom + nely;
  }
  // Compact index into the design vector, -1 for dummy cells.
  int design_index(int cell) const {
    if (!is_design_cell(cell)) return -1;
    return cell_x(cell) * nely + (cell_y(cell) - dummy_bottom);
  }
  int design_cell(int design) const {
    const int cx = design / nely;
    const int cy = design % nely + dummy_bottom;
    return cell_index(cx, cy);
  }

  void validate() const;  // throws std::invalid_argument on bad dimensions
};

// Square window membership sets, one per cell. For point-symmetric square
// windows on a rectangular grid the influence set D_i and the neighborhood
// N_i coincide, including boundary-truncated windows, so a single CSR table
// serves both. Members are stored in ascending cell-id order.
struct NeighborhoodTopology {
  CellGrid grid;
  int ls = 1;
  int d_interior = 9;  // (2*ls+1)^2, interior |D_i|
  std::vector<int> offsets;
  std::vector<int> members;
  std::vector<double> delta_area;  // A(Delta_i) = sum of member cell areas
  bool window_covers_domain = false;

  std::span<const int> members_of(int cell) const {
    return {members.data() + offsets[cell],
            members.data() + offsets[cell + 1]};
  }
  int member_count(int cell) const { return offsets[cell + 1] - offsets[cell]; }
  bool contains(int cell, int other) const;
};

// ls >= 1; windows are clamped at the grid boundary. Sets window_covers_domain
// when at least one window spans every cell (legal, but worth surfacing).
NeighborhoodTopology build_neighborhoods(const CellGrid& grid, int ls);

}  // namespace nfpto
