#include "nfpto/grid.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace nfpto {

void CellGrid::validate() const {
  if (nelx < 1 || nely < 1)
    throw std::invalid_argument("grid: nelx and nely must be >= 1, got " +
                                std::to_string(nelx) + "x" +
                                std::to_string(nely));
  if (dummy_bottom < 0 || dummy_top < 0)
    throw std::invalid_argument("grid: dummy row counts must be >= 0");
  if (!(cell_area > 0.0))
    throw std::invalid_argument("grid: cell_area must be positive");
}

bool NeighborhoodTopology::contains(int cell, int other) const {
  const auto m = members_of(cell);
  return std::binary_search(m.begin(), m.end(), other);
}

NeighborhoodTopology build_neighborhoods(const CellGrid& grid, int ls) {
  grid.validate();
  if (ls < 1) throw std::invalid_argument("neighborhood: ls must be >= 1");

  const int rows = grid.total_rows();
  const int n = grid.cell_count();
  const int w = 2 * ls + 1;

  NeighborhoodTopology topo;
  topo.grid = grid;
  topo.ls = ls;
  topo.d_interior = w * w;
  topo.offsets.resize(n + 1, 0);
  topo.delta_area.resize(n);
  topo.members.reserve(static_cast<size_t>(n) * w * w);
  topo.window_covers_domain = (w >= grid.nelx) && (w >= rows);

  for (int cx = 0; cx < grid.nelx; ++cx) {
    const int x0 = std::max(0, cx - ls);
    const int x1 = std::min(grid.nelx - 1, cx + ls);
    for (int cy = 0; cy < rows; ++cy) {
      const int y0 = std::max(0, cy - ls);
      const int y1 = std::min(rows - 1, cy + ls);
      const int cell = grid.cell_index(cx, cy);
      for (int wx = x0; wx <= x1; ++wx)
        for (int wy = y0; wy <= y1; ++wy)
          topo.members.push_back(grid.cell_index(wx, wy));
      topo.offsets[cell + 1] = static_cast<int>(topo.members.size());
      topo.delta_area[cell] =
          static_cast<double>((x1 - x0 + 1) * (y1 - y0 + 1)) * grid.cell_area;
    }
  }
  return topo;
}

}  // namespace nfpto
