#include "epidiff/grid.hpp"

namespace epidiff {

std::shared_ptr<const Grid> Grid::build(int n_cells, double x_lo, double x_hi) {
  if (n_cells < 4) throw std::invalid_argument("Grid: need at least 4 cells");
  if (!(x_hi > x_lo)) throw std::invalid_argument("Grid: empty extent");
  auto g = std::make_shared<Grid>();
  g->n_cells = n_cells;
  g->x_lo = x_lo;
  g->x_hi = x_hi;
  g->dx = (x_hi - x_lo) / n_cells;
  g->faces.resize(n_cells + 1);
  g->centers.resize(n_cells);
  for (int j = 0; j <= n_cells; ++j)
    g->faces[j] = x_lo + (x_hi - x_lo) * static_cast<double>(j) / n_cells;
  for (int i = 0; i < n_cells; ++i) g->centers[i] = 0.5 * (g->faces[i] + g->faces[i + 1]);
  return g;
}

Field Field::from_function(std::shared_ptr<const Grid> g,
                           const std::function<double(double)>& fn, double t) {
  std::vector<double> v(g->n_cells);
  for (int i = 0; i < g->n_cells; ++i) v[i] = fn(g->centers[i]);
  return Field(std::move(g), std::move(v), t);
}

}  // namespace epidiff
