#include "dualflow/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace dualflow {

SpaceTimeGrid::SpaceTimeGrid(const PlayerConfig& cfg, double T, int nt, int nx)
    : cfg_(cfg), T_(T), nt_(nt), nx_(nx) {
  if (T <= 0.0) throw std::invalid_argument("grid: T must be positive");
  if (nt < 3) throw std::invalid_argument("grid: need at least 3 time nodes");
  if (nx < 4 || nx % 2 != 0) {
    throw std::invalid_argument("grid: nx must be even and >= 4");
  }
  space_points_ = 1;
  for (int d = 0; d < cfg_.space_dim(); ++d) space_points_ *= nx_;
  cell_measure_ = std::pow(1.0 / nx_, cfg_.space_dim());
}

int SpaceTimeGrid::spatial_coord(int64_t s, int dim) const {
  const int m = cfg_.space_dim();
  int64_t stride = 1;
  for (int d = dim + 1; d < m; ++d) stride *= nx_;
  return static_cast<int>((s / stride) % nx_);
}

}  // namespace dualflow
