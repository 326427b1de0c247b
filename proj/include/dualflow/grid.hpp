#pragma once

#include <cstdint>

#include "dualflow/operators.hpp"

namespace dualflow {

// Uniform grid on the unit torus per spatial dimension (measure 1 total)
// times a non-periodic interval [0,T].
class SpaceTimeGrid {
 public:
  SpaceTimeGrid(const PlayerConfig& cfg, double T, int nt, int nx);

  const PlayerConfig& config() const { return cfg_; }
  double horizon() const { return T_; }
  int nt() const { return nt_; }
  int nx() const { return nx_; }
  int space_dim() const { return cfg_.space_dim(); }

  double dt() const { return T_ / (nt_ - 1); }
  double dx() const { return 1.0 / nx_; }
  double time_at(int t) const { return t * dt(); }

  int64_t space_points() const { return space_points_; }
  int64_t nodes() const { return space_points_ * nt_; }
  double cell_measure() const { return cell_measure_; }  // dx^m

  // spatial index decomposition, row-major over dimensions
  int spatial_coord(int64_t s, int dim) const;
  double coordinate(int64_t s, int dim) const {
    return spatial_coord(s, dim) * dx();
  }

  bool same_as(const SpaceTimeGrid& o) const {
    return T_ == o.T_ && nt_ == o.nt_ && nx_ == o.nx_ &&
           cfg_.players() == o.cfg_.players() &&
           cfg_.state_dim() == o.cfg_.state_dim();
  }

 private:
  PlayerConfig cfg_;
  double T_;
  int nt_;
  int nx_;
  int64_t space_points_;
  double cell_measure_;
};

}  // namespace dualflow
