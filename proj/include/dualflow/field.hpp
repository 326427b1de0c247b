#pragma once

#include <string>
#include <vector>

#include "dualflow/grid.hpp"

namespace dualflow {

// Dense space-time field with a fixed number of components per node.
// Layout: [t][spatial node][component], contiguous doubles.
// Vector fields carry n = p*N^2 components, player fields N, symmetric
// matrix fields n*n (stored full; symmetry maintained by the operations).
class Field {
 public:
  Field() = default;
  Field(const SpaceTimeGrid& grid, int comps, double fill = 0.0);

  const SpaceTimeGrid& grid() const { return grid_; }
  int comps() const { return comps_; }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }

  double& at(int t, int64_t s, int c) {
    return data_[(t * grid_.space_points() + s) * comps_ + c];
  }
  double at(int t, int64_t s, int c) const {
    return data_[(t * grid_.space_points() + s) * comps_ + c];
  }

  double* slice(int t) { return data_.data() + t * grid_.space_points() * comps_; }
  const double* slice(int t) const {
    return data_.data() + t * grid_.space_points() * comps_;
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool finite() const;
  void require_finite(const std::string& what) const;

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double c);

  double max_abs() const;

 private:
  SpaceTimeGrid grid_{PlayerConfig(1, 1), 1.0, 3, 4};
  int comps_ = 0;
  std::vector<double> data_;
};

Field make_vector_field(const SpaceTimeGrid& g, double fill = 0.0);
Field make_player_field(const SpaceTimeGrid& g, double fill = 0.0);
Field make_matrix_field(const SpaceTimeGrid& g, double fill = 0.0);

// trapezoid weights over [0,T]: dt*(1/2,1,...,1,1/2)
std::vector<double> trapezoid_weights(const SpaceTimeGrid& g);

// spatial inner product at one time slice: sum_nodes f.g * dx^m
double inner_space(const Field& f, const Field& g, int t);

// trapezoid-in-time of inner_space; the Hilbert inner product of the flow
double inner_spacetime(const Field& f, const Field& g);

// spatial mean per component at one time slice
std::vector<double> average_Pi(const Field& f, int t);

// replaces every spatial slice by its mean (projection onto constants)
Field project_average(const Field& f);

}  // namespace dualflow
