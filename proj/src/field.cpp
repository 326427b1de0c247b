#include "dualflow/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dualflow {

Field::Field(const SpaceTimeGrid& grid, int comps, double fill)
    : grid_(grid), comps_(comps) {
  if (comps <= 0) throw std::invalid_argument("field: comps must be positive");
  data_.assign(static_cast<size_t>(grid.nodes()) * comps, fill);
}

bool Field::finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Field::require_finite(const std::string& what) const {
  if (!finite()) throw std::runtime_error(what + ": non-finite field entries");
}

Field& Field::operator+=(const Field& o) {
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Field& Field::operator-=(const Field& o) {
  for (size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Field& Field::operator*=(double c) {
  for (double& v : data_) v *= c;
  return *this;
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

Field make_vector_field(const SpaceTimeGrid& g, double fill) {
  return Field(g, g.config().tensor_dim(), fill);
}

Field make_player_field(const SpaceTimeGrid& g, double fill) {
  return Field(g, g.config().players(), fill);
}

Field make_matrix_field(const SpaceTimeGrid& g, double fill) {
  const int n = g.config().tensor_dim();
  return Field(g, n * n, fill);
}

std::vector<double> trapezoid_weights(const SpaceTimeGrid& g) {
  std::vector<double> w(g.nt(), g.dt());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

static void check_same(const Field& f, const Field& g) {
  if (!f.grid().same_as(g.grid()) || f.comps() != g.comps()) {
    throw std::invalid_argument("field mismatch: different grid or components");
  }
}

double inner_space(const Field& f, const Field& g, int t) {
  check_same(f, g);
  const double* a = f.slice(t);
  const double* b = g.slice(t);
  const int64_t count = f.grid().space_points() * f.comps();
  double acc = 0.0;
  for (int64_t i = 0; i < count; ++i) acc += a[i] * b[i];
  return acc * f.grid().cell_measure();
}

double inner_spacetime(const Field& f, const Field& g) {
  check_same(f, g);
  const auto w = trapezoid_weights(f.grid());
  double acc = 0.0;
  for (int t = 0; t < f.grid().nt(); ++t) acc += w[t] * inner_space(f, g, t);
  return acc;
}

std::vector<double> average_Pi(const Field& f, int t) {
  std::vector<double> mean(f.comps(), 0.0);
  const double* a = f.slice(t);
  const int64_t sp = f.grid().space_points();
  for (int64_t s = 0; s < sp; ++s) {
    for (int c = 0; c < f.comps(); ++c) mean[c] += a[s * f.comps() + c];
  }
  for (double& v : mean) v /= static_cast<double>(sp);
  return mean;
}

Field project_average(const Field& f) {
  Field out(f.grid(), f.comps());
  const int64_t sp = f.grid().space_points();
  for (int t = 0; t < f.grid().nt(); ++t) {
    const auto mean = average_Pi(f, t);
    double* o = out.slice(t);
    for (int64_t s = 0; s < sp; ++s) {
      for (int c = 0; c < f.comps(); ++c) o[s * f.comps() + c] = mean[c];
    }
  }
  return out;
}

}  // namespace dualflow
