#include "dualflow/hj.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dualflow/threading.hpp"

namespace dualflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// in-place transform of a scalar spatial array along one dimension
void transform_dim(const SpaceTimeGrid& g, const Eigen::MatrixXd& mat, int dim,
                   std::vector<double>& v) {
  const int nx = g.nx();
  int64_t stride = 1;
  for (int d = dim + 1; d < g.space_dim(); ++d) stride *= nx;
  const int64_t outer_count = g.space_points() / (stride * nx);
  std::vector<double> x(nx), y(nx);
  for (int64_t outer = 0; outer < outer_count; ++outer) {
    const int64_t base = outer * stride * nx;
    for (int64_t inner = 0; inner < stride; ++inner) {
      for (int q = 0; q < nx; ++q) x[q] = v[base + q * stride + inner];
      for (int r = 0; r < nx; ++r) {
        double acc = 0.0;
        for (int q = 0; q < nx; ++q) acc += mat(r, q) * x[q];
        y[r] = acc;
      }
      for (int q = 0; q < nx; ++q) v[base + q * stride + inner] = y[q];
    }
  }
}

// continuous extension of the orthonormal grid basis column c at position x
double basis_value(int nx, int c, double x) {
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(nx));
  if (c == 0) return inv_sqrt;
  if (c == nx - 1) return inv_sqrt * std::cos(std::numbers::pi * nx * x);
  const double amp = std::sqrt(2.0 / nx);
  const int k = (c + 1) / 2;
  const double arg = kTwoPi * k * x;
  return (c % 2 == 1) ? amp * std::cos(arg) : amp * std::sin(arg);
}

// a(t) = -int_t^T e, cumulative fourth-order (cubic through four nodes per
// interval); higher order than the generic trapezoid helper so the
// consistency study isolates the machinery's own discretization error
Field integrate_from_terminal_cubic(const Field& e) {
  const SpaceTimeGrid& g = e.grid();
  const int nt = g.nt();
  const int64_t line = g.space_points() * e.comps();
  const double dt = g.dt();
  if (nt < 4) return integrate_from_terminal(e);
  Field a(g, e.comps());

  // per-interval quadrature: dt/24 * (w0,w1,w2,w3) on stencil nodes
  std::vector<double> acc(line, 0.0);
  for (int k = nt - 2; k >= 0; --k) {
    int base;
    double w0, w1, w2, w3;
    if (k == 0) {
      base = 0;
      w0 = 9.0; w1 = 19.0; w2 = -5.0; w3 = 1.0;
    } else if (k == nt - 2) {
      base = nt - 4;
      w0 = 1.0; w1 = -5.0; w2 = 19.0; w3 = 9.0;
    } else {
      base = k - 1;
      w0 = -1.0; w1 = 13.0; w2 = 13.0; w3 = -1.0;
    }
    const double* f0 = e.slice(base);
    const double* f1 = e.slice(base + 1);
    const double* f2 = e.slice(base + 2);
    const double* f3 = e.slice(base + 3);
    const double c = dt / 24.0;
    for (int64_t i = 0; i < line; ++i) {
      acc[i] += c * (w0 * f0[i] + w1 * f1[i] + w2 * f2[i] + w3 * f3[i]);
    }
    double* as = a.slice(k);
    for (int64_t i = 0; i < line; ++i) as[i] = -acc[i];
  }
  return a;
}

}  // namespace

TrigInterpolant::TrigInterpolant(const SpaceTimeGrid& grid,
                                 std::vector<double> samples)
    : nx_(grid.nx()),
      m_(grid.space_dim()),
      sp_(grid.space_points()),
      coef_(std::move(samples)),
      grid_(&grid) {
  if (static_cast<int64_t>(coef_.size()) != sp_) {
    throw std::invalid_argument("TrigInterpolant: sample size mismatch");
  }
  const auto& ops = SpectralOps::get(nx_);
  const Eigen::MatrixXd bt = ops.basis().transpose();
  for (int d = 0; d < m_; ++d) transform_dim(grid, bt, d, coef_);
}

double TrigInterpolant::value(const std::vector<double>& x) const {
  double acc = 0.0;
  for (int64_t s = 0; s < sp_; ++s) {
    double term = coef_[s];
    if (term == 0.0) continue;
    for (int d = 0; d < m_; ++d) {
      term *= basis_value(nx_, grid_->spatial_coord(s, d), x[d]);
    }
    acc += term;
  }
  return acc;
}

std::vector<double> hopf_lax_slice(const std::vector<double>& psi_star,
                                   double t, const SpaceTimeGrid& grid) {
  if (t <= 0.0) throw std::invalid_argument("hopf_lax requires t > 0");
  const int m = grid.space_dim();
  const int64_t sp = grid.space_points();
  if (static_cast<int64_t>(psi_star.size()) != sp) {
    throw std::invalid_argument("hopf_lax: sample size mismatch");
  }
  const TrigInterpolant interp(grid, psi_star);
  const double dx = grid.dx();

  int64_t n_shift = 1;
  for (int d = 0; d < m; ++d) n_shift *= 3;

  std::vector<double> out(sp);
  parallel_for(sp, [&](int64_t lo, int64_t hi) {
    std::vector<double> xv(m), yv(m), trial(m);
    for (int64_t target = lo; target < hi; ++target) {
      for (int d = 0; d < m; ++d) xv[d] = grid.coordinate(target, d);

      // coarse scan over grid nodes and their periodic copies
      double best = 1e300;
      for (int64_t s = 0; s < sp; ++s) {
        for (int64_t sh = 0; sh < n_shift; ++sh) {
          double quad = 0.0;
          int64_t rem = sh;
          for (int d = 0; d < m; ++d) {
            const double y =
                grid.coordinate(s, d) + (static_cast<int>(rem % 3) - 1);
            rem /= 3;
            quad += (xv[d] - y) * (xv[d] - y);
          }
          const double f = psi_star[s] + quad / (2.0 * t);
          if (f < best) {
            best = f;
            int64_t rem2 = sh;
            for (int d = 0; d < m; ++d) {
              yv[d] = grid.coordinate(s, d) + (static_cast<int>(rem2 % 3) - 1);
              rem2 /= 3;
            }
          }
        }
      }

      // polish by iterated per-dimension quadratic fits with shrinking span
      auto eval = [&](const std::vector<double>& y) {
        double quad = 0.0;
        for (int d = 0; d < m; ++d) quad += (xv[d] - y[d]) * (xv[d] - y[d]);
        return interp.value(y) + quad / (2.0 * t);
      };
      double h = dx;
      double f0 = eval(yv);
      for (int iter = 0; iter < 70 && h > 1e-13; ++iter) {
        for (int d = 0; d < m; ++d) {
          trial = yv;
          trial[d] = yv[d] + h;
          const double fp = eval(trial);
          trial[d] = yv[d] - h;
          const double fm = eval(trial);
          const double denom = fp + fm - 2.0 * f0;
          if (denom > 1e-300) {
            double delta = 0.5 * h * (fm - fp) / denom;
            delta = std::clamp(delta, -h, h);
            trial[d] = yv[d] + delta;
            const double fd = eval(trial);
            if (fd <= f0) {
              yv[d] = trial[d];
              f0 = fd;
            }
          } else if (fp < f0 || fm < f0) {
            yv[d] += (fp < fm) ? h : -h;
            f0 = std::min(fp, fm);
          }
        }
        h *= 0.7;
      }
      out[target] = std::min(best, f0);
    }
  });
  return out;
}

Field hopf_lax_potential(const std::vector<double>& psi_star,
                         const SpaceTimeGrid& grid) {
  Field psi = make_player_field(grid);
  if (grid.config().players() != 1) {
    throw std::invalid_argument("hopf_lax_potential is single-player");
  }
  const int64_t sp = grid.space_points();
  std::copy(psi_star.begin(), psi_star.end(), psi.slice(0));
  for (int t = 1; t < grid.nt(); ++t) {
    std::vector<double> slice = hopf_lax_slice(psi_star, grid.time_at(t), grid);
    std::copy(slice.begin(), slice.end(), psi.slice(t));
  }
  (void)sp;
  return psi;
}

Field velocity_from_potential(const Field& psi) { return spatial_gradient(psi); }

TransportDensity solve_transport_backward(const Field& u) {
  const SpaceTimeGrid& g = u.grid();
  const auto& cfg = g.config();
  if (cfg.players() != 1) {
    throw std::invalid_argument("transport solver is single-player");
  }
  const int m = g.space_dim();
  const int n = cfg.tensor_dim();
  const int64_t sp = g.space_points();
  const int nx = g.nx();
  const double dx = g.dx();
  const double dt = g.dt();

  TransportDensity out;
  out.rho = make_player_field(g);
  std::vector<double> rho(sp, 1.0);
  std::copy(rho.begin(), rho.end(), out.rho.slice(g.nt() - 1));
  out.min_rho = 1.0;
  out.mass_error = 0.0;

  // conservative divergence of rho * w, MUSCL + local Lax-Friedrichs
  auto divergence = [&](const std::vector<double>& r,
                        const std::vector<double>& w,
                        std::vector<double>& div) {
    std::fill(div.begin(), div.end(), 0.0);
    std::vector<double> line(nx), vel(nx), slope(nx), flux(nx);
    for (int d = 0; d < m; ++d) {
      int64_t stride = 1;
      for (int dd = d + 1; dd < m; ++dd) stride *= nx;
      const int64_t outer_count = sp / (stride * nx);
      for (int64_t outer = 0; outer < outer_count; ++outer) {
        const int64_t base = outer * stride * nx;
        for (int64_t inner = 0; inner < stride; ++inner) {
          for (int q = 0; q < nx; ++q) {
            const int64_t node = base + q * stride + inner;
            line[q] = r[node];
            vel[q] = w[node * n + d];
          }
          for (int q = 0; q < nx; ++q) {
            const int qp = (q + 1) % nx;
            const int qm = (q + nx - 1) % nx;
            // central slope, scaled back only as far as positivity of the
            // reconstructed face values requires (second order at extrema)
            double s = 0.5 * (line[qp] - line[qm]);
            const double cap = 2.0 * std::max(line[q], 0.0);
            if (std::abs(s) > cap) s = (s > 0.0 ? cap : -cap);
            slope[q] = s;
          }
          for (int q = 0; q < nx; ++q) {
            const int qp = (q + 1) % nx;
            const double uf = 0.5 * (vel[q] + vel[qp]);
            const double rl = line[q] + 0.5 * slope[q];
            const double rr = line[qp] - 0.5 * slope[qp];
            flux[q] = 0.5 * uf * (rl + rr) - 0.5 * std::abs(uf) * (rr - rl);
          }
          for (int q = 0; q < nx; ++q) {
            const int qm = (q + nx - 1) % nx;
            div[base + q * stride + inner] += (flux[q] - flux[qm]) / dx;
          }
        }
      }
    }
  };

  std::vector<double> w(sp * n), div(sp), stage(sp);
  for (int k = g.nt() - 1; k >= 1; --k) {
    const double* u_hi = u.slice(k);      // current backward-time start (t_k)
    const double* u_lo = u.slice(k - 1);  // target slice (t_{k-1})
    double vmax = 0.0;
    for (int64_t i = 0; i < sp * n; ++i) {
      vmax = std::max(vmax, std::max(std::abs(u_hi[i]), std::abs(u_lo[i])));
    }
    const int nsub =
        std::max<int>(1, static_cast<int>(std::ceil(vmax * dt / (0.4 * dx))));
    const double h = dt / nsub;

    for (int sub = 0; sub < nsub; ++sub) {
      // backward velocity -u, linearly interpolated between the time slices
      auto load_w = [&](double frac) {
        for (int64_t i = 0; i < sp * n; ++i) {
          w[i] = -((1.0 - frac) * u_hi[i] + frac * u_lo[i]);
        }
      };
      const double f0 = static_cast<double>(sub) / nsub;
      const double f1 = static_cast<double>(sub + 1) / nsub;

      load_w(f0);
      divergence(rho, w, div);
      for (int64_t s = 0; s < sp; ++s) stage[s] = rho[s] - h * div[s];
      load_w(f1);
      divergence(stage, w, div);
      for (int64_t s = 0; s < sp; ++s) {
        rho[s] = 0.5 * rho[s] + 0.5 * (stage[s] - h * div[s]);
      }
    }

    double mass = 0.0;
    double mn = 1e300;
    for (int64_t s = 0; s < sp; ++s) {
      mass += rho[s];
      mn = std::min(mn, rho[s]);
    }
    mass *= g.cell_measure();
    out.mass_error = std::max(out.mass_error, std::abs(mass - 1.0));
    out.min_rho = std::min(out.min_rho, mn);
    if (mn < 1e-10) {
      throw std::runtime_error("transport density lost positivity");
    }
    std::copy(rho.begin(), rho.end(), out.rho.slice(k - 1));
  }
  return out;
}

std::vector<LadderMember> build_base_state_ladder(
    const Field& v, const std::vector<double>& sigmas) {
  const SpaceTimeGrid& g = v.grid();
  const int n = g.config().tensor_dim();
  const int64_t sp = g.space_points();
  const auto wt = trapezoid_weights(g);

  std::vector<LadderMember> members;
  members.reserve(sigmas.size());
  for (double sigma : sigmas) {
    LadderMember mem;
    mem.sigma = sigma;
    mem.u = mollify(v, sigma);
    TransportDensity td = solve_transport_backward(mem.u);
    mem.rho = std::move(td.rho);
    mem.min_rho = td.min_rho;

    mem.vbar = Field(g, n);
    mem.g = make_matrix_field(g);
    double l1 = 0.0;
    for (int t = 0; t < g.nt(); ++t) {
      const double* rs = mem.rho.slice(t);
      const double* vs = v.slice(t);
      const double* us = mem.u.slice(t);
      double* vb = mem.vbar.slice(t);
      double* gm = mem.g.slice(t);
      double slice_l1 = 0.0;
      for (int64_t s = 0; s < sp; ++s) {
        const double rho = rs[s];
        double norm2 = 0.0;
        for (int c = 0; c < n; ++c) {
          const double val = rho * (vs[s * n + c] - us[s * n + c]);
          vb[s * n + c] = val;
          norm2 += val * val;
          gm[s * n * n + c * n + c] = rho;
        }
        slice_l1 += std::sqrt(norm2);
      }
      l1 += wt[t] * slice_l1 * g.cell_measure();
    }
    mem.l1_vbar = l1;
    members.push_back(std::move(mem));
  }
  return members;
}

ConsistencyReport verify_consistency(const Field& v, const Field& g_density,
                                     const Field& u, const Field& v0) {
  const SpaceTimeGrid& g = v.grid();
  const int n = g.config().tensor_dim();
  const int64_t nodes = g.nodes();
  constexpr double kMarginFloor = 1e-8;

  ConsistencyReport rep;
  ConsistentDual cd = construct_consistent_dual(v, g_density, u);
  rep.constraint_res = constraint_residual(cd.e, cd.b);

  const DtPZoneReport zone = zone_margin(cd.b, kMarginFloor);
  rep.min_margin = zone.min_margin;

  auto masked_sup = [&](const Field& recovered,
                        const std::vector<double>& margins) {
    double sup = 0.0;
    for (int64_t node = 0; node < nodes; ++node) {
      if (margins[node] <= kMarginFloor) continue;
      for (int c = 0; c < n; ++c) {
        sup = std::max(sup, std::abs(recovered.data()[node * n + c] -
                                     v.data()[node * n + c]));
      }
    }
    return sup;
  };

  Field raw = dtp_map(cd.e, cd.b, cd.vbar, kMarginFloor, 1.0);
  rep.recovery_raw = masked_sup(raw, zone.margin_field);

  // Two induced dual states with a(T)=0. The smooth one (cumulative integral
  // of E+) feeds the dual-to-primal recovery. The projected one, whose
  // discrete time derivative is the weighted-least-squares match to E+,
  // feeds the duality gap: a plain integral leaves first-order end-row
  // mismatches in D a - E+ that pollute the gap's second-order convergence,
  // while the projection may carry a harmless-for-integrals but
  // recovery-visible alternating component.
  Field a_smooth = integrate_from_terminal_cubic(cd.e);
  Field a(g, n);
  {
    const TimeOps& tops = TimeOps::get(g.nt(), g.horizon());
    const int nt = g.nt();
    const Eigen::MatrixXd& d_mat = tops.deriv(TimeStencil::pairing);
    Eigen::VectorXd wsqrt = tops.weights().array().sqrt();
    const Eigen::MatrixXd lhs = wsqrt.asDiagonal() * d_mat.leftCols(nt - 1);
    const Eigen::MatrixXd solver =
        (lhs.transpose() * lhs)
            .ldlt()
            .solve(lhs.transpose() * wsqrt.asDiagonal().toDenseMatrix());
    const int64_t sp = g.space_points();
    Eigen::VectorXd e_line(nt), a_line(nt - 1);
    for (int64_t s = 0; s < sp; ++s) {
      for (int c = 0; c < n; ++c) {
        for (int t = 0; t < nt; ++t) e_line(t) = cd.e.at(t, s, c);
        a_line = solver * e_line;
        for (int t = 0; t < nt - 1; ++t) a.at(t, s, c) = a_line(t);
      }
    }
  }
  Field e_prime = time_derivative(a_smooth, TimeStencil::diagnostic);
  Field b_prime = apply_L_adjoint(a_smooth);
  const DtPZoneReport zone_prime = zone_margin(b_prime, kMarginFloor);
  Field rec = dtp_map(e_prime, b_prime, cd.vbar, kMarginFloor, 1.0);
  rep.recovery_err = masked_sup(rec, zone_prime.margin_field);

  NashDualProblem problem(g, v0, cd.vbar);
  const double dual = problem.dual_objective(a);
  const GapReport gap = duality_gap(v, cd.vbar, dual);
  rep.primal = gap.primal;
  rep.dual = gap.dual;
  rep.gap = gap.gap;
  return rep;
}

}  // namespace dualflow
