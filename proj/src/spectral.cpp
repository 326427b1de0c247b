#include "dualflow/spectral.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "dualflow/threading.hpp"
#include "dualflow/time_ops.hpp"

namespace dualflow {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

SpectralOps::SpectralOps(int nx) : nx_(nx) {
  if (nx < 4 || nx % 2 != 0) {
    throw std::invalid_argument("spectral ops: nx must be even and >= 4");
  }
  basis_ = Eigen::MatrixXd::Zero(nx, nx);
  freq_.assign(nx, 0);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(nx));
  const double amp = std::sqrt(2.0 / nx);
  for (int j = 0; j < nx; ++j) basis_(j, 0) = inv_sqrt;
  for (int k = 1; k < nx / 2; ++k) {
    for (int j = 0; j < nx; ++j) {
      const double arg = kTwoPi * k * j / nx;
      basis_(j, 2 * k - 1) = amp * std::cos(arg);
      basis_(j, 2 * k) = amp * std::sin(arg);
    }
    freq_[2 * k - 1] = k;
    freq_[2 * k] = k;
  }
  for (int j = 0; j < nx; ++j) {
    basis_(j, nx - 1) = inv_sqrt * (j % 2 == 0 ? 1.0 : -1.0);
  }
  freq_[nx - 1] = nx / 2;

  // d/dx in the real basis: cos_k' = -2*pi*k sin_k, sin_k' = 2*pi*k cos_k;
  // constant and Nyquist modes are annihilated, so deriv_ is antisymmetric.
  deriv_ = Eigen::MatrixXd::Zero(nx, nx);
  for (int k = 1; k < nx / 2; ++k) {
    const double om = kTwoPi * k;
    deriv_ += om * (basis_.col(2 * k - 1) * basis_.col(2 * k).transpose() -
                    basis_.col(2 * k) * basis_.col(2 * k - 1).transpose());
  }
  deriv_ = (0.5 * (deriv_ - deriv_.transpose())).eval();
}

Eigen::MatrixXd SpectralOps::multiplier(
    const std::function<double(int)>& g) const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(nx_, nx_);
  for (int c = 0; c < nx_; ++c) {
    m += g(freq_[c]) * basis_.col(c) * basis_.col(c).transpose();
  }
  return m;
}

const SpectralOps& SpectralOps::get(int nx) {
  static std::map<int, std::unique_ptr<SpectralOps>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[nx];
  if (!slot) slot = std::make_unique<SpectralOps>(nx);
  return *slot;
}

namespace {

// Applies M along spatial dimension dim, component ci of `in` into component
// co of `out`, for one time slice. scale multiplies the result; accumulate
// adds instead of overwriting.
void apply_dim_slice(const SpaceTimeGrid& g, const Eigen::MatrixXd& mat,
                     int dim, const double* in, int ci_comps, int ci,
                     double* out, int co_comps, int co, bool accumulate,
                     double scale) {
  const int nx = g.nx();
  const int m = g.space_dim();
  int64_t stride = 1;
  for (int d = dim + 1; d < m; ++d) stride *= nx;
  const int64_t outer_count = g.space_points() / (stride * nx);

  std::vector<double> x(nx), y(nx);
  for (int64_t outer = 0; outer < outer_count; ++outer) {
    const int64_t base = outer * stride * nx;
    for (int64_t inner = 0; inner < stride; ++inner) {
      for (int q = 0; q < nx; ++q) {
        x[q] = in[(base + q * stride + inner) * ci_comps + ci];
      }
      for (int r = 0; r < nx; ++r) {
        double acc = 0.0;
        for (int q = 0; q < nx; ++q) acc += mat(r, q) * x[q];
        y[r] = acc * scale;
      }
      for (int q = 0; q < nx; ++q) {
        double& o = out[(base + q * stride + inner) * co_comps + co];
        if (accumulate) {
          o += y[q];
        } else {
          o = y[q];
        }
      }
    }
  }
}

}  // namespace

Field spatial_gradient(const Field& f) {
  const auto& g = f.grid();
  const auto& cfg = g.config();
  if (f.comps() != cfg.players()) {
    throw std::invalid_argument("spatial_gradient expects a player field");
  }
  const auto& ops = SpectralOps::get(g.nx());
  Field out = make_vector_field(g);
  const int m = g.space_dim();
  parallel_for(g.nt(), [&](int64_t lo, int64_t hi) {
    for (int64_t t = lo; t < hi; ++t) {
      for (int i = 0; i < cfg.players(); ++i) {
        for (int d = 0; d < m; ++d) {
          apply_dim_slice(g, ops.deriv(), d, f.slice(t), f.comps(), i,
                          out.slice(t), out.comps(), i * m + d, false, 1.0);
        }
      }
    }
  });
  return out;
}

Field spatial_divergence(const Field& a) {
  const auto& g = a.grid();
  const auto& cfg = g.config();
  if (a.comps() != cfg.tensor_dim()) {
    throw std::invalid_argument("spatial_divergence expects a vector field");
  }
  const auto& ops = SpectralOps::get(g.nx());
  Field out = make_player_field(g);
  const int m = g.space_dim();
  parallel_for(g.nt(), [&](int64_t lo, int64_t hi) {
    for (int64_t t = lo; t < hi; ++t) {
      for (int i = 0; i < cfg.players(); ++i) {
        for (int d = 0; d < m; ++d) {
          apply_dim_slice(g, ops.deriv(), d, a.slice(t), a.comps(), i * m + d,
                          out.slice(t), out.comps(), i, true, 1.0);
        }
      }
    }
  });
  return out;
}

Field apply_U_field(const Field& psi) {
  const auto& g = psi.grid();
  const auto& cfg = g.config();
  const int n = cfg.tensor_dim();
  if (psi.comps() != n * n) {
    throw std::invalid_argument("apply_U_field expects a matrix field");
  }
  const int N = cfg.players();
  const int p = cfg.state_dim();
  Field out = make_player_field(g);
  const int64_t nodes = g.nodes();
  const double* in = psi.data().data();
  double* o = out.data().data();
  parallel_for(nodes, [&](int64_t lo, int64_t hi) {
    for (int64_t node = lo; node < hi; ++node) {
      const double* a = in + node * n * n;
      for (int i = 0; i < N; ++i) {
        double acc = 0.0;
        for (int l = 0; l < p; ++l) {
          const int iil = cfg.vec_index(i, i, l);
          acc += a[iil * n + iil];
          for (int j = 0; j < N; ++j) {
            if (j == i) continue;
            const int jjl = cfg.vec_index(j, j, l);
            const int ijl = cfg.vec_index(i, j, l);
            acc += a[jjl * n + ijl] + a[ijl * n + jjl];
          }
        }
        o[node * N + i] = 0.5 * acc;
      }
    }
  });
  return out;
}

Field apply_U_adjoint_field(const Field& y) {
  const auto& g = y.grid();
  const auto& cfg = g.config();
  const int N = cfg.players();
  const int p = cfg.state_dim();
  const int n = cfg.tensor_dim();
  if (y.comps() != N) {
    throw std::invalid_argument("apply_U_adjoint_field expects a player field");
  }
  Field out = make_matrix_field(g);
  const double* in = y.data().data();
  double* o = out.data().data();
  parallel_for(g.nodes(), [&](int64_t lo, int64_t hi) {
    for (int64_t node = lo; node < hi; ++node) {
      double* z = o + node * n * n;
      const double* yv = in + node * N;
      for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) {
          for (int l = 0; l < p; ++l) {
            const int jjl = cfg.vec_index(j, j, l);
            const int ijl = cfg.vec_index(i, j, l);
            z[jjl * n + ijl] = 0.5 * yv[i];
            z[ijl * n + jjl] = 0.5 * yv[i];
          }
        }
      }
    }
  });
  return out;
}

Field apply_L(const Field& psi) {
  Field grad = spatial_gradient(apply_U_field(psi));
  grad *= -1.0;
  return grad;
}

Field apply_L_adjoint(const Field& a) {
  return apply_U_adjoint_field(spatial_divergence(a));
}

Field recover_potential(const Field& v, double* residual) {
  const auto& g = v.grid();
  const auto& cfg = g.config();
  const auto& ops = SpectralOps::get(g.nx());
  const int m = g.space_dim();
  const int N = cfg.players();

  Field rhs = spatial_divergence(v);
  Field coef = rhs;
  // forward transform along every dimension
  for (int d = 0; d < m; ++d) {
    Field next(g, N);
    for (int t = 0; t < g.nt(); ++t) {
      for (int i = 0; i < N; ++i) {
        apply_dim_slice(g, ops.basis().transpose(), d, coef.slice(t), N, i,
                        next.slice(t), N, i, false, 1.0);
      }
    }
    coef = std::move(next);
  }
  // divide by the Laplacian symbol, zero mode removed
  const int64_t sp = g.space_points();
  for (int t = 0; t < g.nt(); ++t) {
    double* c = coef.slice(t);
    for (int64_t s = 0; s < sp; ++s) {
      double lam = 0.0;
      for (int d = 0; d < m; ++d) {
        // the antisymmetrized derivative annihilates the Nyquist column, so
        // that column contributes nothing to the discrete Laplacian symbol
        const int col = g.spatial_coord(s, d);
        const double f = col == g.nx() - 1 ? 0.0 : ops.freq(col);
        lam -= (kTwoPi * f) * (kTwoPi * f);
      }
      const double inv = lam < -1e-12 ? 1.0 / lam : 0.0;
      for (int i = 0; i < N; ++i) c[s * N + i] *= inv;
    }
  }
  // inverse transform
  for (int d = 0; d < m; ++d) {
    Field next(g, N);
    for (int t = 0; t < g.nt(); ++t) {
      for (int i = 0; i < N; ++i) {
        apply_dim_slice(g, ops.basis(), d, coef.slice(t), N, i, next.slice(t),
                        N, i, false, 1.0);
      }
    }
    coef = std::move(next);
  }
  if (residual) {
    Field r = spatial_gradient(coef);
    r -= v;
    *residual = std::sqrt(std::max(0.0, inner_spacetime(r, r)));
  }
  return coef;
}

Field mollify(const Field& f, double sigma) {
  const auto& g = f.grid();
  const auto& ops = SpectralOps::get(g.nx());
  const Eigen::MatrixXd kernel = ops.multiplier([sigma](int k) {
    const double om = kTwoPi * k;
    return std::exp(-0.5 * sigma * sigma * om * om);
  });
  Field out = f;
  for (int d = 0; d < g.space_dim(); ++d) {
    Field next(g, f.comps());
    parallel_for(g.nt(), [&](int64_t lo, int64_t hi) {
      for (int64_t t = lo; t < hi; ++t) {
        for (int c = 0; c < f.comps(); ++c) {
          apply_dim_slice(g, kernel, d, out.slice(t), f.comps(), c,
                          next.slice(t), f.comps(), c, false, 1.0);
        }
      }
    });
    out = std::move(next);
  }
  return out;
}

double constraint_residual(const Field& e, const Field& b, int max_freq) {
  const auto& g = e.grid();
  if (!g.same_as(b.grid())) {
    throw std::invalid_argument("constraint_residual: grid mismatch");
  }
  const auto& cfg = g.config();
  const int n = cfg.tensor_dim();
  const int N = cfg.players();
  const int m = g.space_dim();
  const int nt = g.nt();
  const auto& sops = SpectralOps::get(g.nx());
  const auto& tops = TimeOps::get(nt, g.horizon());

  // spatial test modes: per-dimension basis columns with frequency <= max_freq
  std::vector<int> cols;
  for (int c = 0; c < g.nx(); ++c) {
    if (sops.freq(c) <= max_freq) cols.push_back(c);
  }
  std::vector<int64_t> mode_count(1, 1);
  for (int d = 0; d < m; ++d) mode_count.push_back(mode_count.back() * cols.size());
  const int64_t n_modes = mode_count[m];

  // time factors theta in {t, t^2} and their pairing-stencil derivatives
  std::vector<Eigen::VectorXd> thetas;
  for (int degree = 1; degree <= 2; ++degree) {
    Eigen::VectorXd th(nt);
    for (int t = 0; t < nt; ++t) th(t) = std::pow(g.time_at(t), degree);
    thetas.push_back(th);
  }

  const int64_t sp = g.space_points();
  std::vector<double> phi(sp);
  double worst = 0.0;

  for (int64_t mode = 0; mode < n_modes; ++mode) {
    // build the separable spatial mode and its per-dimension derivatives
    std::vector<int> col(m);
    int64_t rem = mode;
    for (int d = 0; d < m; ++d) {
      col[d] = cols[rem % cols.size()];
      rem /= cols.size();
    }
    for (int64_t s = 0; s < sp; ++s) {
      double val = 1.0;
      for (int d = 0; d < m; ++d) {
        val *= sops.basis()(g.spatial_coord(s, d), col[d]);
      }
      phi[s] = val;
    }
    std::vector<double> dphi(sp * m);
    for (int d = 0; d < m; ++d) {
      apply_dim_slice(g, sops.deriv(), d, phi.data(), 1, 0, dphi.data(), m, d,
                      false, 1.0);
    }

    // per-slice pairings: <B_t[rc], phi> and <E_t[i*m+d], dphi_d>
    Eigen::MatrixXd bp(nt, n * n);
    Eigen::MatrixXd ep(nt, n * m);
    bp.setZero();
    ep.setZero();
    for (int t = 0; t < nt; ++t) {
      const double* bs = b.slice(t);
      const double* es = e.slice(t);
      for (int64_t s = 0; s < sp; ++s) {
        const double ph = phi[s];
        for (int c = 0; c < n * n; ++c) bp(t, c) += bs[s * n * n + c] * ph;
        for (int c = 0; c < n; ++c) {
          for (int d = 0; d < m; ++d) {
            ep(t, c * m + d) += es[s * n + c] * dphi[s * m + d];
          }
        }
      }
    }
    bp *= g.cell_measure();
    ep *= g.cell_measure();

    const double phi_norm2 = g.cell_measure() *
        [&] {
          double acc = 0.0;
          for (int64_t s = 0; s < sp; ++s) acc += phi[s] * phi[s];
          return acc;
        }();

    for (int r = 0; r < n; ++r) {
      for (int c = r; c < n; ++c) {
        // symmetric unit tensor S with entries at (r,c),(c,r)
        const double s_norm2 = (r == c) ? 1.0 : 2.0;
        // (U S)_i for the L Psi pairing
        Eigen::MatrixXd s_mat = Eigen::MatrixXd::Zero(n, n);
        s_mat(r, c) = 1.0;
        s_mat(c, r) = 1.0;
        Eigen::VectorXd us = apply_U(s_mat, cfg);

        for (const auto& th : thetas) {
          const Eigen::VectorXd dth =
              tops.deriv(TimeStencil::pairing) * th;
          double acc = 0.0;
          double psi_norm2 = 0.0;
          for (int t = 0; t < nt; ++t) {
            // <B_t, dPsi/dt> with Psi = theta * phi * S
            double bterm = 0.0;
            if (r == c) {
              bterm = bp(t, r * n + c);
            } else {
              bterm = bp(t, r * n + c) + bp(t, c * n + r);
            }
            // <E_t, L Psi> = -theta * sum_i (US)_i <E_i, grad phi>
            double eterm = 0.0;
            for (int i = 0; i < N; ++i) {
              if (us(i) == 0.0) continue;
              double gsum = 0.0;
              for (int d = 0; d < m; ++d) gsum += ep(t, (i * m + d) * m + d);
              eterm += us(i) * gsum;
            }
            acc += tops.weights()(t) * (dth(t) * bterm - th(t) * eterm);
            psi_norm2 += tops.weights()(t) * th(t) * th(t) * phi_norm2 * s_norm2;
          }
          const double norm = std::sqrt(std::max(psi_norm2, 1e-300));
          worst = std::max(worst, std::abs(acc) / norm);
        }
      }
    }
  }
  return worst;
}

}  // namespace dualflow
