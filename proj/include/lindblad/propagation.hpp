#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "model.hpp"

namespace lindblad {

enum class DiffusionMethod { lyapunov_ode, quadrature };

/// lyapunov_ode: fixed-step RK4 on dX/dt = AX + XA^T + M, steps doubled with
/// Richardson control until the estimated relative error is below rel_tol.
/// quadrature: composite Simpson on the defining integral with exactly the
/// given number of subintervals; it is the independent cross-check, never the
/// default path.
struct QuadraticIntegratorConfig {
  DiffusionMethod method = DiffusionMethod::lyapunov_ode;
  int steps = 64;
  double rel_tol = 1e-12;
};

inline void validate(const QuadraticIntegratorConfig& cfg) {
  if (cfg.steps < 2) throw ValidationError("integrator config: steps must be >= 2");
  if (!(cfg.rel_tol > 0.0) || cfg.rel_tol > 1e-2)
    throw ValidationError("integrator config: rel_tol must lie in (0, 1e-2]");
}

/// R_t = exp(tA). Negative t gives the inverse flow.
inline Mat flow(const SystemModel& m, double t) {
  if (!std::isfinite(t)) throw ValidationError("flow: t must be finite");
  return matrix_exp(m.A(), t);
}

namespace detail {

inline Mat rk4_lyapunov(const Mat& a, const Mat& mm, double t, int steps) {
  const int d = static_cast<int>(a.rows());
  Mat x = Mat::Zero(d, d);
  const double h = t / steps;
  const auto f = [&](const Mat& y) -> Mat { return a * y + y * a.transpose() + mm; };
  for (int i = 0; i < steps; ++i) {
    const Mat k1 = f(x);
    const Mat k2 = f(x + 0.5 * h * k1);
    const Mat k3 = f(x + 0.5 * h * k2);
    const Mat k4 = f(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

}  // namespace detail

/// D_t = integral of R_s M R_s^T over [0, t].
///
/// The ODE path requires t >= 0; the quadrature path also accepts negative t,
/// where the signed integral makes D_{-t} the negative-definite continuation
/// used by the C_t identity.
inline Mat diffusion(const SystemModel& m, double t,
                     const QuadraticIntegratorConfig& cfg = {}) {
  validate(cfg);
  if (!std::isfinite(t)) throw ValidationError("diffusion: t must be finite");
  const int d = 2 * m.n();
  if (t == 0.0) return Mat::Zero(d, d);

  if (cfg.method == DiffusionMethod::quadrature) {
    const double sgn = t >= 0.0 ? 1.0 : -1.0;
    const auto f = [&](double u) -> Mat {
      const Mat r = flow(m, sgn * u);
      return r * m.M() * r.transpose();
    };
    return symmetrized(sgn * simpson(f, 0.0, std::abs(t), cfg.steps));
  }

  if (t < 0.0)
    throw ValidationError(
        "diffusion: the lyapunov_ode method requires t >= 0; use the quadrature "
        "method for negative times");

  int steps = cfg.steps;
  Mat coarse = detail::rk4_lyapunov(m.A(), m.M(), t, steps);
  const int max_steps = 1 << 22;
  while (true) {
    if (steps > max_steps / 2) {
      const double resid = coarse.hasNaN() ? std::numeric_limits<double>::quiet_NaN() : -1.0;
      throw IntegrityError("diffusion: lyapunov_ode did not reach rel_tol = " +
                           std::to_string(cfg.rel_tol) + " within " +
                           std::to_string(max_steps) + " steps (last residual " +
                           std::to_string(resid) + ")");
    }
    const Mat fine = detail::rk4_lyapunov(m.A(), m.M(), t, 2 * steps);
    const double diff = (fine - coarse).norm();
    const double scale = std::max(fine.norm(), std::numeric_limits<double>::min());
    if (std::isfinite(diff) && diff <= 15.0 * cfg.rel_tol * scale) {
      // One Richardson extrapolation step on the h^4 error term.
      return symmetrized((16.0 * fine - coarse) / 15.0);
    }
    coarse = fine;
    steps *= 2;
  }
}

/// C_t = R_{-t} D_t R_{-t}^T, the diffusion form pulled back along the flow.
inline Mat c_form(const SystemModel& m, double t,
                  const QuadraticIntegratorConfig& cfg = {}) {
  const Mat rinv = flow(m, -t);
  return symmetrized(rinv * diffusion(m, t, cfg) * rinv.transpose());
}

/// C(I + 2C)^{-1} for symmetric PSD C; shares eigenvectors with C and maps
/// eigenvalue c to c/(1+2c) in [0, 1/2).
inline Mat c_tilde_of(const Mat& c) {
  const int d = static_cast<int>(c.rows());
  Eigen::LDLT<Mat> solver(Mat::Identity(d, d) + 2.0 * c);
  if (solver.info() != Eigen::Success)
    throw IntegrityError("c_tilde_of: I + 2C is not factorizable");
  return symmetrized(solver.solve(c));
}

inline Mat c_tilde(const SystemModel& m, double t,
                   const QuadraticIntegratorConfig& cfg = {}) {
  return c_tilde_of(c_form(m, t, cfg));
}

/// One Gaussian channel: chi(xi) -> chi(R^T xi) * exp(-xi.D xi / 2 hbar).
struct GaussianChannel {
  Mat R;
  Mat D;
  double hbar = 1.0;
};

/// Min eigenvalue of the Hermitian certificate D + (i/2)(Omega - R Omega R^T).
/// Nonnegative (up to tolerance) exactly when the pair (R, D) is a completely
/// positive Gaussian channel in canonical units. Channels derived from a
/// generator satisfy this with equality in the lossless directions, which is
/// why the tolerance is one-sided.
inline double cp_min_eig(const GaussianChannel& ch) {
  const int d = static_cast<int>(ch.R.rows());
  const Mat om = symplectic_form(d / 2);
  const std::complex<double> ih(0.0, 0.5);
  CMat hm = ch.D.cast<std::complex<double>>() +
            ih * (om - ch.R * om * ch.R.transpose()).cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<CMat> es(hm);
  if (es.info() != Eigen::Success)
    throw IntegrityError("cp_min_eig: eigensolver failed");
  return es.eigenvalues()(0);
}

/// Channel for evolution up to time t >= 0, with the CP certificate enforced.
inline GaussianChannel channel_at(const SystemModel& m, double t,
                                  const QuadraticIntegratorConfig& cfg = {}) {
  if (!(t >= 0.0)) throw ValidationError("channel_at: t must be >= 0");
  GaussianChannel ch{flow(m, t), diffusion(m, t, cfg), m.hbar()};
  if (min_eigenvalue(ch.D) < -1e-10)
    throw IntegrityError("channel_at: D_t has min eigenvalue " +
                         std::to_string(min_eigenvalue(ch.D)) +
                         " below tolerance; integrator failure");
  const double cp = cp_min_eig(ch);
  if (cp < -1e-10)
    throw IntegrityError("channel_at: complete-positivity certificate failed (min "
                         "eigenvalue " + std::to_string(cp) + "); integrator failure");
  return ch;
}

/// Channel composition, `after` applied second:
/// R = R_a R_b, D = D_a + R_a D_b R_a^T.
inline GaussianChannel compose(const GaussianChannel& after, const GaussianChannel& before) {
  if (after.R.rows() != before.R.rows())
    throw ValidationError("compose: dimension mismatch");
  if (after.hbar != before.hbar)
    throw ValidationError("compose: hbar mismatch");
  return {after.R * before.R,
          symmetrized(after.D + after.R * before.D * after.R.transpose()), after.hbar};
}

/// Characteristic function of the evolved coherence term |z1><z2| at xi:
///   exp(-i zbar . R^T xi / hbar) * exp(-[(R^T xi - Omega dz)^2 + 2 xi.D xi] / 4 hbar)
inline std::complex<double> cat_term_characteristic(const GaussianChannel& ch,
                                                    const CatCoherence& cat, const Vec& xi) {
  const int d = static_cast<int>(ch.R.rows());
  if (cat.z1.size() != d || cat.z2.size() != d || xi.size() != d)
    throw ValidationError("cat_term_characteristic: dimension mismatch");
  const Mat om = symplectic_form(d / 2);
  const Vec a = ch.R.transpose() * xi;
  const Vec u = om * cat.dz();
  const double phase = -cat.zbar().dot(a) / ch.hbar;
  const double decay =
      -((a - u).squaredNorm() + 2.0 * xi.dot(ch.D * xi)) / (4.0 * ch.hbar);
  return std::exp(std::complex<double>(decay, phase));
}

/// Transition kernel of the phase-space density,
///   (2 pi hbar)^{-n} det(D_t)^{-1/2} exp(-(x - R_t y) . D_t^{-1} (x - R_t y) / 2 hbar).
/// Exists only when D_t is nondegenerate; otherwise the error lists the flat
/// directions and points at the filtration analysis.
inline double propagator_kernel(const SystemModel& m, double t, const Vec& x, const Vec& y,
                                const QuadraticIntegratorConfig& cfg = {}) {
  const int d = 2 * m.n();
  if (x.size() != d || y.size() != d)
    throw ValidationError("propagator_kernel: point dimension mismatch");
  const Mat r = flow(m, t);
  const Mat dt = diffusion(m, t, cfg);
  const SymEig eig = sym_eig(dt);
  const double thresh = 1e-12 * std::max(eig.values(d - 1), 1.0);
  if (eig.values(0) <= thresh) {
    std::ostringstream msg;
    msg << "propagator_kernel: D_t is degenerate; no density exists along direction(s)";
    for (int i = 0; i < d && eig.values(i) <= thresh; ++i) {
      msg << " [";
      for (int c = 0; c < d; ++c) msg << (c ? ", " : "") << eig.vectors(c, i);
      msg << "]";
    }
    msg << "; check the Hormander condition (filtration report) for the "
           "decoherence-free structure";
    throw ValidationError(msg.str());
  }
  const Vec res = x - r * y;
  double quad = 0.0, logdet = 0.0;
  for (int i = 0; i < d; ++i) {
    const double proj = eig.vectors.col(i).dot(res);
    quad += proj * proj / eig.values(i);
    logdet += std::log(eig.values(i));
  }
  return std::pow(2.0 * M_PI * m.hbar(), -m.n()) * std::exp(-0.5 * logdet) *
         std::exp(-quad / (2.0 * m.hbar()));
}

}  // namespace lindblad
