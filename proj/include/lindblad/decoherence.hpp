#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "hormander.hpp"
#include "linalg.hpp"
#include "model.hpp"
#include "propagation.hpp"

namespace lindblad {

/// d_j(dz) = sum_k |L_k(F^j dz)|^2 / ((2j+1) (j!)^2), the coefficient of the
/// short-time law exp(-d_j t^{2j+1} / 2 hbar) for the coherence |z1><z2|.
inline double d_coefficient(const SystemModel& m, int j, const Vec& dz) {
  if (j < 0 || j > 100) throw ValidationError("d_coefficient: j out of range");
  if (dz.size() != 2 * m.n()) throw ValidationError("d_coefficient: dz dimension mismatch");
  Vec v = dz;
  for (int i = 0; i < j; ++i) v = m.F() * v;
  double sum = 0.0;
  for (std::size_t k = 0; k < m.lindblad().size(); ++k)
    sum += std::norm(m.lindblad_symbol(static_cast<int>(k), v));
  double fact = 1.0;
  for (int i = 2; i <= j; ++i) fact *= i;
  return sum / ((2.0 * j + 1.0) * fact * fact);
}

struct DecayPrediction {
  bool df = false;
  int j = -1;
  double d = 0.0;
  std::string law;
};

/// Classifies Omega dz through the filtration and evaluates the matching
/// decay coefficient. dz = 0 and decoherence-free directions both yield d = 0.
inline DecayPrediction predict(const SystemModel& m, const HormanderFiltration& f,
                               const CatCoherence& cat) {
  DecayPrediction out;
  const Vec dz = cat.dz();
  if (dz.size() != 2 * m.n()) throw ValidationError("predict: cat dimension mismatch");
  if (dz.norm() == 0.0) {
    out.df = true;
    out.law = "diagonal term (z1 = z2); no off-diagonal decay";
    return out;
  }
  const DirectionClass cls = classify_direction(f, m.omega() * dz);
  if (cls.df) {
    out.df = true;
    out.law = "no decay (decoherence-free direction)";
    return out;
  }
  out.j = cls.j;
  out.d = d_coefficient(m, cls.j, dz);
  std::ostringstream law;
  law << "hs_norm ~ exp(-" << out.d << " * t^" << (2 * cls.j + 1) << " / (2*hbar))";
  out.law = law.str();
  return out;
}

struct TaylorLeading {
  bool df = false;
  int j = -1;
  double coefficient = 0.0;
};

/// Leading Taylor term of t -> xi . D_t xi: coefficient * t^{2j+1} with
/// coefficient = M((F^T)^j xi) / ((2j+1)(j!)^2).
inline TaylorLeading leading_taylor(const SystemModel& m, const HormanderFiltration& f,
                                    const Vec& xi) {
  if (xi.size() != 2 * m.n()) throw ValidationError("leading_taylor: dimension mismatch");
  TaylorLeading out;
  const DirectionClass cls = classify_direction(f, xi);
  if (cls.df) {
    out.df = true;
    return out;
  }
  out.j = cls.j;
  Vec w = xi;
  for (int i = 0; i < cls.j; ++i) w = m.F().transpose() * w;
  double fact = 1.0;
  for (int i = 2; i <= cls.j; ++i) fact *= i;
  out.coefficient = w.dot(m.M() * w) / ((2.0 * cls.j + 1.0) * fact * fact);
  return out;
}

/// Hilbert-Schmidt norm of the evolved coherence term |z1><z2|,
///   ||rho_t||^2 = |det R_t| / sqrt(det(I + 2 C_t)) * exp(-(Omega dz).Ctilde_t (Omega dz)/hbar),
/// returned as the square root of the right-hand side.
inline double hs_norm_cat(const SystemModel& m, const CatCoherence& cat, double t,
                          const QuadraticIntegratorConfig& cfg = {}) {
  if (!(t >= 0.0)) throw ValidationError("hs_norm_cat: t must be >= 0");
  if (cat.z1.size() != 2 * m.n() || cat.z2.size() != 2 * m.n())
    throw ValidationError("hs_norm_cat: cat dimension mismatch");
  const Mat r = flow(m, t);
  const Mat c = c_form(m, t, cfg);
  const Vec xi = m.omega() * cat.dz();
  const SymEig eig = sym_eig(c);
  double logdet = 0.0;
  for (int i = 0; i < eig.values.size(); ++i) logdet += std::log1p(2.0 * eig.values(i));
  const double expo = xi.dot(c_tilde_of(c) * xi) / m.hbar();
  const double sq = std::log(std::abs(r.determinant())) - 0.5 * logdet - expo;
  return std::exp(0.5 * sq);
}

struct DecaySample {
  double t = 0.0;
  double hs_norm = 1.0;      // normalized coherence factor, 1 at t = 0
  double neg2hbar_log = 0.0; // -2 hbar ln(hs_norm) = (Omega dz).Ctilde_t (Omega dz)
};

/// Decay of the coherence relative to the diagonal envelope:
///   hs_norm = hs(z1,z2;t) / hs(z,z;t) = exp(-(Omega dz).Ctilde_t(Omega dz)/2 hbar),
/// the quantity obeying the exp(-d_j t^{2j+1}/2 hbar) short-time law.
///
/// The exponent is not formed from Ctilde_t directly: at small t that
/// subtraction loses the whole t^{2j+1} signal. Instead
///   xi.C_t xi = integral over [0,t] of sum_k |xi . R_{-s} l_k|^2 ds
/// is accumulated as a nonnegative Simpson sum together with v = C_t xi, and
///   xi.Ctilde xi = xi.C xi - 2 v.(I+2C)^{-1} v
/// moves the cancellation into the higher-order correction term.
inline std::vector<DecaySample> decay_series(const SystemModel& m, const CatCoherence& cat,
                                             const std::vector<double>& t_grid,
                                             const QuadraticIntegratorConfig& cfg = {}) {
  validate(cfg);
  if (cat.z1.size() != 2 * m.n() || cat.z2.size() != 2 * m.n())
    throw ValidationError("decay_series: cat dimension mismatch");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0)) throw ValidationError("decay_series: t_grid must be nonnegative");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
      throw ValidationError("decay_series: t_grid must be strictly increasing");
  }
  const int d = 2 * m.n();
  const Vec xi = m.omega() * cat.dz();
  std::vector<DecaySample> out;
  out.reserve(t_grid.size());
  const int steps = std::max(cfg.steps, 64);

  for (double t : t_grid) {
    DecaySample s;
    s.t = t;
    if (t == 0.0 || xi.norm() == 0.0 || m.lindblad().empty()) {
      out.push_back(s);
      continue;
    }
    // Combined integrand: first entry xi.R M R^T xi, rest R M R^T xi.
    const auto integrand = [&](double u) -> Vec {
      const Mat r = flow(m, -u);
      Vec acc = Vec::Zero(d + 1);
      for (const auto& l : m.lindblad()) {
        const Vec re = r * l.real(), im = r * l.imag();
        const double pr = re.dot(xi), pi = im.dot(xi);
        acc(0) += pr * pr + pi * pi;
        acc.tail(d) += pr * re + pi * im;
      }
      return acc;
    };
    const Vec integral = simpson(integrand, 0.0, t, steps);
    const double cxx = integral(0);
    const Vec v = integral.tail(d);
    const Mat c = c_form(m, t, cfg);
    Eigen::LDLT<Mat> solver(Mat::Identity(d, d) + 2.0 * c);
    if (solver.info() != Eigen::Success)
      throw IntegrityError("decay_series: I + 2C is not factorizable");
    const double e = std::max(0.0, cxx - 2.0 * v.dot(solver.solve(v)));
    s.neg2hbar_log = e;
    s.hs_norm = std::exp(-e / (2.0 * m.hbar()));
    out.push_back(s);
  }
  return out;
}

struct ExponentFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double coefficient = std::numeric_limits<double>::quiet_NaN();
  bool df_consistent = false;
};

/// Least squares on (ln t, ln(-2 hbar ln hs_norm)) over the window. The slope
/// estimates 2j+1. The coefficient is the intercept re-estimated with the
/// slope pinned to the nearest odd integer, which stops the slope's own
/// least-squares error from leaking into the coefficient across the window.
/// df_consistent is set when no point in the window shows measurable decay
/// (-ln hs_norm < 1e-10 everywhere); slope and coefficient carry no meaning
/// then and stay NaN unless something was fittable anyway.
inline ExponentFit fit_exponent(const std::vector<DecaySample>& series, double t_lo,
                                double t_hi) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo))
    throw ValidationError("fit_exponent: window must satisfy 0 < t_lo < t_hi");
  std::vector<const DecaySample*> win;
  for (const auto& s : series)
    if (s.t >= t_lo && s.t <= t_hi) win.push_back(&s);
  if (win.size() < 8)
    throw ValidationError("fit_exponent: window contains " + std::to_string(win.size()) +
                          " points; need at least 8");
  ExponentFit fit;
  double max_neglog = 0.0;
  for (const auto* s : win) max_neglog = std::max(max_neglog, -std::log(s->hs_norm));
  fit.df_consistent = max_neglog < 1e-10;

  std::vector<double> xs, ys;
  for (const auto* s : win) {
    if (s->neg2hbar_log > 0.0) {
      xs.push_back(std::log(s->t));
      ys.push_back(std::log(s->neg2hbar_log));
    }
  }
  if (xs.size() < 8) {
    if (fit.df_consistent) return fit;
    throw ValidationError("fit_exponent: fewer than 8 points with measurable decay");
  }
  const std::size_t np = xs.size();
  double xbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < np; ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= np;
  ybar /= np;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < np; ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  fit.slope = sxy / sxx;
  const int jhat = std::max(0, static_cast<int>(std::lround((fit.slope - 1.0) / 2.0)));
  const double target = 2.0 * jhat + 1.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < np; ++i) mean += ys[i] - target * xs[i];
  fit.coefficient = std::exp(mean / np);
  return fit;
}

}  // namespace lindblad
