#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"

namespace lindblad {

/// A quadratic open system: Hamiltonian H(x) = x.Qx/2 and linear noise
/// symbols L_k(x) = x . Omega^T l_k, in interleaved phase-space coordinates
/// (p_1, q_1, ..., p_n, q_n). All derived matrices are fixed at construction:
///
///   F = Omega Q
///   M + iN = sum_k conj(l_k) l_k^T   (M symmetric PSD, N antisymmetric)
///   A = F + N Omega
///
/// Instances are immutable; concurrent reads are safe.
class SystemModel {
 public:
  SystemModel(int n, double hbar, Mat q, std::vector<CVec> ls)
      : n_(n), hbar_(hbar), q_(std::move(q)), ls_(std::move(ls)) {
    if (n_ < 1) throw ValidationError("SystemModel: n must be >= 1");
    if (!(hbar_ > 0.0) || !std::isfinite(hbar_))
      throw ValidationError("SystemModel: hbar must be positive and finite");
    const int d = 2 * n_;
    if (q_.rows() != d || q_.cols() != d)
      throw ValidationError("SystemModel: Q must be " + std::to_string(d) + "x" +
                            std::to_string(d) + ", got " + std::to_string(q_.rows()) +
                            "x" + std::to_string(q_.cols()));
    if (!q_.allFinite()) throw ValidationError("SystemModel: Q has non-finite entries");
    const double asym = (q_ - q_.transpose()).cwiseAbs().maxCoeff();
    const double qscale = std::max(1.0, q_.cwiseAbs().maxCoeff());
    if (asym > 1e-12 * qscale)
      throw ValidationError("SystemModel: Q asymmetry " + std::to_string(asym) +
                            " exceeds tolerance");
    q_ = symmetrized(q_);
    for (std::size_t k = 0; k < ls_.size(); ++k) {
      if (ls_[k].size() != d)
        throw ValidationError("SystemModel: lindblad vector " + std::to_string(k) +
                              " has length " + std::to_string(ls_[k].size()) +
                              ", expected " + std::to_string(d));
      if (!ls_[k].allFinite())
        throw ValidationError("SystemModel: lindblad vector " + std::to_string(k) +
                              " has non-finite entries");
    }

    omega_ = symplectic_form(n_);
    f_ = omega_ * q_;
    mmat_ = Mat::Zero(d, d);
    nmat_ = Mat::Zero(d, d);
    for (const auto& l : ls_) {
      const Vec re = l.real(), im = l.imag();
      mmat_ += re * re.transpose() + im * im.transpose();
      nmat_ += re * im.transpose() - im * re.transpose();
    }
    // By construction these are symmetric/antisymmetric; kill roundoff so the
    // stored forms satisfy the shape identities exactly.
    mmat_ = symmetrized(mmat_);
    nmat_ = 0.5 * (nmat_ - nmat_.transpose());
    a_ = f_ + nmat_ * omega_;
  }

  int n() const { return n_; }
  double hbar() const { return hbar_; }
  const Mat& Q() const { return q_; }
  const std::vector<CVec>& lindblad() const { return ls_; }
  const Mat& omega() const { return omega_; }
  const Mat& F() const { return f_; }
  const Mat& N() const { return nmat_; }
  const Mat& M() const { return mmat_; }
  const Mat& A() const { return a_; }

  /// The noise symbol L_k(x) = x . Omega^T l_k as a complex number.
  std::complex<double> lindblad_symbol(int k, const Vec& x) const {
    if (k < 0 || k >= static_cast<int>(ls_.size()))
      throw ValidationError("lindblad_symbol: index out of range");
    if (x.size() != 2 * n_)
      throw ValidationError("lindblad_symbol: point has wrong dimension");
    // Bilinear in x, so the complex vector must not be conjugated.
    return x.cast<std::complex<double>>().dot(omega_.transpose() * ls_[k]);
  }

 private:
  int n_;
  double hbar_;
  Mat q_;
  std::vector<CVec> ls_;
  Mat omega_, f_, nmat_, mmat_, a_;
};

inline SystemModel build_model(int n, double hbar, Mat q, std::vector<CVec> ls) {
  return SystemModel(n, hbar, std::move(q), std::move(ls));
}

/// The off-diagonal term |z1><z2| between two coherent-state centers.
/// z1 == z2 is allowed and denotes a diagonal term.
struct CatCoherence {
  Vec z1, z2;
  Vec dz() const { return z1 - z2; }
  Vec zbar() const { return 0.5 * (z1 + z2); }
};

// Noise-vector builders. mode is 1-based.

/// Position coupling L = sqrt(strength) * q_mode.
inline CVec lindblad_position(int n, int mode, double strength) {
  if (mode < 1 || mode > n) throw ValidationError("lindblad_position: mode out of range");
  if (!(strength >= 0.0)) throw ValidationError("lindblad_position: strength must be >= 0");
  CVec l = CVec::Zero(2 * n);
  // L(x) = x . Omega^T l wants Omega^T l = sqrt(s) e_q, so l = -sqrt(s) e_p.
  l(2 * (mode - 1)) = -std::sqrt(strength);
  return l;
}

/// Thermal-contact pair a = (q + ip)/sqrt(2): L = sqrt(rate) * a.
inline CVec lindblad_annihilation(int n, int mode, double rate) {
  if (mode < 1 || mode > n) throw ValidationError("lindblad_annihilation: mode out of range");
  if (!(rate >= 0.0)) throw ValidationError("lindblad_annihilation: rate must be >= 0");
  CVec l = CVec::Zero(2 * n);
  const double c = std::sqrt(rate / 2.0);
  l(2 * (mode - 1)) = std::complex<double>(-c, 0.0);
  l(2 * (mode - 1) + 1) = std::complex<double>(0.0, c);
  return l;
}

/// L = sqrt(rate) * a_dagger, a_dagger = (q - ip)/sqrt(2).
inline CVec lindblad_creation(int n, int mode, double rate) {
  if (mode < 1 || mode > n) throw ValidationError("lindblad_creation: mode out of range");
  if (!(rate >= 0.0)) throw ValidationError("lindblad_creation: rate must be >= 0");
  CVec l = CVec::Zero(2 * n);
  const double c = std::sqrt(rate / 2.0);
  l(2 * (mode - 1)) = std::complex<double>(-c, 0.0);
  l(2 * (mode - 1) + 1) = std::complex<double>(0.0, -c);
  return l;
}

// Scenario builders.

/// H = p^2/2m, L = sqrt(Lambda) q (collisional decoherence).
inline SystemModel scenario_free_particle(double m, double lambda_big, double hbar = 1.0) {
  if (!(m > 0.0)) throw ValidationError("scenario_free_particle: m must be > 0");
  if (!(lambda_big > 0.0)) throw ValidationError("scenario_free_particle: Lambda must be > 0");
  Mat q(2, 2);
  q << 1.0 / m, 0.0, 0.0, 0.0;
  return SystemModel(1, hbar, q, {lindblad_position(1, 1, lambda_big)});
}

/// H = p^2/2m + m omega0^2 q^2 / 2, L = sqrt(Lambda) q.
inline SystemModel scenario_quadratic_potential(double m, double omega0, double lambda_big,
                                                double hbar = 1.0) {
  if (!(m > 0.0)) throw ValidationError("scenario_quadratic_potential: m must be > 0");
  if (!std::isfinite(omega0)) throw ValidationError("scenario_quadratic_potential: omega0 must be finite");
  if (!(lambda_big > 0.0)) throw ValidationError("scenario_quadratic_potential: Lambda must be > 0");
  Mat q(2, 2);
  q << 1.0 / m, 0.0, 0.0, m * omega0 * omega0;
  return SystemModel(1, hbar, q, {lindblad_position(1, 1, lambda_big)});
}

/// H = omega (p^2 + q^2)/2 coupled to a thermal bath: damping gamma,
/// occupation nbar. The a-dagger channel is dropped at nbar = 0.
inline SystemModel scenario_damped_oscillator(double gamma_, double omega_, double nbar,
                                              double hbar = 1.0) {
  if (!(gamma_ > 0.0)) throw ValidationError("scenario_damped_oscillator: gamma must be > 0");
  if (!(omega_ > 0.0)) throw ValidationError("scenario_damped_oscillator: omega must be > 0");
  if (!(nbar >= 0.0)) throw ValidationError("scenario_damped_oscillator: nbar must be >= 0");
  Mat q = omega_ * Mat::Identity(2, 2);
  std::vector<CVec> ls;
  ls.push_back(lindblad_annihilation(1, 1, gamma_ * (nbar + 1.0)));
  if (nbar > 0.0) ls.push_back(lindblad_creation(1, 1, gamma_ * nbar));
  return SystemModel(1, hbar, q, std::move(ls));
}

/// H = lambda p q, L = sqrt(Lambda) q. The flow is a pure shear
/// diag(e^{-lambda t}, e^{lambda t}) and the diffusion stays degenerate.
inline SystemModel scenario_pq(double lambda_, double lambda_big, double hbar = 1.0) {
  if (!(lambda_ > 0.0)) throw ValidationError("scenario_pq: lambda must be > 0");
  if (!(lambda_big > 0.0)) throw ValidationError("scenario_pq: Lambda must be > 0");
  Mat q(2, 2);
  q << 0.0, lambda_, lambda_, 0.0;
  return SystemModel(1, hbar, q, {lindblad_position(1, 1, lambda_big)});
}

/// Coupled oscillators: H = x . (Q_n kron I_2) x / 2 with
/// Q_n = diag(frequencies) + Delta, thermal contact on one site.
inline SystemModel scenario_chain(const Vec& frequencies, const Mat& delta, int noise_site,
                                  double gamma_, double nbar, double hbar = 1.0) {
  const int n = static_cast<int>(frequencies.size());
  if (n < 1) throw ValidationError("scenario_chain: need at least one site");
  for (int i = 0; i < n; ++i)
    if (!(frequencies(i) > 0.0))
      throw ValidationError("scenario_chain: frequencies must be > 0");
  if (delta.rows() != n || delta.cols() != n)
    throw ValidationError("scenario_chain: Delta must be " + std::to_string(n) + "x" +
                          std::to_string(n));
  if ((delta - delta.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ValidationError("scenario_chain: Delta must be symmetric");
  for (int i = 0; i < n; ++i) {
    if (delta(i, i) != 0.0)
      throw ValidationError("scenario_chain: Delta must have zero diagonal");
    for (int j = 0; j < n; ++j)
      if (delta(i, j) < 0.0)
        throw ValidationError("scenario_chain: negative coupling at (" + std::to_string(i) +
                              "," + std::to_string(j) + ")");
  }
  if (noise_site < 1 || noise_site > n)
    throw ValidationError("scenario_chain: noise_site out of range");
  if (!(gamma_ > 0.0)) throw ValidationError("scenario_chain: gamma must be > 0");
  if (!(nbar >= 0.0)) throw ValidationError("scenario_chain: nbar must be >= 0");

  Mat qn = Mat(frequencies.asDiagonal()) + delta;
  Mat q = Mat::Zero(2 * n, 2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      q(2 * i, 2 * j) = qn(i, j);
      q(2 * i + 1, 2 * j + 1) = qn(i, j);
    }
  std::vector<CVec> ls;
  ls.push_back(lindblad_annihilation(n, noise_site, gamma_ * (nbar + 1.0)));
  if (nbar > 0.0) ls.push_back(lindblad_creation(n, noise_site, gamma_ * nbar));
  return SystemModel(n, hbar, q, std::move(ls));
}

}  // namespace lindblad
