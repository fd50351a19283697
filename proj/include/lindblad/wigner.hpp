#pragma once

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "propagation.hpp"

namespace lindblad {

/// Half-open sampling grid: p_i = pmin + i (pmax-pmin)/np for i in [0, np),
/// likewise in q. Sample counts must be powers of two.
struct GridSpec {
  double pmin = -8.0, pmax = 8.0;
  double qmin = -8.0, qmax = 8.0;
  int np = 128, nq = 128;
};

struct WeightedTerm {
  std::complex<double> weight{1.0, 0.0};
  CatCoherence term;
};

/// The four weighted coherence terms of the even cat built on (z1, z2), each
/// carrying weight 1/2. The overlap normalization correction, exponentially
/// small for separated centers, is left out on purpose.
inline std::vector<WeightedTerm> cat_state_terms(const Vec& z1, const Vec& z2) {
  return {{{0.5, 0.0}, {z1, z1}},
          {{0.5, 0.0}, {z2, z2}},
          {{0.5, 0.0}, {z1, z2}},
          {{0.5, 0.0}, {z2, z1}}};
}

struct WignerField {
  GridSpec grid;
  double t = 0.0;
  double hbar = 1.0;
  std::vector<std::complex<double>> values;  // row-major, index ip * nq + iq
  double aliasing_ratio = 0.0;
  bool aliasing_warning = false;

  std::complex<double> at(int ip, int iq) const {
    return values[static_cast<std::size_t>(ip) * grid.nq + iq];
  }
  double p_at(int ip) const { return grid.pmin + ip * (grid.pmax - grid.pmin) / grid.np; }
  double q_at(int iq) const { return grid.qmin + iq * (grid.qmax - grid.qmin) / grid.nq; }
};

namespace detail {

inline bool power_of_two(int v) { return v >= 2 && (v & (v - 1)) == 0; }

}  // namespace detail

/// Wigner function of a weighted sum of coherence terms evolved to time t,
/// by inverse discrete Fourier transform of the characteristic function
/// sampled on the dual grid (step 2 pi hbar / (N dx) per axis). Hermitian
/// term sets give a real field up to roundoff. Single-mode models only.
///
/// aliasing_ratio compares |chi| on the dual-grid boundary against its global
/// max; a ratio above 1e-8 means the grid is too coarse or too small for the
/// state and the transform wraps around, so the warning flag is raised.
inline WignerField wigner_field(const SystemModel& m, const std::vector<WeightedTerm>& terms,
                                double t, const GridSpec& grid,
                                const QuadraticIntegratorConfig& cfg = {}) {
  if (m.n() != 1)
    throw ValidationError("wigner_field: grid rendering is limited to single-mode models");
  if (terms.empty()) throw ValidationError("wigner_field: no terms given");
  for (const auto& wt : terms)
    if (wt.term.z1.size() != 2 || wt.term.z2.size() != 2)
      throw ValidationError("wigner_field: term dimension mismatch");
  if (!(grid.pmax > grid.pmin) || !(grid.qmax > grid.qmin))
    throw ValidationError("wigner_field: empty grid extent");
  if (!detail::power_of_two(grid.np) || !detail::power_of_two(grid.nq))
    throw ValidationError("wigner_field: sample counts must be powers of two (got " +
                          std::to_string(grid.np) + "x" + std::to_string(grid.nq) + ")");

  const GaussianChannel ch = channel_at(m, t, cfg);
  const double hbar = m.hbar();
  const double dp = (grid.pmax - grid.pmin) / grid.np;
  const double dq = (grid.qmax - grid.qmin) / grid.nq;
  const double dxip = 2.0 * M_PI * hbar / (grid.np * dp);
  const double dxiq = 2.0 * M_PI * hbar / (grid.nq * dq);

  // chi on the dual grid in standard DFT index order; the pmin/qmin phase
  // shifts the transform onto the requested window.
  std::vector<std::complex<double>> chi(static_cast<std::size_t>(grid.np) * grid.nq);
  double global_max = 0.0, border_max = 0.0;
  Vec xi(2);
  for (int kp = 0; kp < grid.np; ++kp) {
    const int kcp = kp < grid.np / 2 ? kp : kp - grid.np;
    const bool p_edge = kcp == -grid.np / 2 || kcp == grid.np / 2 - 1;
    for (int kq = 0; kq < grid.nq; ++kq) {
      const int kcq = kq < grid.nq / 2 ? kq : kq - grid.nq;
      xi(0) = kcp * dxip;
      xi(1) = kcq * dxiq;
      std::complex<double> val{0.0, 0.0};
      for (const auto& wt : terms) val += wt.weight * cat_term_characteristic(ch, wt.term, xi);
      const double mag = std::abs(val);
      global_max = std::max(global_max, mag);
      if (p_edge || kcq == -grid.nq / 2 || kcq == grid.nq / 2 - 1)
        border_max = std::max(border_max, mag);
      const double ph = (grid.pmin * xi(0) + grid.qmin * xi(1)) / hbar;
      chi[static_cast<std::size_t>(kp) * grid.nq + kq] =
          val * std::complex<double>(std::cos(ph), std::sin(ph));
    }
  }

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> buf_in(grid.nq), buf_out(grid.nq);
  for (int kp = 0; kp < grid.np; ++kp) {
    auto* row = &chi[static_cast<std::size_t>(kp) * grid.nq];
    std::copy(row, row + grid.nq, buf_in.begin());
    fft.inv(buf_out, buf_in);
    std::copy(buf_out.begin(), buf_out.end(), row);
  }
  buf_in.resize(grid.np);
  buf_out.resize(grid.np);
  for (int kq = 0; kq < grid.nq; ++kq) {
    for (int kp = 0; kp < grid.np; ++kp)
      buf_in[kp] = chi[static_cast<std::size_t>(kp) * grid.nq + kq];
    fft.inv(buf_out, buf_in);
    for (int kp = 0; kp < grid.np; ++kp)
      chi[static_cast<std::size_t>(kp) * grid.nq + kq] = buf_out[kp];
  }

  // Eigen's inverse transform already divides by N per axis; undo that and
  // apply the quadrature measure.
  const double factor = static_cast<double>(grid.np) * grid.nq * dxip * dxiq /
                        (4.0 * M_PI * M_PI * hbar * hbar);
  WignerField field;
  field.grid = grid;
  field.t = t;
  field.hbar = hbar;
  field.values.resize(chi.size());
  for (std::size_t i = 0; i < chi.size(); ++i) field.values[i] = chi[i] * factor;
  field.aliasing_ratio = global_max > 0.0 ? border_max / global_max : 0.0;
  field.aliasing_warning = field.aliasing_ratio > 1e-8;
  return field;
}

}  // namespace lindblad
