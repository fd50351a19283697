#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "decoherence.hpp"
#include "hormander.hpp"
#include "linalg.hpp"
#include "model.hpp"
#include "wigner.hpp"

namespace lindblad {

/// Shortest representation that still round-trips a double exactly.
inline std::string fmt_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_decay_csv(std::ostream& out, const std::vector<DecaySample>& series) {
  out << "t,hs_norm,neg2hbar_log\n";
  for (const auto& s : series)
    out << fmt_g17(s.t) << "," << fmt_g17(s.hs_norm) << "," << fmt_g17(s.neg2hbar_log)
        << "\n";
}

struct CheckRow {
  double t = 0.0;
  Mat d;
  double min_eig_d = 0.0;
  double cp_min_eig = 0.0;
};

inline void write_check_csv(std::ostream& out, const std::vector<CheckRow>& rows) {
  if (rows.empty()) {
    out << "t,min_eig_D,cp_min_eig\n";
    return;
  }
  const int dim = static_cast<int>(rows.front().d.rows());
  out << "t";
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) out << ",D_" << r << c;
  out << ",min_eig_D,cp_min_eig\n";
  for (const auto& row : rows) {
    out << fmt_g17(row.t);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) out << "," << fmt_g17(row.d(r, c));
    out << "," << fmt_g17(row.min_eig_d) << "," << fmt_g17(row.cp_min_eig) << "\n";
  }
}

inline nlohmann::json direction_class_json(const DirectionClass& cls) {
  return cls.df ? nlohmann::json("DF") : nlohmann::json(cls.j);
}

inline nlohmann::json filtration_report_json(const SystemModel& m,
                                             const HormanderFiltration& f) {
  nlohmann::json j;
  j["dims"] = f.dims;
  j["r"] = f.r;
  j["holds"] = f.holds;
  j["W_DF_dim"] = static_cast<int>(f.w_df.cols());
  nlohmann::json basis = nlohmann::json::array();
  for (int c = 0; c < f.w_df.cols(); ++c) {
    nlohmann::json col = nlohmann::json::array();
    for (int r = 0; r < f.w_df.rows(); ++r) col.push_back(f.w_df(r, c));
    basis.push_back(col);
  }
  j["W_DF_basis"] = basis;
  j["symplectic_DF"] = symplectic_df(f);
  try {
    nlohmann::json orders = nlohmann::json::array();
    for (const auto& row : chain_order_map(m, f))
      orders.push_back({{"mode", row.mode},
                        {"p", direction_class_json(row.p)},
                        {"q", direction_class_json(row.q)}});
    j["chain_orders"] = orders;
  } catch (const ValidationError&) {
    // Not chain-structured; the per-mode table is omitted.
  }
  return j;
}

inline nlohmann::json prediction_report_json(const DecayPrediction& pred,
                                             const ExponentFit* fit) {
  nlohmann::json j;
  j["j"] = pred.df ? nlohmann::json("DF") : nlohmann::json(pred.j);
  j["d"] = pred.d;
  j["law"] = pred.law;
  if (fit) {
    j["fit_slope"] = fit->slope;
    j["fit_coeff"] = fit->coefficient;
    j["df_consistent"] = fit->df_consistent;
    nlohmann::json flags;
    if (pred.df) {
      flags["df_ok"] = fit->df_consistent;
    } else {
      flags["slope_ok"] = std::abs(fit->slope - (2.0 * pred.j + 1.0)) <= 0.05;
      flags["coeff_ok"] =
          pred.d > 0.0 && std::abs(fit->coefficient - pred.d) <= 0.02 * pred.d;
    }
    j["agreement"] = flags;
  }
  return j;
}

inline void write_wigner_csv(std::ostream& out, const WignerField& field) {
  out << "p,q,w\n";
  for (int ip = 0; ip < field.grid.np; ++ip)
    for (int iq = 0; iq < field.grid.nq; ++iq)
      out << fmt_g17(field.p_at(ip)) << "," << fmt_g17(field.q_at(iq)) << ","
          << fmt_g17(field.at(ip, iq).real()) << "\n";
}

inline nlohmann::json wigner_meta_json(const WignerField& field) {
  return {{"pmin", field.grid.pmin}, {"pmax", field.grid.pmax},
          {"qmin", field.grid.qmin}, {"qmax", field.grid.qmax},
          {"np", field.grid.np},     {"nq", field.grid.nq},
          {"t", field.t},            {"hbar", field.hbar},
          {"aliasing_ratio", field.aliasing_ratio},
          {"aliasing_warning", field.aliasing_warning}};
}

}  // namespace lindblad
