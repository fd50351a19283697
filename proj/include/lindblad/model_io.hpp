#pragma once

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "model.hpp"

namespace lindblad {

// Model file schema, version 1:
//   {
//     "schema_version": 1,
//     "n": 1,
//     "hbar": 1.0,
//     "Q": [ ... 4n^2 numbers, row-major ... ],
//     "lindblad": [ {"re": [ ... 2n ... ], "im": [ ... 2n ... ]}, ... ]
//   }
// Numbers round-trip at full binary precision.

namespace detail {

inline void require_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ValidationError("model file: unexpected field '" + it.key() + "' in " + where);
  }
}

inline std::vector<double> number_array(const nlohmann::json& j, const std::string& field,
                                        std::size_t expect) {
  if (!j.is_array())
    throw ValidationError("model file: field '" + field + "' must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number())
      throw ValidationError("model file: field '" + field + "' must contain only numbers");
    out.push_back(v.get<double>());
  }
  if (out.size() != expect)
    throw ValidationError("model file: field '" + field + "' has length " +
                          std::to_string(out.size()) + ", expected " + std::to_string(expect));
  return out;
}

}  // namespace detail

inline SystemModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("model file: top level must be an object");
  detail::require_keys(j, {"schema_version", "n", "hbar", "Q", "lindblad"}, "top level");
  for (const char* field : {"schema_version", "n", "hbar", "Q", "lindblad"})
    if (!j.contains(field))
      throw ValidationError(std::string("model file: missing required field '") + field + "'");

  if (!j["schema_version"].is_number_integer() || j["schema_version"].get<int>() != 1)
    throw ValidationError("model file: field 'schema_version' must be the integer 1");
  if (!j["n"].is_number_integer() || j["n"].get<int>() < 1)
    throw ValidationError("model file: field 'n' must be a positive integer");
  const int n = j["n"].get<int>();
  if (!j["hbar"].is_number())
    throw ValidationError("model file: field 'hbar' must be a number");
  const double hbar = j["hbar"].get<double>();

  const std::size_t d = 2 * static_cast<std::size_t>(n);
  const auto qflat = detail::number_array(j["Q"], "Q", d * d);
  Mat q(d, d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) q(r, c) = qflat[r * d + c];

  if (!j["lindblad"].is_array())
    throw ValidationError("model file: field 'lindblad' must be an array");
  std::vector<CVec> ls;
  int k = 0;
  for (const auto& entry : j["lindblad"]) {
    const std::string where = "lindblad[" + std::to_string(k) + "]";
    if (!entry.is_object())
      throw ValidationError("model file: " + where + " must be an object with 're' and 'im'");
    detail::require_keys(entry, {"re", "im"}, where);
    for (const char* field : {"re", "im"})
      if (!entry.contains(field))
        throw ValidationError("model file: " + where + " missing required field '" + field + "'");
    const auto re = detail::number_array(entry["re"], where + ".re", d);
    const auto im = detail::number_array(entry["im"], where + ".im", d);
    CVec l(d);
    for (std::size_t i = 0; i < d; ++i) l(i) = {re[i], im[i]};
    ls.push_back(std::move(l));
    ++k;
  }
  return SystemModel(n, hbar, std::move(q), std::move(ls));
}

inline nlohmann::json model_to_json(const SystemModel& m) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["n"] = m.n();
  j["hbar"] = m.hbar();
  const int d = 2 * m.n();
  std::vector<double> qflat;
  qflat.reserve(d * d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) qflat.push_back(m.Q()(r, c));
  j["Q"] = qflat;
  j["lindblad"] = nlohmann::json::array();
  for (const auto& l : m.lindblad()) {
    std::vector<double> re(d), im(d);
    for (int i = 0; i < d; ++i) {
      re[i] = l(i).real();
      im[i] = l(i).imag();
    }
    j["lindblad"].push_back({{"re", re}, {"im", im}});
  }
  return j;
}

inline SystemModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("load_model: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("load_model: parse error in '" + path + "': " + e.what());
  }
  return model_from_json(j);
}

inline void save_model(const SystemModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("save_model: cannot open '" + path + "' for writing");
  out << model_to_json(m).dump(2) << "\n";
  if (!out) throw IntegrityError("save_model: write to '" + path + "' failed");
}

}  // namespace lindblad
