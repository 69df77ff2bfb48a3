#pragma once

// JSON views of the library's result types. Numbers are emitted at full
// round-trip precision; non-finite values never appear as raw JSON numbers:
// +/-inf become the strings "inf"/"-inf" and NaN becomes null.

#include <json.hpp>

#include "mtls/condition.hpp"
#include "mtls/tables.hpp"

namespace mtls {

using Json = nlohmann::json;

inline Json json_num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v + 0.0;  // collapse negative zero
}

inline Json vector_json(const Vector& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(json_num(v(i)));
  return arr;
}

inline Json solution_json(const MtlsSolution& sol) {
  return Json{{"m", sol.m()},
              {"n", sol.n()},
              {"n1", sol.n1()},
              {"n2", sol.n2()},
              {"x", vector_json(sol.x)},
              {"sigma2", json_num(sol.sigma2)},
              {"sigma", json_num(std::sqrt(sol.sigma2))},
              {"residual_norm", json_num(sol.r.norm())},
              {"gap", json_num(sol.gap)}};
}

inline Json condition_json(const ConditionReport& rep) {
  Json variants;
  for (const auto& [key, value] : rep.variants) variants[key] = json_num(value);
  Json out{{"kappa_rel", json_num(rep.kappa_rel)},
           {"kappa_abs", json_num(rep.kappa_abs)},
           {"variants", variants},
           {"kappa_a", json_num(rep.kappa_a)},
           {"kappa_b", json_num(rep.kappa_b)},
           {"mixed_upper", json_num(rep.mixed_upper)},
           {"compw_upper", json_num(rep.compw_upper)},
           {"compw_infinite", rep.compw_infinite},
           {"used_explicit_k", rep.used_explicit_k}};
  if (rep.mixed) out["mixed"] = json_num(*rep.mixed);
  if (rep.compw) out["compw"] = json_num(*rep.compw);
  return out;
}

inline Json structured_json(const StructuredReport& rep) {
  return Json{{"kappa_s", json_num(rep.kappa_s)},
              {"mixed_s", json_num(rep.mixed_s)},
              {"compw_s", json_num(rep.compw_s)},
              {"compw_s_infinite", rep.compw_infinite}};
}

inline Json trial_json(const TrialRecord& rec) {
  Json bounds;
  for (const auto& [key, value] : rec.bounds) bounds[key] = json_num(value);
  Json out{{"seed", rec.seed},
           {"epsilon", json_num(rec.epsilon)},
           {"eps1", json_num(rec.eps1)},
           {"eps2", json_num(rec.eps2)},
           {"dx_abs_2", json_num(rec.dx_abs_2)},
           {"dx_rel_2", json_num(rec.dx_rel_2)},
           {"dx_rel_inf", json_num(rec.dx_rel_inf)},
           {"dx_compw", json_num(rec.dx_compw)},
           {"dx_compw_infinite", rec.dx_compw_infinite},
           {"eta_new", json_num(rec.eta_new)},
           {"eta_zy", json_num(rec.eta_zy)},
           {"bounds", bounds},
           {"bounds_ok", rec.bounds_ok},
           {"skipped", rec.skipped}};
  if (rec.eps1_s) out["eps1_s"] = json_num(*rec.eps1_s);
  if (rec.eps2_s) out["eps2_s"] = json_num(*rec.eps2_s);
  if (!rec.skip_reason.empty()) out["skip_reason"] = rec.skip_reason;
  return out;
}

inline Json table_json(const TableReport& table) {
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    Json line = Json::array();
    for (double v : row) line.push_back(json_num(v));
    rows.push_back(line);
  }
  Json records = Json::array();
  for (const TrialRecord& rec : table.records) records.push_back(trial_json(rec));
  return Json{{"name", table.name},   {"columns", table.columns},
              {"rows", rows},         {"records", records},
              {"skipped", table.skipped}, {"total", table.total},
              {"all_bounds_ok", table.all_bounds_ok}};
}

}  // namespace mtls
