#include "vg/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace vg {

std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json json_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

namespace {

Json numbers(const std::vector<double>& xs) {
  Json a = Json::array();
  for (double x : xs) a.push_back(json_number(x));
  return a;
}

template <class T>
Json optional_number(const std::optional<T>& x) {
  if (!x) return nullptr;
  if constexpr (std::is_floating_point_v<T>) return json_number(*x);
  else return *x;
}

}  // namespace

Json to_json(const ModelParams& params) {
  return Json{{"c", json_number(params.c)}, {"classical", params.is_classical()}};
}

Json to_json(const CasimirCheck& c) {
  return Json{{"passed", c.passed()},
              {"regular", c.regular},
              {"growth", c.growth},
              {"two_sided", c.two_sided},
              {"inverse_ok", c.inverse_ok},
              {"ratio_min", json_number(c.ratio_min)},
              {"ratio_max", json_number(c.ratio_max)},
              {"growth_constant", json_number(c.growth_constant)},
              {"inverse_max_error", json_number(c.inverse_max_error)},
              {"dichotomy_max_violation", json_number(c.dichotomy_max_violation)},
              {"failures", c.failures}};
}

Json to_json(const FunctionalReport& r) {
  return Json{{"m1", json_number(r.m1)},     {"mj", json_number(r.mj)},   {"ekin", json_number(r.ekin)},
              {"epot", json_number(r.epot)}, {"hc", json_number(r.hc)}, {"ej_norm", json_number(r.ej_norm)}};
}

Json to_json(const GroundState& s) {
  return Json{{"model", to_json(s.params)},
              {"casimir", s.spec.name},
              {"p", json_number(s.spec.p)},
              {"route", s.route},
              {"trivial", s.trivial},
              {"lambda", json_number(s.lambda)},
              {"mu", json_number(s.mu)},
              {"psi0", json_number(s.psi0)},
              {"a", json_number(s.a)},
              {"r_support", json_number(s.r_support)},
              {"u_bound", json_number(s.trivial ? 0.0 : s.u_bound())},
              {"rho_center", json_number(s.rho_center())},
              {"m1", json_number(s.m1)},
              {"mj", json_number(s.mj)},
              {"ekin", json_number(s.ekin)},
              {"epot", json_number(s.epot)},
              {"hc", json_number(s.hc)},
              {"grid", Json{{"r_max", json_number(s.phi.grid.max)},
                            {"n", s.phi.grid.n},
                            {"u_max", json_number(s.f.grid_u().max)},
                            {"m", s.f.grid_u().n}}}};
}

Json to_json(const IdentityResiduals& r) {
  return Json{{"virial", json_number(r.virial)},
              {"mf", json_number(r.mf)},
              {"mnablav", json_number(r.mnablav)},
              {"mnablax", json_number(r.mnablax)},
              {"el1", json_number(r.el1)},
              {"el2", json_number(r.el2)},
              {"muj", json_number(r.muj)},
              {"lambda", json_number(r.lambda)},
              {"virial2", json_number(r.virial2)},
              {"inegatif", json_number(r.inegatif)},
              {"potential_routes", json_number(r.potential_routes)},
              {"max_abs", json_number(r.max_abs())},
              {"mu_negative", r.mu_negative},
              {"lambda_negative", r.lambda_negative},
              {"convexity_positive", r.convexity_positive},
              {"muj_sign", r.muj_sign}};
}

Json to_json(const SupportReport& r) {
  return Json{{"ok", r.ok},
              {"r_support", json_number(r.r_support)},
              {"u_bound", json_number(r.u_bound)},
              {"max_outside", json_number(r.max_outside)},
              {"potential_below_lambda", r.potential_below_lambda},
              {"potential_increasing", r.potential_increasing}};
}

Json to_json(const KjEstimate& k) {
  return Json{{"p", json_number(k.p)},
              {"k_hat", json_number(k.best_quotient)},
              {"trial_count", k.trial_count},
              {"witness", k.witness},
              {"note", "upper bound for K_j from a finite trial search"}};
}

Json to_json(const ThresholdVerdict& v) {
  return Json{{"classical", v.classical},        {"s", json_number(v.s)},  {"bound", json_number(v.bound)},
              {"below_estimate", v.below_estimate}, {"verdict", v.verdict}, {"caveat", v.caveat}};
}

Json to_json(const ScalingReport& r) {
  return Json{{"parameter", json_number(r.parameter)},
              {"before", to_json(r.before)},
              {"after", to_json(r.after)},
              {"predicted_after", to_json(r.predicted_after)},
              {"max_relative_gap", json_number(r.max_relative_gap)},
              {"h_alpha", json_number(r.h_alpha)},
              {"dichotomy_ok", r.dichotomy_ok}};
}

Json to_json(const MonotonicityReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back(Json{{"k", json_number(row.k)},
                        {"hc_mj", json_number(row.hc_mj)},
                        {"hc_m1", json_number(row.hc_m1)},
                        {"bound_mj", json_number(row.bound_mj)},
                        {"bound_m1", json_number(row.bound_m1)},
                        {"margin_mj", json_number(row.margin_mj)},
                        {"margin_m1", json_number(row.margin_m1)}});
  return Json{{"hc", json_number(r.hc)}, {"min_margin", json_number(r.min_margin())}, {"rows", rows}};
}

Json to_json(const FRoots& r) {
  return Json{{"roots", numbers(r.roots)},
              {"count", r.roots.size()},
              {"window", numbers({r.window_lo, r.window_hi})}};
}

Json to_json(const EquimeasureReport& r) {
  return Json{{"max_discrepancy", json_number(r.max_discrepancy)},
              {"worst_level", r.worst_level},
              {"sup_f", json_number(r.sup_f)},
              {"sup_g", json_number(r.sup_g)}};
}

Json to_json(const LevelAsymptotic& l) {
  return Json{{"curvature", json_number(l.curvature)},
              {"curvature_from_rho", json_number(l.curvature_from_rho)},
              {"exponent", json_number(l.exponent)},
              {"coefficient", json_number(l.coefficient)},
              {"predicted", json_number(l.predicted)},
              {"gaps", numbers(l.gaps)},
              {"measures", numbers(l.measures)}};
}

Json to_json(const BootstrapResult& b) {
  return Json{{"q", numbers(b.q)},
              {"iterations", b.q.empty() ? 0 : b.q.size() - 1},
              {"first_above", optional_number(b.first_above)},
              {"boundary_hit", b.boundary_hit},
              {"fixed_point", json_number(b.fixed_point)}};
}

Json to_json(const ConservationReport& r) {
  return Json{{"n", r.n},
              {"dt", json_number(r.dt)},
              {"t_end", json_number(r.t_end)},
              {"t_dyn", json_number(r.t_dyn)},
              {"hc_drift", json_number(r.hc_drift)},
              {"m1_drift", json_number(r.m1_drift)},
              {"f_identical", r.f_identical},
              {"virial_initial", json_number(r.virial_initial)},
              {"virial_max", json_number(r.virial_max)}};
}

Json to_json(const StabilityRun& r) {
  return Json{{"delta", json_number(r.delta)},
              {"max_dist_rho", json_number(r.max_dist_rho)},
              {"prior_window_max", json_number(r.prior_window_max)},
              {"final_window_max", json_number(r.final_window_max)},
              {"max_hc_gap", json_number(r.max_hc_gap)},
              {"max_abs_virial", json_number(r.max_abs_virial)},
              {"hc_drift", json_number(r.hc_drift)}};
}

Json to_json(const StabilityReport& r) {
  Json runs = Json::array();
  for (const auto& run : r.runs) runs.push_back(to_json(run));
  return Json{{"seed", r.seed},
              {"n", r.n},
              {"dt", json_number(r.dt)},
              {"t_end", json_number(r.t_end)},
              {"t_dyn", json_number(r.t_dyn)},
              {"perturbation", to_string(r.kind)},
              {"noise_floor", json_number(r.noise_floor)},
              {"baseline", to_json(r.baseline)},
              {"runs", runs},
              {"at_noise_floor", r.at_noise_floor},
              {"monotone", r.monotone},
              {"no_growth", r.no_growth},
              {"verdict", r.verdict},
              {"metric_note", r.metric_note}};
}

Json to_json(const BlowupReport& r) {
  return Json{{"model", to_json(r.params)},
              {"seed", r.seed},
              {"n", r.n},
              {"hc0", json_number(r.hc0)},
              {"dt", json_number(r.dt)},
              {"t_end", json_number(r.t_end)},
              {"t_dyn", json_number(r.t_dyn)},
              {"rho_center0", json_number(r.rho_center0)},
              {"max_rho_ratio", json_number(r.max_rho_ratio)},
              {"t_concentration", optional_number(r.t_concentration)},
              {"halted_by_guard", r.halted_by_guard},
              {"t_final", json_number(r.t_final)},
              {"ekin_growth", json_number(r.ekin_growth)},
              {"hc_drift", json_number(r.hc_drift)},
              {"verdict", r.verdict}};
}

void write_json(const Json& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

void write_table(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path.string());
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format17(row[k]);
    out << '\n';
  }
}

void write_diagnostics(const std::vector<DiagnosticsRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write " + path.string());
  out << "t,hc,m1,ekin,epot,virial,rho_center,dist_rho\n";
  for (const auto& r : records) {
    out << format17(r.t) << ',' << format17(r.hc) << ',' << format17(r.m1) << ',' << format17(r.ekin) << ','
        << format17(r.epot) << ',' << format17(r.virial) << ',' << format17(r.rho_center) << ','
        << (r.dist_rho ? format17(*r.dist_rho) : std::string()) << '\n';
  }
}

}  // namespace vg
