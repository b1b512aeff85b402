#include "vg/experiments.hpp"

#include <algorithm>
#include <cmath>

namespace vg {

namespace {

double dynamical_time(const GroundState& st) {
  if (st.trivial || !(st.rho_center() > 0.0)) throw DomainError("dynamics: degenerate state");
  return 1.0 / std::sqrt(st.rho_center());
}

SelfGravity smooth_model(const GroundState& st, const DynamicsOptions& opt) {
  return {opt.softening.value_or(default_softening(st.r_support, opt.n)),
          opt.shell_width.value_or(default_shell_width(st.r_support))};
}

void check_options(const DynamicsOptions& opt) {
  if (opt.n < 1000) throw DomainError("dynamics: n >= 1000 required");
  if (!(opt.t_end_dyn > 0.0)) throw DomainError("dynamics: t_end must be positive");
  if (!(opt.dt_fraction > 0.0)) throw DomainError("dynamics: dt must be positive");
  if (opt.bins < 2) throw DomainError("dynamics: at least two bins required");
}

double max_hc_drift(const std::vector<DiagnosticsRecord>& recs) {
  double d = 0.0;
  for (const auto& r : recs) d = std::max(d, std::abs(r.hc - recs.front().hc) / std::abs(recs.front().hc));
  return d;
}

}  // namespace

std::string to_string(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::amplitude: return "amplitude";
    case PerturbationKind::dilation: return "dilation";
    case PerturbationKind::velocity_kick: return "velocity_kick";
  }
  return "unknown";
}

PerturbationKind perturbation_from_string(const std::string& name) {
  for (auto k : {PerturbationKind::amplitude, PerturbationKind::dilation, PerturbationKind::velocity_kick})
    if (to_string(k) == name) return k;
  throw DomainError("unknown perturbation kind '" + name + "'");
}

ParticleEnsemble perturb(ParticleEnsemble ens, PerturbationKind kind, double delta) {
  if (!(delta > -1.0)) throw DomainError("perturb: delta must exceed -1");
  const double s = 1.0 + delta;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    switch (kind) {
      case PerturbationKind::amplitude:
        ens.w[i] *= s;
        ens.f[i] *= s;
        break;
      case PerturbationKind::dilation:
        for (int d = 0; d < 3; ++d) ens.x[i][d] *= s, ens.v[i][d] /= s;
        break;
      case PerturbationKind::velocity_kick:
        for (int d = 0; d < 3; ++d) ens.v[i][d] *= s;
        break;
    }
  }
  return ens;
}

ConservationReport conservation_run(const GroundState& st, const DynamicsOptions& opt) {
  check_options(opt);
  ConservationReport rep;
  rep.n = opt.n;
  rep.t_dyn = dynamical_time(st);
  rep.dt = opt.dt_fraction * rep.t_dyn;
  rep.t_end = opt.t_end_dyn * rep.t_dyn;
  ParticleEnsemble ens = sample_state(st, opt.n, opt.seed);
  const std::vector<double> f0 = ens.f;
  EvolveOptions eo;
  eo.diag_every = opt.diag_every;
  eo.spec = st.spec;
  eo.lq = {2.0};
  rep.records = evolve(ens, rep.t_end, rep.dt, smooth_model(st, opt), eo).records;
  rep.hc_drift = max_hc_drift(rep.records);
  for (const auto& r : rep.records) {
    rep.m1_drift = std::max(rep.m1_drift, std::abs(r.m1 - rep.records.front().m1));
    rep.virial_max = std::max(rep.virial_max, std::abs(r.virial));
  }
  rep.virial_initial = std::abs(rep.records.front().virial);
  rep.f_identical = ens.f == f0;
  return rep;
}

StabilityReport stability_experiment(const GroundState& st, std::vector<double> deltas, PerturbationKind kind,
                                     const DynamicsOptions& opt) {
  check_options(opt);
  for (double d : deltas)
    if (!(d > 0.0)) throw DomainError("stability_experiment: deltas must be positive");
  std::sort(deltas.begin(), deltas.end());
  StabilityReport rep;
  rep.seed = opt.seed;
  rep.n = opt.n;
  rep.kind = kind;
  rep.t_dyn = dynamical_time(st);
  rep.dt = opt.dt_fraction * rep.t_dyn;
  rep.t_end = opt.t_end_dyn * rep.t_dyn;
  rep.metric_note =
      "proxy for the energy-space distance: binned rho L1 distance, |hc(t) - hc(Q)|, virial residual; "
      "the energy norm itself is not evaluated from particles";

  const ParticleEnsemble base = sample_state(st, opt.n, opt.seed);
  EvolveOptions eo;
  eo.diag_every = opt.diag_every;
  eo.reference = reference_from_ensemble(base, opt.bins);
  rep.noise_floor = rho_noise_floor(*eo.reference, opt.n);
  const SelfGravity model = smooth_model(st, opt);
  double hc_ref = 0.0;

  auto run = [&](double delta) {
    ParticleEnsemble ens = delta == 0.0 ? base : perturb(base, kind, delta);
    StabilityRun out;
    out.delta = delta;
    out.records = evolve(ens, rep.t_end, rep.dt, model, eo).records;
    if (delta == 0.0) hc_ref = out.records.front().hc;
    const std::size_t m = out.records.size();
    for (std::size_t k = 0; k < m; ++k) {
      const auto& r = out.records[k];
      const double d = r.dist_rho.value_or(0.0);
      out.max_dist_rho = std::max(out.max_dist_rho, d);
      if (4 * k >= 2 * m && 4 * k < 3 * m) out.prior_window_max = std::max(out.prior_window_max, d);
      if (4 * k >= 3 * m) out.final_window_max = std::max(out.final_window_max, d);
      out.max_hc_gap = std::max(out.max_hc_gap, std::abs(r.hc - hc_ref) / std::abs(hc_ref));
      out.max_abs_virial = std::max(out.max_abs_virial, std::abs(r.virial));
    }
    out.hc_drift = max_hc_drift(out.records);
    return out;
  };

  rep.baseline = run(0.0);
  for (double d : deltas) rep.runs.push_back(run(d));

  rep.at_noise_floor = rep.baseline.max_dist_rho <= 3.0 * rep.noise_floor;
  rep.monotone = true;
  double prev = rep.baseline.max_dist_rho;
  for (const auto& r : rep.runs) rep.monotone = rep.monotone && r.max_dist_rho > prev, prev = r.max_dist_rho;
  auto settled = [&](const StabilityRun& r) {
    return r.final_window_max <= 1.1 * r.prior_window_max + rep.noise_floor;
  };
  rep.no_growth = settled(rep.baseline);
  for (const auto& r : rep.runs) rep.no_growth = rep.no_growth && settled(r);
  rep.verdict = rep.at_noise_floor && rep.monotone && rep.no_growth ? "stable" : "inconclusive";
  return rep;
}

PhaseDensity blowup_datum(const GroundState& st, double sigma) {
  if (!st.params.is_classical()) throw DomainError("blowup_datum: needs a classical state");
  if (st.trivial) throw DomainError("blowup_datum: degenerate state");
  if (!(sigma > 0.0)) throw DomainError("blowup_datum: sigma must be positive");
  const PhaseDensity& q = st.f;
  PhaseDensity out(RadialGrid::make(q.grid_r().max / sigma, q.grid_r().n),
                   SpeedGrid::make(q.grid_u().max * sigma * sigma, q.grid_u().n));
  std::copy(q.values().begin(), q.values().end(), out.values().begin());
  return out;
}

BlowupReport blowup_experiment(const CasimirSpec& spec, const ModelParams& params, const PhaseDensity& initial,
                               const BlowupOptions& opt) {
  if (opt.n < 1000) throw DomainError("blowup_experiment: n >= 1000 required");
  if (!(opt.growth > 1.0)) throw DomainError("blowup_experiment: growth factor must exceed 1");
  BlowupReport rep;
  rep.params = params;
  rep.seed = opt.seed;
  rep.n = opt.n;
  rep.hc0 = functionals(initial, spec, params).hc;
  if (!(rep.hc0 < 0.0)) throw DomainError("blowup_experiment: initial data must have hc < 0");

  ParticleEnsemble ens = sample_density(initial, params, opt.n, opt.seed);
  const std::size_t k = std::max<std::size_t>(32, opt.n / 1000);
  rep.rho_center0 = rho_center_estimate(ens, k);
  rep.t_dyn = 1.0 / std::sqrt(rep.rho_center0);
  rep.dt = opt.dt_fraction * rep.t_dyn;
  rep.t_end = opt.t_end_dyn * rep.t_dyn;
  const double eps = opt.softening.value_or(default_softening(initial.support_radius(), opt.n));

  Leapfrog lf(SelfGravity{eps, 0.0});
  EvolveOptions eo;
  eo.center_count = k;
  rep.records.push_back(diagnose(ens, 0.0, lf, eo));
  const double ekin0 = rep.records.front().ekin;
  rep.ekin_growth = 1.0;
  const auto steps = static_cast<std::size_t>(std::llround(rep.t_end / rep.dt));
  const double guard = opt.guard_fraction * eps;
  std::vector<double> r(opt.n);
  for (std::size_t s = 1; s <= steps; ++s) {
    lf.step(ens, rep.dt);
    rep.t_final = static_cast<double>(s) * rep.dt;
    for (std::size_t i = 0; i < opt.n; ++i) r[i] = std::hypot(ens.x[i][0], ens.x[i][1], ens.x[i][2]);
    std::nth_element(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(k - 1), r.end());
    rep.halted_by_guard = r[k - 1] < guard;
    const double rho_c = rho_center_estimate(ens, k);
    rep.max_rho_ratio = std::max(rep.max_rho_ratio, rho_c / rep.rho_center0);
    const bool concentrated = rho_c > opt.growth * rep.rho_center0;
    if (concentrated && !rep.t_concentration) rep.t_concentration = rep.t_final;
    const bool stop = concentrated || rep.halted_by_guard;
    if (s % opt.diag_every == 0 || s == steps || stop) {
      rep.records.push_back(diagnose(ens, rep.t_final, lf, eo));
      rep.ekin_growth = std::max(rep.ekin_growth, rep.records.back().ekin / ekin0);
    }
    if (stop) break;
  }
  rep.max_rho_ratio = std::max(rep.max_rho_ratio, 1.0);
  rep.hc_drift = max_hc_drift(rep.records);
  rep.verdict = rep.t_concentration ? "concentrating" : "not concentrating";
  return rep;
}

}  // namespace vg
