#include "legendrian/keylemma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace legendrian::keylemma {

namespace {

double pair_distance(const holo::HoloPair& a, const holo::HoloPair& b, Complex z) {
  return std::hypot(std::abs(a.phi1.eval_unchecked(z) - b.phi1.eval_unchecked(z)),
                    std::abs(a.phi2.eval_unchecked(z) - b.phi2.eval_unchecked(z)));
}

double sup_norm(const contact::LegendrianCurve& c) {
  double m = 0.0;
  for (const auto& v : c.values) m = std::max(m, matrix_norm(v));
  return m;
}

geometry::Density metric_of(const holo::HoloPair& pair) {
  return [pair](Complex z) { return contact::induced_metric_density(pair, z); };
}

double max_entry_difference(const contact::LegendrianCurve& a, const contact::LegendrianCurve& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, max_abs_entry(a.values[i] - b.values[i]));
  return m;
}

// Walks down the distance field from p until it leaves varpi_j; returns the
// exit point, or the last point reached near the source.
Complex descend_out_of_varpi(const geometry::DistanceField& field, const labyrinth::LabyrinthSpec& spec, int j,
                             Complex p) {
  double h = field.spacing();
  Complex z = p;
  for (int k = 0; k < 20 * field.resolution(); ++k) {
    if (!spec.classify(z).in_varpi(j)) return z;
    if (field.at(z) < h) return z;
    auto at = [&](Complex w) { return std::abs(w) <= 1.0 ? field.at(w) : field.at(w / std::abs(w)); };
    Complex grad(at(z + h) - at(z - h), at(z + Complex(0, h)) - at(z - Complex(0, h)));
    if (std::abs(grad) == 0.0) return z;
    z -= 0.5 * h * grad / std::abs(grad);
    if (std::abs(z) > 1.0) z /= std::abs(z);
  }
  return z;
}

}  // namespace

void IterationParams::validate() const {
  if (n < 4) throw std::invalid_argument("N must be at least 4");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (!(s > 0.0 && s < 1.0 / 3.0)) throw std::invalid_argument("s must lie in (0, 1/3)");
  if (radius_resolution < 8) throw std::invalid_argument("radius resolution must be at least 8");
  if (boundary_samples < 1) throw std::invalid_argument("boundary samples must be positive");
}

contact::LegendrianCurve normalize_at(const contact::LegendrianCurve& curve, Complex zeta) {
  contact::SL2Value inv = curve.value_at(zeta).inverse();
  contact::LegendrianCurve out = curve;
  for (auto& v : out.values) v = inv * v;
  out.base_point = zeta;
  out.base_value = contact::SL2Value::identity();
  return out;
}

GaugeRotation diagonal_gauge(const Mat2& f) {
  double scale = 1.0 + matrix_norm(f);
  if (matrix_norm(f - f.adjoint()) > 1e-9 * scale) throw std::invalid_argument("gauge input is not Hermitian");
  if (std::abs(f.det() - 1.0) > 1e-8 * scale * scale) throw std::invalid_argument("gauge input has det != 1");
  if (!(f.trace().real() > 0.0)) throw std::invalid_argument("gauge input has non-positive trace");
  GaugeRotation g;
  g.t = f.m12 == Complex(0.0) ? 0.0 : -std::arg(f.m12) / 2.0;
  g.a = Mat2::diagonal(std::polar(1.0, g.t), std::polar(1.0, -g.t));
  return g;
}

Mat2 conjugate(const GaugeRotation& g, const Mat2& x) { return g.a * x * g.a.adjoint(); }

holo::HoloPair gauge_data(const holo::HoloPair& pair, double t) { return holo::rotate_pair(pair, -2.0 * t); }

SweepContext::SweepContext(const IterationParams& params)
    : params_(params), spec_(params.n), runge_(spec_, params.runge) {
  params_.validate();
}

Step step(const contact::LegendrianCurve& prev, int j, SweepContext& context) {
  const IterationParams& p = context.params();
  const labyrinth::LabyrinthSpec& spec = context.spec();
  StepRecord rec;
  rec.j = j;
  rec.zeta = spec.base_point(j);

  contact::LegendrianCurve e0 = normalize_at(prev, rec.zeta);
  Mat2 e0_origin = e0.origin_value();
  GaugeRotation gauge = diagonal_gauge(e0_origin * e0_origin.adjoint());
  rec.gauge_t = gauge.t;
  rec.gauge_unitarity = matrix_norm(gauge.a * gauge.a.adjoint() - Mat2::identity());
  rec.gauge_off_diagonal = std::abs(conjugate(gauge, e0_origin * e0_origin.adjoint()).m12.imag());

  holo::HoloPair phi = gauge_data(prev.pair, gauge.t);
  // E = a E_0 a^* has E^{-1}E' = a M_{phi_{j-1}} a^*; compare with M_phi.
  for (int ir = 0; ir < prev.grid.radii; ir += 4)
    for (int ia = 0; ia < prev.grid.angles; ia += 4) {
      Mat2 e = conjugate(gauge, e0.at(ir, ia));
      Mat2 de = conjugate(gauge, e0.at(ir, ia) * holo::matrix_form(prev.pair, prev.grid.node(ir, ia)));
      Mat2 lhs = e.inverse() * de;
      rec.data_relation =
          std::max(rec.data_relation, max_abs_entry(lhs - holo::matrix_form(phi, prev.grid.node(ir, ia))));
    }

  runge::Modified mod = runge::modify_pair(phi, context.runge(), j, p.eps);
  rec.certificate = mod.certificate;

  contact::LegendrianCurve et = contact::integrate(mod.pair, rec.zeta, contact::SL2Value::identity(), prev.grid);
  Mat2 et0_inv = et.origin_value().inverse();
  Mat2 a_star = gauge.a.adjoint();
  contact::LegendrianCurve next;
  next.pair = gauge_data(mod.pair, -gauge.t);
  next.base_point = 0.0;
  next.base_value = contact::SL2Value::identity();
  next.grid = prev.grid;
  next.values.resize(et.values.size());
  for (std::size_t i = 0; i < et.values.size(); ++i) next.values[i] = a_star * et0_inv * et.values[i] * gauge.a;
  next.integration_error = et.integration_error;

  contact::LegendrianCurve direct = contact::integrate(next.pair, 0.0, contact::SL2Value::identity(), prev.grid);
  rec.dual_route = max_entry_difference(next, direct);
  rec.integration_error = std::max(et.integration_error, direct.integration_error);

  runge::RegionSamples samples = context.runge().samples(j);
  for (Complex z : samples.outside) rec.sup_dev_off = std::max(rec.sup_dev_off, pair_distance(next.pair, prev.pair, z));
  rec.min_on_omega = rec.min_on_varpi = std::numeric_limits<double>::infinity();
  for (Complex z : samples.omega) rec.min_on_omega = std::min(rec.min_on_omega, next.pair.modulus(z));
  for (Complex z : samples.varpi) rec.min_on_varpi = std::min(rec.min_on_varpi, next.pair.modulus(z));

  rec.origin_error = matrix_norm(next.origin_value() - Mat2::identity());
  rec.residual = contact::legendrian_residual(next);
  rec.det_drift = contact::det_drift(next);
  rec.sup_norm = sup_norm(next);
  rec.radius = geometry::intrinsic_radius_estimate(next, p.radius_resolution);
  return {std::move(next), std::move(rec)};
}

StepEstimates verify_step_estimates(const contact::LegendrianCurve& prev, const contact::LegendrianCurve& next,
                                    int j, SweepContext& context, double max_l0) {
  const IterationParams& p = context.params();
  const labyrinth::LabyrinthSpec& spec = context.spec();
  double nn = static_cast<double>(p.n), sq = std::sqrt(nn), s = p.s;
  StepEstimates est;
  est.j = j;
  Complex zeta = spec.base_point(j);

  for (int ir = 0; ir < next.grid.radii; ++ir)
    for (int ia = 0; ia < next.grid.angles; ++ia) {
      if (spec.classify(next.grid.node(ir, ia)).in_varpi(j)) continue;
      double d = geometry::h3_distance(geometry::h3_point(next.at(ir, ia)), geometry::h3_point(prev.at(ir, ia)));
      est.safe.measured = std::max(est.safe.measured, d);
      ++est.safe.points;
    }
  est.safe.constant = est.safe.measured * 2.0 * nn * nn / p.eps;

  Mat2 prev_zeta = prev.value_at(zeta), next_zeta = next.value_at(zeta);
  est.lemma_1a.measured = std::norm(matrix_norm(prev_zeta));
  est.lemma_1a.constant = std::max(0.0, est.lemma_1a.measured / (max_l0 * max_l0) - 1.0) * nn;
  est.lemma_1a.points = 1;
  est.lemma_1b.measured = geometry::h3_distance(geometry::h3_point(prev_zeta), geometry::h3_point(next_zeta));
  est.lemma_1b.constant = est.lemma_1b.measured * nn * nn;
  est.lemma_1b.points = 1;

  // The frame of the step: E~ = a L_j(zeta)^{-1} L_j a^*, with a from L_{j-1}.
  Mat2 e0_origin = prev_zeta.inverse();
  GaugeRotation gauge = diagonal_gauge(e0_origin * e0_origin.adjoint());
  Mat2 next_zeta_inv = next_zeta.inverse();

  geometry::Density density = metric_of(next.pair);
  auto from_origin = geometry::geodesic_distance_field(density, 0.0, p.radius_resolution);
  auto from_zeta = geometry::geodesic_distance_field(density, zeta, p.radius_resolution);
  auto circle = geometry::geodesic_circle(from_origin, p.rho0 + s, p.boundary_samples);
  est.circle_points = circle.size();
  for (const auto& cp : circle) {
    Complex pt = cp.point;
    if (!spec.classify(pt).in_varpi(j)) continue;
    ++est.circle_in_varpi;

    double d_zeta = from_zeta.at(pt);
    est.boundary.measured = std::max(est.boundary.measured, d_zeta);
    est.boundary.constant = std::max(est.boundary.constant, std::max(0.0, d_zeta - s) * sq);
    ++est.boundary.points;

    Complex hat = descend_out_of_varpi(from_origin, spec, j, pt);
    double d_hat = std::max(0.0, from_origin.at(pt) - from_origin.at(hat));
    est.s_est.measured = std::max(est.s_est.measured, d_hat);
    est.s_est.constant = std::max(est.s_est.constant, std::max(0.0, d_hat - s) * sq);
    ++est.s_est.points;

    Mat2 e = conjugate(gauge, next_zeta_inv * next.value_at(pt));
    geometry::MinkowskiPoint f = geometry::h3_point(e);
    // Foot of the perpendicular onto the x2-axis through o.
    double to_foot = std::abs(std::atanh(f.x2 / f.x0));
    double to_axis = std::asinh(std::hypot(f.x1, f.x3));
    est.lemma_2.measured = std::max(est.lemma_2.measured, to_foot);
    est.lemma_2.constant = std::max(est.lemma_2.constant, std::max(0.0, to_foot - 2.0 * s) * sq);
    ++est.lemma_2.points;
    est.lemma_3.measured = std::max(est.lemma_3.measured, to_axis);
    est.lemma_3.constant = std::max(est.lemma_3.constant, std::max(0.0, to_axis - 14.0 * s * s) * sq);
    ++est.lemma_3.points;
  }
  return est;
}

Sweep sweep(const contact::LegendrianCurve& initial, const IterationParams& params_in) {
  params_in.validate();
  IterationParams params = params_in;
  Sweep out;
  IterationReport& rep = out.report;
  auto r0 = geometry::intrinsic_radius_estimate(initial, params.radius_resolution);
  rep.initial_radius = r0.value;
  rep.initial_radius_error = r0.error;
  if (!(params.rho0 > 0.0)) params.rho0 = r0.value;
  rep.max_l0 = sup_norm(initial);
  if (!(params.tau > kSqrt2)) params.tau = std::max(rep.max_l0, std::nextafter(kSqrt2, 2.0));
  rep.params = params;
  rep.diagnostic = params.runge.request_override.has_value();
  if (matrix_norm(initial.origin_value() - Mat2::identity()) > 1e-10) {
    rep.failure = "initial curve is not the identity at the origin";
    return out;
  }

  SweepContext context(params);
  out.curves.push_back(initial);
  for (int j = 1; j <= 2 * params.n; ++j) {
    try {
      Step st = step(out.curves.back(), j, context);
      rep.estimates.push_back(verify_step_estimates(out.curves.back(), st.curve, j, context, rep.max_l0));
      rep.steps.push_back(std::move(st.record));
      out.curves.push_back(std::move(st.curve));
    } catch (const runge::CertificationError& e) {
      rep.failed_step = j;
      rep.failure = e.what();
      rep.failure_margins = e.best();
      return out;
    } catch (const Error& e) {
      rep.failed_step = j;
      rep.failure = e.what();
      return out;
    } catch (const std::range_error& e) {
      rep.failed_step = j;
      rep.failure = e.what();
      return out;
    }
  }
  rep.completed = true;

  double nn = static_cast<double>(params.n);
  const contact::LegendrianCurve& last = out.curves.back();
  auto rf = geometry::intrinsic_radius_estimate(last, params.radius_resolution);
  rep.final_radius = rf.value;
  rep.final_radius_error = rf.error;
  rep.c4_margin = rf.value + rf.error - (params.rho0 + params.s);

  auto field = geometry::geodesic_distance_field(metric_of(last.pair), 0.0, params.radius_resolution);
  for (int ir = 0; ir < last.grid.radii; ++ir)
    for (int ia = 0; ia < last.grid.angles; ++ia)
      if (field.at(last.grid.node(ir, ia)) <= params.rho0 + params.s)
        rep.sup_final = std::max(rep.sup_final, matrix_norm(last.at(ir, ia)));
  double ratio = rep.sup_final / rep.max_l0;
  double s2 = 32.0 * params.s * params.s;
  rep.b_empirical = std::max(0.0, ratio * ratio - 1.0 - s2) * std::sqrt(nn);
  rep.c5_margin = rep.max_l0 * std::sqrt(1.0 + s2 + rep.b_empirical / std::sqrt(nn)) - rep.sup_final;

  rep.c_empirical = std::numeric_limits<double>::infinity();
  for (const auto& st : rep.steps)
    rep.c_empirical =
        std::min({rep.c_empirical, st.min_on_omega / std::pow(nn, 3.5), st.min_on_varpi * std::sqrt(nn)});
  return out;
}

MainLemmaMargins verify_main_lemma(const contact::LegendrianCurve& x, const contact::LegendrianCurve& y,
                                   const IterationParams& params) {
  if (x.grid.radii != y.grid.radii || x.grid.angles != y.grid.angles)
    throw std::invalid_argument("curves must share a grid");
  MainLemmaMargins m;
  m.origin = matrix_norm(y.origin_value() - Mat2::identity());
  auto rx = geometry::intrinsic_radius_estimate(x, params.radius_resolution);
  auto ry = geometry::intrinsic_radius_estimate(y, params.radius_resolution);
  m.radius = ry.value - rx.value - params.s;
  m.radius_error = rx.error + ry.error;
  double tau = params.tau > kSqrt2 ? params.tau : sup_norm(x);
  m.bound = tau * std::sqrt(1.0 + 32.0 * params.s * params.s + params.eps) - sup_norm(y);
  double worst = 0.0;
  for (int ir = 0; ir < x.grid.radii; ++ir) {
    if (x.grid.radius(ir) > 1.0 - params.eps) break;
    for (int ia = 0; ia < x.grid.angles; ++ia) {
      Complex z = x.grid.node(ir, ia);
      worst = std::max({worst, matrix_norm(y.at(ir, ia) - x.at(ir, ia)), pair_distance(x.pair, y.pair, z)});
    }
  }
  m.closeness = params.eps - worst;
  return m;
}

Rounds run_rounds(const contact::LegendrianCurve& initial, const IterationParams& params, int rounds) {
  if (rounds < 1) throw std::invalid_argument("rounds must be at least 1");
  Rounds out;
  out.final_curve = initial;
  double tau = params.tau > kSqrt2 ? params.tau : std::max(sup_norm(initial), std::nextafter(kSqrt2, 2.0));
  out.report.sup_norm.push_back(sup_norm(initial));
  out.report.tau.push_back(tau);
  for (int k = 0; k < rounds; ++k) {
    IterationParams pk = params;
    double scale = std::ldexp(1.0, -k);
    pk.eps = params.eps * scale;
    pk.s = params.s * scale;
    pk.rho0 = 0.0;
    pk.tau = tau;
    Sweep sw = sweep(out.final_curve, pk);
    bool done = sw.report.completed;
    out.report.rounds.push_back(sw.report);
    if (!done) return out;
    const contact::LegendrianCurve& y = sw.curves.back();
    out.report.main_lemma.push_back(verify_main_lemma(out.final_curve, y, pk));
    double cauchy = 0.0;
    for (int ir = 0; ir < y.grid.radii && y.grid.radius(ir) <= 1.0 - pk.eps; ++ir)
      for (int ia = 0; ia < y.grid.angles; ++ia)
        cauchy = std::max(cauchy, matrix_norm(y.at(ir, ia) - out.final_curve.at(ir, ia)));
    out.report.cauchy.push_back(cauchy);
    tau *= std::sqrt(1.0 + 32.0 * pk.s * pk.s + pk.eps);
    out.report.tau.push_back(tau);
    out.report.sup_norm.push_back(sup_norm(y));
    out.final_curve = y;
  }
  out.report.completed = true;
  return out;
}

void to_json(nlohmann::json& j, const IterationParams& p) {
  j = {{"N", p.n},
       {"eps", p.eps},
       {"s", p.s},
       {"rho0", p.rho0},
       {"tau", p.tau},
       {"grid", {{"radii", p.grid.radii}, {"angles", p.grid.angles}}},
       {"radius_resolution", p.radius_resolution},
       {"boundary_samples", p.boundary_samples},
       {"runge",
        {{"samples_per_region", p.runge.samples_per_region},
         {"boundary_density", p.runge.boundary_density},
         {"degrees", p.runge.degrees},
         {"degree_cap", p.runge.degree_cap},
         {"norm_grid", p.runge.norm_grid},
         {"request_override", p.runge.request_override ? nlohmann::json(*p.runge.request_override)
                                                       : nlohmann::json(nullptr)}}}};
}

void to_json(nlohmann::json& j, const StepRecord& r) {
  j = {{"j", r.j},
       {"zeta", {r.zeta.real(), r.zeta.imag()}},
       {"gauge_t", r.gauge_t},
       {"gauge_unitarity", r.gauge_unitarity},
       {"gauge_off_diagonal", r.gauge_off_diagonal},
       {"data_relation", r.data_relation},
       {"certificate", r.certificate},
       {"sup_dev_off", r.sup_dev_off},
       {"min_on_omega", r.min_on_omega},
       {"min_on_varpi", r.min_on_varpi},
       {"origin_error", r.origin_error},
       {"residual",
        {{"anti_diagonal", r.residual.anti_diagonal},
         {"contact_form", r.residual.contact_form},
         {"finite_difference", r.residual.finite_difference}}},
       {"det_drift", r.det_drift},
       {"dual_route", r.dual_route},
       {"integration_error", r.integration_error},
       {"sup_norm", r.sup_norm},
       {"radius", {{"value", r.radius.value}, {"coarse", r.radius.coarse}, {"error", r.radius.error}}}};
}

void to_json(nlohmann::json& j, const Estimate& e) {
  j = {{"measured", e.measured}, {"constant", e.constant}, {"points", e.points}};
}

void to_json(nlohmann::json& j, const StepEstimates& e) {
  j = {{"j", e.j},
       {"safe", e.safe},
       {"s_est", e.s_est},
       {"boundary", e.boundary},
       {"lemma_1a", e.lemma_1a},
       {"lemma_1b", e.lemma_1b},
       {"lemma_2", e.lemma_2},
       {"lemma_3", e.lemma_3},
       {"circle_points", e.circle_points},
       {"circle_in_varpi", e.circle_in_varpi}};
}

void to_json(nlohmann::json& j, const IterationReport& r) {
  j = {{"params", r.params},
       {"diagnostic", r.diagnostic},
       {"completed", r.completed},
       {"failed_step", r.failed_step ? nlohmann::json(*r.failed_step) : nlohmann::json(nullptr)},
       {"failure", r.failure},
       {"failure_margins", r.failure_margins ? nlohmann::json(*r.failure_margins) : nlohmann::json(nullptr)},
       {"initial_radius", r.initial_radius},
       {"initial_radius_error", r.initial_radius_error},
       {"max_l0", r.max_l0},
       {"steps", r.steps},
       {"estimates", r.estimates},
       {"final_radius", r.final_radius},
       {"final_radius_error", r.final_radius_error},
       {"c4_margin", r.c4_margin},
       {"sup_final", r.sup_final},
       {"b_empirical", r.b_empirical},
       {"c_empirical", r.completed ? nlohmann::json(r.c_empirical) : nlohmann::json(nullptr)},
       {"c5_margin", r.c5_margin}};
}

void to_json(nlohmann::json& j, const MainLemmaMargins& m) {
  j = {{"origin", m.origin},
       {"radius", m.radius},
       {"radius_error", m.radius_error},
       {"bound", m.bound},
       {"closeness", m.closeness}};
}

void to_json(nlohmann::json& j, const RoundsReport& r) {
  j = {{"rounds", r.rounds},
       {"main_lemma", r.main_lemma},
       {"cauchy", r.cauchy},
       {"tau", r.tau},
       {"sup_norm", r.sup_norm},
       {"completed", r.completed}};
}

}  // namespace legendrian::keylemma
