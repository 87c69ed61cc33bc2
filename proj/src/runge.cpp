#include "legendrian/runge.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace legendrian::runge {

namespace {

int parity_of(int j) { return j % 2; }
int reference_index(int parity) { return parity == 1 ? 1 : 2; }

std::vector<Complex> rotated(const std::vector<Complex>& pts, Complex by) {
  std::vector<Complex> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) out[i] = pts[i] * by;
  return out;
}

bool degenerate(const BumpRequest& r) { return r.inner_target == r.outer_target; }

// Margins of h = exp(g) over the given points; stops at the first violation
// when `fail_fast` is set.
BumpMargins measure(const holo::HoloFunction& g, const BumpRequest& r, const std::vector<Complex>& inner,
                    const std::vector<Complex>& outer, bool fail_fast) {
  BumpMargins m;
  m.degree = g.degree();
  double worst_in = 0.0, worst_out = 0.0;
  double log_in = std::log(r.inner_target), log_out = std::log(r.outer_target);
  m.log_inner_dev = m.log_outer_dev = 0.0;
  for (Complex z : inner) {
    ++m.samples;
    Complex gz = g.eval_unchecked(z);
    m.log_inner_dev = std::max(m.log_inner_dev, std::abs(gz - log_in));
    double dev = std::abs(std::exp(gz) - r.inner_target);
    if (!std::isfinite(dev)) dev = std::numeric_limits<double>::infinity();
    worst_in = std::max(worst_in, dev);
    if (fail_fast && worst_in >= r.inner_tol) break;
  }
  for (Complex z : outer) {
    ++m.samples;
    Complex gz = g.eval_unchecked(z);
    m.log_outer_dev = std::max(m.log_outer_dev, std::abs(gz - log_out));
    double dev = std::abs(std::exp(gz) - r.outer_target);
    if (!std::isfinite(dev)) dev = std::numeric_limits<double>::infinity();
    worst_out = std::max(worst_out, dev);
    if (fail_fast && worst_out >= r.outer_tol) break;
  }
  m.inner = r.inner_tol - worst_in;
  m.outer = r.outer_tol - worst_out;
  return m;
}

// Every `step`-th element, at most `count` of them.
std::vector<Complex> strided(const std::vector<Complex>& pts, std::size_t count) {
  std::vector<Complex> out;
  if (pts.empty() || count == 0) return out;
  double step = std::max(1.0, static_cast<double>(pts.size()) / static_cast<double>(count));
  for (double i = 0.0; i < static_cast<double>(pts.size()) && out.size() < count; i += step)
    out.push_back(pts[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

BumpRequest standard_request(int n, double eps, double m) {
  double n2 = static_cast<double>(n) * n;
  return {2.0 * n2 * n2, 1.0 / (2.0 * n2), 1.0, eps / (2.0 * n2 * m)};
}

BumpRequest identity_request(int n, double eps, double m) {
  BumpRequest r = standard_request(n, eps, m);
  r.inner_target = 1.0;
  return r;
}

RungeContext::RungeContext(const labyrinth::LabyrinthSpec& spec, RungeOptions options)
    : spec_(spec), options_(std::move(options)) {
  if (options_.samples_per_region == 0) throw std::invalid_argument("samples_per_region must be positive");
  if (options_.boundary_density < 1) throw std::invalid_argument("boundary_density must be positive");
}

const RegionSamples& RungeContext::reference_samples(int parity) {
  auto it = samples_.find(parity);
  if (it != samples_.end()) return it->second;
  using labyrinth::Region;
  using labyrinth::RegionKind;
  int j = reference_index(parity);
  double delta = spec_.band_halfwidth();
  std::size_t budget = options_.samples_per_region;

  // Edge spacing: the requested density, but no more than `budget` points.
  double coarse = 64.0 * delta;
  double length = static_cast<double>(labyrinth::omega_boundary(spec_, j, coarse).size()) * coarse;
  double spacing = std::max(delta / options_.boundary_density, length / static_cast<double>(budget));
  auto edge = labyrinth::omega_boundary(spec_, j, spacing);

  RegionSamples s;
  for (const auto& b : edge) {
    Complex on = b.point - 1e-6 * delta * b.normal;
    if (spec_.classify(on).in_omega(j)) s.omega.push_back(on);
    Complex in = b.point + (1.0 - 1e-6) * delta * b.normal;
    if (std::abs(in) <= 1.0 && spec_.classify(in).in_varpi(j)) s.varpi.push_back(in);
    Complex out = b.point + (1.0 + 1e-6) * delta * b.normal;
    if (std::abs(out) <= 1.0 && !spec_.classify(out).in_varpi(j)) s.outside.push_back(out);
  }
  std::size_t circle = std::min<std::size_t>(budget, static_cast<std::size_t>(std::ceil(2.0 * kPi / spacing)));
  for (std::size_t k = 0; k < circle; ++k) {
    Complex z = std::polar(1.0, 2.0 * kPi * static_cast<double>(k) / static_cast<double>(circle));
    // Part of the circle is itself the edge of varpi_j; keep a margin so that
    // rotated copies stay outside.
    if (spec_.distance_to_omega(j, z) >= (1.0 + 1e-6) * delta) s.outside.push_back(z);
  }
  auto fill = [&](std::vector<Complex>& dst, RegionKind kind) {
    auto pts = labyrinth::sample_region(spec_, Region{kind, j}, budget);
    dst.insert(dst.end(), pts.begin(), pts.end());
  };
  fill(s.omega, RegionKind::OmegaJ);
  fill(s.varpi, RegionKind::VarpiJ);
  fill(s.outside, RegionKind::OutsideVarpiJ);
  return samples_.emplace(parity, std::move(s)).first->second;
}

RegionSamples RungeContext::samples(int j) {
  if (j < 1 || j > spec_.ray_count()) throw std::out_of_range("ray index must lie in 1..2N");
  int parity = parity_of(j);
  const RegionSamples& ref = reference_samples(parity);
  Complex by = std::polar(1.0, (j - reference_index(parity)) * kPi / spec_.n());
  return {rotated(ref.omega, by), rotated(ref.varpi, by), rotated(ref.outside, by)};
}

RungeContext::Fitted RungeContext::fit(int parity, const BumpRequest& r) {
  auto key = std::make_tuple(parity, r.inner_target, r.inner_tol, r.outer_target, r.outer_tol);
  auto it = fits_.find(key);
  if (it != fits_.end()) return it->second;

  const RegionSamples& s = reference_samples(parity);
  Fitted best;
  best.margins.inner = best.margins.outer = -std::numeric_limits<double>::infinity();
  double log_in = std::log(r.inner_target), log_out = std::log(r.outer_target);
  double w_in = r.inner_target / r.inner_tol, w_out = r.outer_target / r.outer_tol;
  // Outer fit points: the unit circle, which controls a polynomial on the
  // whole disk, and the near side of the moat around omega_j.
  int j = reference_index(parity);
  std::vector<Complex> moat;
  for (Complex z : s.outside)
    if (std::abs(z) < 1.0 && spec_.distance_to_omega(j, z) < 2.0 * spec_.band_halfwidth()) moat.push_back(z);
  for (std::size_t degree : options_.degrees) {
    if (degree > options_.degree_cap) break;
    std::size_t per_side = 2 * (degree + 1);
    auto inner = strided(s.omega, per_side);
    auto outer = strided(moat, per_side);
    for (std::size_t k = 0; k < 2 * per_side; ++k) {
      Complex z = std::polar(1.0, 2.0 * kPi * static_cast<double>(k) / static_cast<double>(2 * per_side));
      if (!spec_.classify(z).in_varpi(j)) outer.push_back(z);
    }
    Eigen::Index rows = static_cast<Eigen::Index>(inner.size() + outer.size());
    Eigen::MatrixXcd a(rows, static_cast<Eigen::Index>(degree + 1));
    Eigen::VectorXcd b(rows);
    Eigen::Index row = 0;
    auto add = [&](const std::vector<Complex>& pts, double w, double target) {
      for (Complex z : pts) {
        Complex p = w;
        for (std::size_t k = 0; k <= degree; ++k) {
          a(row, static_cast<Eigen::Index>(k)) = p;
          p *= z;
        }
        b(row++) = w * target;
      }
    };
    add(inner, w_in, log_in);
    add(outer, w_out, log_out);
    Eigen::VectorXcd c = a.colPivHouseholderQr().solve(b);
    holo::HoloFunction g(std::vector<Complex>(c.data(), c.data() + c.size()), options_.degree_cap);
    BumpMargins m = measure(g, r, s.omega, s.outside, false);
    if (m.certified()) {
      holo::Truncated t = holo::exp_series(g, options_.degree_cap);
      m.tail_bound = t.tail_bound;
      if (t.tail_bound > holo::kMaxTail) m.inner = std::min(m.inner, -t.tail_bound);
    }
    auto score = [](const BumpMargins& x) { return std::max(x.log_inner_dev, x.log_outer_dev); };
    if (m.certified() || score(m) < score(best.margins)) {
      best.g = g;
      best.margins = m;
    }
    if (m.certified()) break;
  }
  fits_.emplace(key, best);
  return best;
}

Bump RungeContext::build_bump(int j, const BumpRequest& r) {
  if (j < 1 || j > spec_.ray_count()) throw std::out_of_range("ray index must lie in 1..2N");
  if (!(r.inner_tol > 0.0) || !(r.outer_tol > 0.0) || !(r.inner_target > 0.0) || !(r.outer_target > 0.0))
    throw std::invalid_argument("bump targets and tolerances must be positive");
  Bump bump;
  if (degenerate(r)) {
    // h is the constant target; the inequalities hold exactly.
    bump.g = holo::HoloFunction::constant(std::log(r.inner_target));
    bump.h = holo::HoloFunction::constant(r.inner_target);
    bump.margins.inner = r.inner_tol;
    bump.margins.outer = r.outer_tol - std::abs(r.inner_target - r.outer_target);
    return bump;
  }
  int parity = parity_of(j);
  Fitted f = fit(parity, r);
  if (!f.margins.certified())
    throw CertificationError("bump could not be certified up to degree " + std::to_string(f.margins.degree),
                             f.margins);
  double angle = -(j - reference_index(parity)) * kPi / spec_.n();
  bump.g = holo::rotate_argument(f.g, angle);
  RegionSamples s = samples(j);
  bump.margins = measure(bump.g, r, s.omega, s.outside, false);
  bump.margins.tail_bound = f.margins.tail_bound;
  if (!bump.margins.certified()) throw CertificationError("rotated bump lost its certificate", bump.margins);
  bump.h = holo::exp_checked(bump.g, options_.degree_cap);
  return bump;
}

Bump build_bump(const labyrinth::LabyrinthSpec& spec, int j, double eps, double m, const RungeOptions& options) {
  RungeContext ctx(spec, options);
  return ctx.build_bump(j, options.request_override.value_or(standard_request(spec.n(), eps, m)));
}

double choose_rotation(const holo::HoloPair& pair, const labyrinth::LabyrinthSpec& spec, int j,
                       const holo::NormBounds& bounds, const std::vector<Complex>& varpi_samples) {
  if (j < 1 || j > spec.ray_count()) throw std::out_of_range("ray index must lie in 1..2N");
  double threshold = bounds.nu / (2.0 * std::sqrt(static_cast<double>(spec.n())));
  auto min_components = [&](double t) {
    double c = std::cos(t), s = std::sin(t);
    double m1 = std::numeric_limits<double>::infinity(), m2 = m1;
    for (Complex z : varpi_samples) {
      Complex p1 = pair.phi1.eval_unchecked(z), p2 = pair.phi2.eval_unchecked(z);
      m1 = std::min(m1, std::abs(c * p1 + s * p2));
      m2 = std::min(m2, std::abs(-s * p1 + c * p2));
    }
    return std::min(m1, m2);
  };
  if (min_components(0.0) >= threshold) return 0.0;
  // The lower bound sin t |phi_k| - cos t |phi_l| is symmetric in the two
  // components, so one angle serves whichever of them is small.
  double t = std::asin(std::sqrt(2.0 / spec.n()));
  double got = min_components(t);
  if (got >= threshold) return t;
  BumpMargins m;
  m.inner = got - threshold;
  throw CertificationError("no admissible rotation keeps both components away from zero on varpi_j", m);
}

bool RungeCertificate::passed() const {
  return bump.certified() && margin_a > 0.0 && c_empirical > 0.0 && orthogonality < 1e-12 && margin_c > 0.0 &&
         nu_after > 0.0;
}

Modified modify_pair(const holo::HoloPair& pair, RungeContext& context, int j, double eps) {
  const labyrinth::LabyrinthSpec& spec = context.spec();
  const RungeOptions& opt = context.options();
  int n = spec.n();
  holo::NormBounds bounds = holo::norm_bounds(pair, opt.norm_grid);
  RegionSamples samples = context.samples(j);

  RungeCertificate cert;
  cert.j = j;
  cert.t = choose_rotation(pair, spec, j, bounds, samples.varpi);
  cert.u1 = std::cos(cert.t);
  cert.u2 = std::sin(cert.t);
  cert.request = opt.request_override.value_or(standard_request(n, eps, bounds.m));
  Bump bump = context.build_bump(j, cert.request);
  cert.bump = bump.margins;
  cert.h = bump.h;

  double c = cert.u1, s = cert.u2;
  holo::HoloPair hat = holo::rotate_pair(pair, cert.t);
  holo::HoloFunction scaled = holo::multiply_checked(bump.h, hat.phi2, opt.degree_cap);
  Modified out;
  out.pair.phi1 = c * hat.phi1 - s * scaled;
  out.pair.phi2 = s * hat.phi1 + c * scaled;

  // u . (phi - phi~) vanishes identically; check it coefficientwise.
  holo::HoloFunction dot = c * (pair.phi1 - out.pair.phi1) + s * (pair.phi2 - out.pair.phi2);
  for (Complex k : dot.coeffs()) cert.orthogonality = std::max(cert.orthogonality, std::abs(k));

  auto dev = [&](Complex z) {
    return std::hypot(std::abs(out.pair.phi1.eval_unchecked(z) - pair.phi1.eval_unchecked(z)),
                      std::abs(out.pair.phi2.eval_unchecked(z) - pair.phi2.eval_unchecked(z)));
  };
  auto modulus = [&](Complex z) {
    return std::hypot(std::abs(out.pair.phi1.eval_unchecked(z)), std::abs(out.pair.phi2.eval_unchecked(z)));
  };
  for (Complex z : samples.outside) cert.sup_dev_off = std::max(cert.sup_dev_off, dev(z));
  cert.min_on_omega = std::numeric_limits<double>::infinity();
  for (Complex z : samples.omega) cert.min_on_omega = std::min(cert.min_on_omega, modulus(z));
  cert.min_on_varpi = std::numeric_limits<double>::infinity();
  for (Complex z : samples.varpi) cert.min_on_varpi = std::min(cert.min_on_varpi, modulus(z));
  double nn = static_cast<double>(n);
  cert.c_empirical = std::min(cert.min_on_omega / std::pow(nn, 3.5), cert.min_on_varpi * std::sqrt(nn));
  cert.margin_a = eps / (2.0 * nn * nn) - cert.sup_dev_off;
  cert.margin_c = std::abs(cert.u1) - (1.0 - 2.0 / nn);
  cert.nu_after = holo::norm_bounds(out.pair, opt.norm_grid).nu;
  out.certificate = std::move(cert);
  return out;
}

void to_json(nlohmann::json& j, const BumpRequest& r) {
  j = {{"inner_target", r.inner_target},
       {"inner_tol", r.inner_tol},
       {"outer_target", r.outer_target},
       {"outer_tol", r.outer_tol}};
}

void to_json(nlohmann::json& j, const BumpMargins& m) {
  j = {{"inner", m.inner},
       {"outer", m.outer},
       {"log_inner_dev", m.log_inner_dev},
       {"log_outer_dev", m.log_outer_dev},
       {"degree", m.degree},
       {"samples", m.samples},
       {"tail_bound", m.tail_bound},
       {"certified", m.certified()}};
}

void to_json(nlohmann::json& j, const RungeCertificate& c) {
  j = {{"j", c.j},
       {"t", c.t},
       {"u", {c.u1, c.u2}},
       {"sup_dev_off", c.sup_dev_off},
       {"min_on_omega", c.min_on_omega},
       {"min_on_varpi", c.min_on_varpi},
       {"c_empirical", c.c_empirical},
       {"orthogonality", c.orthogonality},
       {"nu_after", c.nu_after},
       {"margin_a", c.margin_a},
       {"margin_c", c.margin_c},
       {"bump", c.bump},
       {"request", c.request},
       {"h", c.h},
       {"passed", c.passed()}};
}

}  // namespace legendrian::runge
