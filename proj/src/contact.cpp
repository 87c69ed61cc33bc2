#include "legendrian/contact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "legendrian/binary_io.hpp"
#include "legendrian/errors.hpp"

namespace legendrian::contact {

namespace {

double diagonal_part(const Mat2& p) { return std::sqrt(std::norm(p.m11) + std::norm(p.m22)); }

using io::get_le;
using io::put_le;

}  // namespace

PolarGrid::PolarGrid(int r, int a) : radii(r), angles(a) {
  if (r < 2 || a < 1) throw std::invalid_argument("polar grid needs at least 2 radii and 1 angle");
}

ResidualReport legendrian_residual(std::span<const SL2Value> values, std::span<const SL2Value> derivatives) {
  if (values.size() != derivatives.size()) throw std::invalid_argument("values and derivatives differ in length");
  ResidualReport r;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Mat2& x = values[i];
    const Mat2& dx = derivatives[i];
    r.anti_diagonal = std::max(r.anti_diagonal, diagonal_part(x.inverse() * dx));
    r.contact_form = std::max(r.contact_form, std::abs(x.m11 * dx.m22 - x.m21 * dx.m12));
  }
  return r;
}

ResidualReport legendrian_residual(const LegendrianCurve& curve) {
  const PolarGrid& g = curve.grid;
  std::vector<SL2Value> derivs(g.size());
  for (int ir = 0; ir < g.radii; ++ir)
    for (int ia = 0; ia < g.angles; ++ia) derivs[g.index(ir, ia)] = curve.derivative_at(ir, ia);
  ResidualReport r = legendrian_residual(curve.values, derivs);

  // Central differences of short integrations around each node.
  const double h = 1e-5;
  for (int ir = 0; ir < g.radii; ++ir) {
    for (int ia = 0; ia < g.angles; ++ia) {
      if (ir == 0 && ia > 0) break;
      Complex z = g.node(ir, ia);
      Complex dir = ir == 0 ? Complex(1.0) : z / std::abs(z);
      const Mat2& x = curve.at(ir, ia);
      Mat2 fwd = integrate_segment(curve.pair, z, z - h * dir, x);
      Mat2 back = integrate_segment(curve.pair, z, z - 2.0 * h * dir, x);
      // one-sided second order stencil keeps every point inside the disk
      Mat2 dx = (x * 3.0 - fwd * 4.0 + back) * (1.0 / (2.0 * h)) * (1.0 / dir);
      r.finite_difference = std::max(r.finite_difference, diagonal_part(x.inverse() * dx));
    }
  }
  return r;
}

double det_drift(const LegendrianCurve& curve) {
  double d = 0.0;
  for (const Mat2& m : curve.values) d = std::max(d, std::abs(m.det() - 1.0));
  return d;
}

double contact_pullback_c3(const C3Curve& c, const PolarGrid& grid) {
  holo::HoloFunction dg = holo::derivative(c.G);
  holo::HoloFunction dh = holo::derivative(c.H);
  double sup = 0.0;
  for (int ir = 0; ir < grid.radii; ++ir)
    for (int ia = 0; ia < grid.angles; ++ia) {
      Complex z = grid.node(ir, ia);
      sup = std::max(sup, std::abs(dh.eval_unchecked(z) + c.F.eval_unchecked(z) * dg.eval_unchecked(z)));
    }
  return sup;
}

SL2Value darboux_map(const C3Point& p) {
  if (std::abs(p.z.real()) > kDarbouxGuard) throw std::overflow_error("darboux_map: |Re z| exceeds 300");
  Complex em = std::exp(-p.z);
  Complex ep = std::exp(p.z);
  return {em, p.x * em, p.y * ep, ep * (1.0 + p.x * p.y)};
}

C3Point darboux_inverse(const SL2Value& a) {
  if (a.m11 == Complex(0.0)) throw BranchError("darboux_inverse: m11 vanishes", 0.0);
  if (a.m11.imag() == 0.0 && a.m11.real() < 0.0)
    throw BranchError("darboux_inverse: m11 on the negative real axis", a.m11.real());
  C3Point p;
  p.z = -std::log(a.m11);
  p.x = a.m12 / a.m11;
  p.y = a.m21 * a.m11;
  Complex expected = std::exp(p.z) * (1.0 + p.x * p.y);
  if (std::abs(a.m22 - expected) >= 1e-9) throw ConsistencyError("darboux_inverse: matrix not in the image");
  return p;
}

SL2Value lift_from_c3(const C3Point& p) { return darboux_map(p).transpose(); }

C3Fit curve_c3_from_sl2(const LegendrianCurve& curve, std::size_t degree_cap) {
  const PolarGrid& g = curve.grid;
  std::vector<C3Point> pts(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) pts[i] = darboux_inverse(curve.values[i].transpose());

  std::size_t degree = std::min<std::size_t>(degree_cap, static_cast<std::size_t>(std::max(1, g.angles / 2 - 1)));
  int edge = g.radii - 1;
  auto fit = [&](auto member) {
    std::vector<Complex> c(degree + 1);
    for (std::size_t m = 0; m <= degree; ++m) {
      Complex s = 0.0;
      for (int ia = 0; ia < g.angles; ++ia)
        s += pts[g.index(edge, ia)].*member * std::polar(1.0, -static_cast<double>(m) * g.angle(ia));
      c[m] = s / static_cast<double>(g.angles);
    }
    return holo::HoloFunction(std::move(c), degree_cap).trimmed(1e-300);
  };
  C3Fit out;
  out.curve.G = fit(&C3Point::x);
  out.curve.F = fit(&C3Point::y);
  out.curve.H = fit(&C3Point::z);
  for (int ir = 0; ir < g.radii; ++ir)
    for (int ia = 0; ia < g.angles; ++ia) {
      Complex z = g.node(ir, ia);
      const C3Point& p = pts[g.index(ir, ia)];
      C3Point q = out.curve.at(z);
      out.fit_error = std::max({out.fit_error, std::abs(q.x - p.x), std::abs(q.y - p.y), std::abs(q.z - p.z)});
    }
  return out;
}

double induced_metric_density(const holo::HoloPair& pair, Complex z) { return pair.modulus(z); }

void write_curve(const LegendrianCurve& curve, const std::filesystem::path& header,
                 const std::filesystem::path& samples) {
  nlohmann::json h;
  h["pair"] = curve.pair;
  h["base_point"] = {curve.base_point.real(), curve.base_point.imag()};
  h["base_value"] = curve.base_value;
  h["grid"] = {{"radii", curve.grid.radii}, {"angles", curve.grid.angles}};
  h["integration_error"] = curve.integration_error;
  h["samples"] = {{"file", samples.filename().string()},
                  {"encoding", "float64 little-endian"},
                  {"layout", "row-major (radius, angle); re/im of m11, m12, m21, m22"},
                  {"nodes", curve.values.size()}};
  std::ofstream hj(header);
  if (!hj) throw std::runtime_error("cannot open " + header.string());
  hj << h.dump(2) << '\n';
  std::ofstream bin(samples, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + samples.string());
  for (const Mat2& m : curve.values)
    for (Complex c : {m.m11, m.m12, m.m21, m.m22}) {
      put_le(bin, c.real());
      put_le(bin, c.imag());
    }
}

LegendrianCurve read_curve(const std::filesystem::path& header, const std::filesystem::path& samples) {
  std::ifstream hj(header);
  if (!hj) throw std::runtime_error("cannot open " + header.string());
  nlohmann::json h = nlohmann::json::parse(hj);
  LegendrianCurve c;
  c.pair = h.at("pair").get<holo::HoloPair>();
  c.base_point = {h.at("base_point").at(0).get<double>(), h.at("base_point").at(1).get<double>()};
  c.base_value = h.at("base_value").get<Mat2>();
  c.grid = PolarGrid(h.at("grid").at("radii").get<int>(), h.at("grid").at("angles").get<int>());
  c.integration_error = h.at("integration_error").get<double>();
  std::ifstream bin(samples, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + samples.string());
  c.values.resize(c.grid.size());
  for (Mat2& m : c.values) {
    Complex* e[4] = {&m.m11, &m.m12, &m.m21, &m.m22};
    for (Complex* p : e) {
      double re = get_le(bin);
      *p = {re, get_le(bin)};
    }
  }
  return c;
}

}  // namespace legendrian::contact

namespace legendrian {

void to_json(nlohmann::json& j, const Mat2& m) {
  j = nlohmann::json::array();
  for (Complex c : {m.m11, m.m12, m.m21, m.m22}) j.push_back({c.real(), c.imag()});
}

void from_json(const nlohmann::json& j, Mat2& m) {
  if (!j.is_array() || j.size() != 4) throw FormatError("matrix must be four [re, im] pairs");
  auto c = [&](int i) { return Complex(j.at(i).at(0).get<double>(), j.at(i).at(1).get<double>()); };
  m = {c(0), c(1), c(2), c(3)};
}

}  // namespace legendrian
