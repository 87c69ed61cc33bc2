#include "legendrian/fronts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "legendrian/binary_io.hpp"
#include "legendrian/errors.hpp"
#include "legendrian/geometry.hpp"

namespace legendrian::fronts {

namespace {

contact::PolarGrid mesh_grid(int resolution) {
  if (resolution < 2) throw std::invalid_argument("mesh resolution must be at least 2");
  return contact::PolarGrid(resolution, 4 * resolution);
}

// Quads between consecutive rings, fans at the centre.
std::vector<std::array<std::int32_t, 3>> polar_triangles(const contact::PolarGrid& g) {
  std::vector<std::array<std::int32_t, 3>> tris;
  auto id = [&](int ir, int ia) { return static_cast<std::int32_t>(g.index(ir, ia % g.angles)); };
  for (int ir = 0; ir + 1 < g.radii; ++ir)
    for (int ia = 0; ia < g.angles; ++ia) {
      if (ir > 0) tris.push_back({id(ir, ia), id(ir, ia + 1), id(ir + 1, ia + 1)});
      tris.push_back({id(ir, ia), id(ir + 1, ia + 1), id(ir + 1, ia)});
    }
  return tris;
}

bool rho_singular(const holo::HoloPair& pair, Complex z, double tol) {
  double w = std::abs(pair.omega(z));
  if (w < 1e-12) return false;
  return std::abs(std::abs(pair.theta(z)) / w - 1.0) < tol;
}

contact::LegendrianCurve resample(const contact::LegendrianCurve& curve, int resolution) {
  return contact::integrate(curve.pair, 0.0, curve.origin_value(), mesh_grid(resolution));
}

void finish_flags(FrontMesh& m) {
  std::size_t count = static_cast<std::size_t>(std::count(m.singular.begin(), m.singular.end(), 1));
  m.stats.singular_fraction = m.singular.empty() ? 0.0 : static_cast<double>(count) / m.singular.size();
}

struct AffineParts {
  holo::HoloFunction primitive;  // int_0^z F dG
};

AffineParts affine_parts(const contact::C3Curve& c3) {
  holo::Truncated fg = holo::multiply(c3.F, holo::derivative(c3.G));
  return {holo::antiderivative(fg.f)};
}

double height_from_primitive(const contact::C3Curve& c3, const holo::HoloFunction& primitive, Complex z) {
  Complex f = c3.F(z), g = c3.G(z);
  return 0.5 * (std::norm(g) - std::norm(f)) + std::real(g * f - 2.0 * primitive(z));
}

const char* ply_target(Target t) {
  switch (t) {
    case Target::H3PoincareBall: return "h3";
    case Target::DeSitter: return "desitter";
    case Target::AffineR3: return "affine";
  }
  return "h3";
}

Target parse_target(const std::string& s) {
  if (s == "h3") return Target::H3PoincareBall;
  if (s == "desitter") return Target::DeSitter;
  if (s == "affine") return Target::AffineR3;
  throw FormatError("unknown mesh target: " + s);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(Target t) { return ply_target(t); }

void FrontMesh::validate() const {
  if (singular.size() != vertices.size()) throw std::invalid_argument("singular flags and vertices differ in count");
  if (!x0.empty() && x0.size() != vertices.size()) throw std::invalid_argument("x0 and vertices differ in count");
  for (const auto& t : triangles)
    for (std::int32_t i : t)
      if (i < 0 || static_cast<std::size_t>(i) >= vertices.size())
        throw std::invalid_argument("triangle references a missing vertex");
}

FrontMesh flat_front_h3(const contact::LegendrianCurve& curve, int resolution, double singular_tol) {
  contact::LegendrianCurve c = resample(curve, resolution);
  FrontMesh m;
  m.target = Target::H3PoincareBall;
  m.triangles = polar_triangles(c.grid);
  m.stats.min_trace = std::numeric_limits<double>::infinity();
  for (int ir = 0; ir < c.grid.radii; ++ir)
    for (int ia = 0; ia < c.grid.angles; ++ia) {
      const Mat2& l = c.at(ir, ia);
      Mat2 h = l * l.adjoint();
      double scale = std::max(1.0, std::norm(matrix_norm(h)));
      double det_err = std::abs(h.det() - 1.0);
      double trace = h.trace().real();
      m.stats.det_error = std::max(m.stats.det_error, det_err);
      m.stats.min_trace = std::min(m.stats.min_trace, trace);
      if (det_err > kModelTol * scale || !(trace > 0.0))
        throw ModelViolationError("H^3 model check failed at a front vertex");
      auto b = geometry::poincare_ball(geometry::from_hermitian(h));
      m.vertices.push_back(b);
      m.stats.max_ball_radius = std::max(m.stats.max_ball_radius, std::hypot(b[0], b[1], b[2]));
      m.singular.push_back(rho_singular(c.pair, c.grid.node(ir, ia), singular_tol) ? 1 : 0);
    }
  finish_flags(m);
  return m;
}

FrontMesh flat_front_desitter(const contact::LegendrianCurve& curve, int resolution, double singular_tol) {
  contact::LegendrianCurve c = resample(curve, resolution);
  const Mat2 e3 = Mat2::diagonal(1.0, -1.0);
  FrontMesh m;
  m.target = Target::DeSitter;
  m.triangles = polar_triangles(c.grid);
  for (int ir = 0; ir < c.grid.radii; ++ir)
    for (int ia = 0; ia < c.grid.angles; ++ia) {
      const Mat2& l = c.at(ir, ia);
      Mat2 h = l * e3 * l.adjoint();
      double scale = std::max(1.0, std::norm(matrix_norm(h)));
      geometry::MinkowskiPoint x = geometry::from_hermitian(h);
      double det_err = std::abs(h.det() + 1.0);
      double mink_err = std::abs(geometry::minkowski_inner(x, x) - 1.0);
      m.stats.det_error = std::max(m.stats.det_error, det_err);
      m.stats.minkowski_error = std::max(m.stats.minkowski_error, mink_err);
      if (det_err > kModelTol * scale || mink_err > kModelTol * scale)
        throw ModelViolationError("de Sitter model check failed at a front vertex");
      m.vertices.push_back({x.x1, x.x2, x.x3});
      m.x0.push_back(x.x0);
      m.singular.push_back(rho_singular(c.pair, c.grid.node(ir, ia), singular_tol) ? 1 : 0);
    }
  finish_flags(m);
  return m;
}

double affine_height(const contact::C3Curve& c3, Complex z) {
  Complex f = c3.F(z), g = c3.G(z);
  return 0.5 * (std::norm(g) - std::norm(f)) + std::real(g * f + 2.0 * c3.H(z));
}

double affine_height_integral_form(const contact::C3Curve& c3, Complex z) {
  return height_from_primitive(c3, affine_parts(c3).primitive, z);
}

FrontMesh improper_affine_front(const contact::C3Curve& c3, int resolution, double singular_tol,
                                double residual_tol) {
  contact::PolarGrid grid = mesh_grid(resolution);
  double residual = contact::contact_pullback_c3(c3, grid);
  if (!(residual < residual_tol)) throw std::invalid_argument("C^3 curve is not Legendrian: dH + F dG != 0");
  AffineParts parts = affine_parts(c3);
  double h0 = 2.0 * std::real(c3.H(0.0));
  holo::HoloFunction df = holo::derivative(c3.F), dg = holo::derivative(c3.G);
  FrontMesh m;
  m.target = Target::AffineR3;
  m.triangles = polar_triangles(grid);
  for (int ir = 0; ir < grid.radii; ++ir)
    for (int ia = 0; ia < grid.angles; ++ia) {
      Complex z = grid.node(ir, ia);
      Complex w = c3.G(z) + std::conj(c3.F(z));
      double height = affine_height(c3, z);
      double other = height_from_primitive(c3, parts.primitive, z) + h0;
      m.stats.form_agreement = std::max(m.stats.form_agreement, std::abs(height - other));
      m.vertices.push_back({w.real(), w.imag(), height});
      double a = std::abs(df(z));
      bool flag = a >= 1e-12 && std::abs(std::abs(dg(z)) / a - 1.0) < singular_tol;
      m.singular.push_back(flag ? 1 : 0);
    }
  finish_flags(m);
  return m;
}

double affine_metric_density(const contact::C3Curve& c3, Complex z) {
  return std::hypot(std::abs(holo::derivative(c3.F)(z)), std::abs(holo::derivative(c3.G)(z)));
}

double c3_metric_density(const contact::C3Curve& c3, Complex z) {
  double df = std::abs(holo::derivative(c3.F)(z)), dg = std::abs(holo::derivative(c3.G)(z));
  return std::sqrt(df * df + (1.0 + std::norm(c3.F(z))) * dg * dg);
}

SingularSet singular_set(const holo::HoloPair& pair, int resolution, double tol) {
  if (resolution < 2) throw std::invalid_argument("singular set resolution must be at least 2");
  SingularSet out;
  out.resolution = resolution;
  int n = resolution + 1;
  double h = 2.0 / resolution;
  auto node = [&](int i, int k) { return Complex(-1.0 + i * h, -1.0 + k * h); };
  out.level.assign(static_cast<std::size_t>(n) * n, std::numeric_limits<double>::quiet_NaN());
  std::size_t inside = 0, flagged = 0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      Complex z = node(i, k);
      if (std::abs(z) > 1.0) continue;
      double w = std::abs(pair.omega(z)), t = std::abs(pair.theta(z));
      out.level[static_cast<std::size_t>(k) * n + i] = (t - w) / (t + w);
      ++inside;
      if (w >= 1e-12 && std::abs(t / w - 1.0) < tol) ++flagged;
    }
  out.fraction = inside ? static_cast<double>(flagged) / inside : 0.0;

  auto lv = [&](int i, int k) { return out.level[static_cast<std::size_t>(k) * n + i]; };
  auto cross = [&](Complex a, double va, Complex b, double vb) { return a + (va / (va - vb)) * (b - a); };
  for (int k = 0; k + 1 < n; ++k)
    for (int i = 0; i + 1 < n; ++i) {
      // corners counter-clockwise from the lower left
      Complex p[4] = {node(i, k), node(i + 1, k), node(i + 1, k + 1), node(i, k + 1)};
      double v[4] = {lv(i, k), lv(i + 1, k), lv(i + 1, k + 1), lv(i, k + 1)};
      if (std::any_of(v, v + 4, [](double x) { return std::isnan(x); })) continue;
      std::vector<Complex> hits;
      for (int e = 0; e < 4; ++e) {
        double a = v[e], b = v[(e + 1) % 4];
        if ((a < 0.0) != (b < 0.0)) hits.push_back(cross(p[e], a, p[(e + 1) % 4], b));
      }
      if (hits.size() == 2) {
        out.contour.push_back({hits[0], hits[1]});
      } else if (hits.size() == 4) {
        // saddle: pair the crossings according to the sign at the centre
        double centre = (v[0] + v[1] + v[2] + v[3]) / 4.0;
        if ((centre < 0.0) == (v[0] < 0.0)) {
          out.contour.push_back({hits[0], hits[1]});
          out.contour.push_back({hits[2], hits[3]});
        } else {
          out.contour.push_back({hits[3], hits[0]});
          out.contour.push_back({hits[1], hits[2]});
        }
      }
    }
  return out;
}

void write_obj(const FrontMesh& mesh, std::ostream& out) {
  mesh.validate();
  out << "# target " << ply_target(mesh.target) << "\n";
  for (const auto& v : mesh.vertices)
    out << "v " << format_double(v[0]) << ' ' << format_double(v[1]) << ' ' << format_double(v[2]) << "\n";
  for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << "\n";
}

void write_ply(const FrontMesh& mesh, std::ostream& out) {
  mesh.validate();
  bool with_x0 = !mesh.x0.empty();
  out << "ply\nformat binary_little_endian 1.0\n"
      << "comment target " << ply_target(mesh.target) << "\n"
      << "element vertex " << mesh.vertices.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n";
  if (with_x0) out << "property double x0\n";
  out << "property uchar singular\n"
      << "element face " << mesh.triangles.size() << "\n"
      << "property list uchar int vertex_indices\nend_header\n";
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    for (double c : mesh.vertices[i]) io::put_le(out, c);
    if (with_x0) io::put_le(out, mesh.x0[i]);
    out.put(static_cast<char>(mesh.singular[i]));
  }
  for (const auto& t : mesh.triangles) {
    out.put(3);
    for (std::int32_t k : t) io::put_le_bits(out, static_cast<std::uint32_t>(k));
  }
}

FrontMesh read_ply(std::istream& in) {
  FrontMesh m;
  std::string line;
  std::size_t nv = 0, nf = 0;
  bool with_x0 = false;
  if (!std::getline(in, line) || line != "ply") throw FormatError("not a PLY file");
  while (std::getline(in, line) && line != "end_header") {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt != "binary_little_endian") throw FormatError("only binary little-endian PLY is supported");
    } else if (word == "comment") {
      std::string key, value;
      ls >> key >> value;
      if (key == "target") m.target = parse_target(value);
    } else if (word == "element") {
      std::string name;
      std::size_t count = 0;
      ls >> name >> count;
      (name == "vertex" ? nv : nf) = count;
    } else if (word == "property") {
      std::string type, name;
      ls >> type >> name;
      if (name == "x0") with_x0 = true;
    }
  }
  if (line != "end_header") throw FormatError("PLY header not terminated");
  m.vertices.resize(nv);
  m.singular.resize(nv);
  if (with_x0) m.x0.resize(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    for (double& c : m.vertices[i]) c = io::get_le(in);
    if (with_x0) m.x0[i] = io::get_le(in);
    int flag = in.get();
    if (flag == std::char_traits<char>::eof()) throw FormatError("PLY vertex data truncated");
    m.singular[i] = static_cast<std::uint8_t>(flag);
  }
  m.triangles.resize(nf);
  for (auto& t : m.triangles) {
    if (in.get() != 3) throw FormatError("PLY face is not a triangle");
    for (std::int32_t& k : t) k = static_cast<std::int32_t>(io::get_le_bits<std::uint32_t>(in));
  }
  m.validate();
  return m;
}

void export_mesh(const FrontMesh& mesh, MeshFormat format, const std::filesystem::path& path,
                 const nlohmann::json& extra) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    if (format == MeshFormat::Obj)
      write_obj(mesh, out);
    else
      write_ply(mesh, out);
    if (!out) throw std::runtime_error("write failed: " + path.string());
  }
  nlohmann::json side = {{"target", ply_target(mesh.target)},
                         {"format", format == MeshFormat::Obj ? "obj" : "ply"},
                         {"vertices", mesh.vertices.size()},
                         {"triangles", mesh.triangles.size()},
                         {"stats", mesh.stats}};
  // OBJ has no room for the dropped de Sitter coordinate
  if (format == MeshFormat::Obj && !mesh.x0.empty()) side["x0"] = mesh.x0;
  if (!extra.is_null()) side["run"] = extra;
  std::filesystem::path sidecar = path;
  sidecar += ".json";
  std::ofstream s(sidecar);
  if (!s) throw std::runtime_error("cannot open " + sidecar.string());
  s << side.dump(2) << "\n";
}

void to_json(nlohmann::json& j, const FrontStats& s) {
  j = {{"det_error", s.det_error},
       {"min_trace", s.min_trace},
       {"minkowski_error", s.minkowski_error},
       {"max_ball_radius", s.max_ball_radius},
       {"form_agreement", s.form_agreement},
       {"singular_fraction", s.singular_fraction}};
}

}  // namespace legendrian::fronts
