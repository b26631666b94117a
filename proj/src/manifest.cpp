#include "cdef/manifest.hpp"

#include <fstream>
#include <sstream>

#include "cdef/builtins.hpp"
#include "cdef/errors.hpp"
#include "cdef/expression.hpp"
#include "cdef/lightcone.hpp"
#include "manifest_fields.hpp"

namespace cdef {

namespace {

std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

Mat matrix_field(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw ManifestError(path + ": expected a non-empty array of rows");
  const auto rows = static_cast<int>(j.size());
  const auto cols = static_cast<int>(j.front().size());
  Mat M(rows, cols);
  for (int a = 0; a < rows; ++a) {
    const std::string rp = path + "/" + std::to_string(a);
    if (!j[a].is_array() || static_cast<int>(j[a].size()) != cols)
      throw ManifestError(rp + ": expected a row of " + std::to_string(cols) + " numbers");
    for (int i = 0; i < cols; ++i) {
      if (!j[a][i].is_number()) throw ManifestError(rp + "/" + std::to_string(i) + ": expected a number");
      M(a, i) = j[a][i].get<double>();
    }
  }
  return M;
}

ImmersionPtr inner(const Json& spec, const std::string& path) {
  return immersion_from_json(fields::require(spec, "of", path), path + "/of");
}

ImmersionPtr builtin(const Json& spec, const std::string& path) {
  using namespace fields;
  const std::string name = get_string(spec, "builtin", path);
  // Fields are read in document order so the first diagnostic is the first bad field.
  if (name == "plane") {
    const int n = get_int(spec, "n", path, 1);
    return plane(n, get_int(spec, "m", path, n));
  }
  if (name == "sphere" || name == "cylinder") {
    const int n = get_int(spec, "n", path, 1);
    const double r = optional_double(spec, "r", path, 1.0);
    return name == "sphere" ? sphere(n, r) : cylinder(n, r);
  }
  if (name == "cone-over-sphere") return cone_over_sphere(get_int(spec, "n", path, 2));
  if (name == "torus") {
    const double R = get_double(spec, "R", path);
    return torus(R, get_double(spec, "r", path));
  }
  if (name == "flat-torus") {
    const double a = get_double(spec, "a", path);
    return flat_torus(a, get_double(spec, "b", path));
  }
  if (name == "quadric-graph") return quadric_graph(matrix_field(require(spec, "K", path), path + "/K"));
  if (name == "inversion") {
    const ImmersionPtr f = inner(spec, path);
    return inversion(f, get_vector(spec, "center", path, f->ambient().dim()));
  }
  if (name == "rigid-motion") {
    const ImmersionPtr f = inner(spec, path);
    const int m = f->ambient().dim();
    const Mat R = spec.contains("rotation") ? matrix_field(spec["rotation"], path + "/rotation") : Mat(Mat::Identity(m, m));
    if (R.rows() != m || R.cols() != m)
      throw ManifestError(path + "/rotation: expected " + std::to_string(m) + " x " + std::to_string(m));
    if ((R.transpose() * R - Mat::Identity(m, m)).norm() > 1e-12)
      throw ManifestError(path + "/rotation: not orthogonal");
    const Vec b = spec.contains("translation") ? get_vector(spec, "translation", path, m) : Vec(Vec::Zero(m));
    return rigid_motion(f, R, b);
  }
  if (name == "psi-lift") return psi_lift(inner(spec, path));
  if (name == "isometric-representative") {
    const ImmersionPtr f = inner(spec, path);
    const ImmersionPtr base = spec.contains("base") ? immersion_from_json(spec["base"], path + "/base") : nullptr;
    return isometric_representative(f, base);
  }
  if (name == "cone-projection") return cone_projection(inner(spec, path));
  if (name == "finite-difference")
    return std::make_shared<FiniteDifferenceImmersion>(inner(spec, path), optional_double(spec, "step", path, 1e-3));
  if (name == "lorentz-slice") {
    const int n = get_int(spec, "n", path, 1);
    const int N = get_int(spec, "N", path, n);
    return lorentz_slice_family(n, N, get_vector(spec, "v", path, N + 2));
  }
  if (name == "generated-pair") {
    const GeneratedPair gp = generated_pair(optional_double(spec, "radius", path, 1.0));
    const std::string part = get_string(spec, "part", path);
    if (part == "F_prime") return gp.F_prime;
    if (part == "F_hat") return gp.F_hat;
    if (part == "f") return gp.f;
    if (part == "f_hat") return gp.f_hat;
    throw ManifestError(path + "/part: expected one of F_prime, F_hat, f, f_hat, got '" + part + "'");
  }
  throw ManifestError(path + "/builtin: unknown builtin '" + name + "' (see `cdef gallery list`)");
}

ImmersionPtr expression(const Json& spec, const std::string& path) {
  using namespace fields;
  const auto vars = get_strings(spec, "variables", path);
  const auto comps = get_strings(spec, "expression", path);
  std::map<std::string, double> constants;
  if (spec.contains("constants")) {
    const Json& c = spec["constants"];
    if (!c.is_object()) throw ManifestError(path + "/constants: expected an object");
    for (auto it = c.begin(); it != c.end(); ++it) {
      if (!it.value().is_number()) throw ManifestError(path + "/constants/" + it.key() + ": expected a number");
      constants[it.key()] = it.value().get<double>();
    }
  }
  const ScalarProduct amb = spec.contains("ambient") ? ambient_from_json(spec["ambient"], path + "/ambient")
                                                     : ScalarProduct::euclidean(static_cast<int>(comps.size()));
  if (amb.dim() != static_cast<int>(comps.size()))
    throw ManifestError(path + "/ambient: dimension " + std::to_string(amb.dim()) + " does not match " +
                        std::to_string(comps.size()) + " components");
  try {
    return expression_immersion(optional_string(spec, "name", path, "expression"), vars, comps, amb, constants);
  } catch (const ExpressionError& e) {
    throw ManifestError(path + "/expression: " + e.what());
  }
}

ImmersionPtr table(const Json& spec, const std::string& path) {
  using namespace fields;
  const Json& t = require(spec, "table", path);
  const std::string tp = path + "/table";
  ImmersionJet j;
  j.grid = grid_from_json(require(t, "grid", tp), tp + "/grid");
  j.source = JetSource::sampled;
  const Json& pts = require(t, "points", tp);
  if (!pts.is_array() || pts.size() != j.grid.size())
    throw ManifestError(tp + "/points: expected " + std::to_string(j.grid.size()) + " entries, one per grid point");
  const int n = j.grid.dim();
  int m = -1;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const std::string pp = tp + "/points/" + std::to_string(k);
    PointJet pj;
    pj.x = get_vector(pts[k], "x", pp, m);
    m = static_cast<int>(pj.x.size());
    pj.d1 = matrix_field(require(pts[k], "d1", pp), pp + "/d1");
    if (pj.d1.rows() != m || pj.d1.cols() != n)
      throw ManifestError(pp + "/d1: expected " + std::to_string(m) + " x " + std::to_string(n));
    const Json& d2 = require(pts[k], "d2", pp);
    if (!d2.is_array() || d2.size() != static_cast<std::size_t>(n * n))
      throw ManifestError(pp + "/d2: expected " + std::to_string(n * n) + " vectors (row-major i, j)");
    for (int a = 0; a < n * n; ++a) pj.d2.push_back(vector_value(d2[a], pp + "/d2/" + std::to_string(a), m));
    j.points.push_back(std::move(pj));
  }
  j.ambient = t.contains("ambient") ? ambient_from_json(t["ambient"], tp + "/ambient") : ScalarProduct::euclidean(m);
  if (j.ambient.dim() != m) throw ManifestError(tp + "/ambient: dimension does not match the positions");
  return std::make_shared<SampledImmersion>(std::move(j));
}

} // namespace

namespace fields {

const Json& require(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ManifestError((path.empty() ? "/" : path) + ": expected an object");
  if (!j.contains(key)) throw ManifestError(path + "/" + key + ": missing required field");
  return j.at(key);
}

std::string get_string(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = require(j, key, path);
  if (!v.is_string()) throw ManifestError(path + "/" + key + ": expected a string");
  return v.get<std::string>();
}

std::string optional_string(const Json& j, const std::string& key, const std::string& path, const std::string& def) {
  return j.contains(key) ? get_string(j, key, path) : def;
}

double get_double(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = require(j, key, path);
  if (!v.is_number()) throw ManifestError(path + "/" + key + ": expected a number");
  return v.get<double>();
}

double optional_double(const Json& j, const std::string& key, const std::string& path, double def) {
  return j.contains(key) ? get_double(j, key, path) : def;
}

int get_int(const Json& j, const std::string& key, const std::string& path, int min) {
  const Json& v = require(j, key, path);
  if (!v.is_number_integer()) throw ManifestError(path + "/" + key + ": expected an integer");
  const int x = v.get<int>();
  if (x < min) throw ManifestError(path + "/" + key + ": must be >= " + std::to_string(min));
  return x;
}

int optional_int(const Json& j, const std::string& key, const std::string& path, int def, int min) {
  return j.contains(key) ? get_int(j, key, path, min) : def;
}

bool optional_bool(const Json& j, const std::string& key, const std::string& path, bool def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_boolean()) throw ManifestError(path + "/" + key + ": expected true or false");
  return j[key].get<bool>();
}

Vec vector_value(const Json& v, const std::string& path, int expected) {
  if (!v.is_array()) throw ManifestError(path + ": expected an array of numbers");
  if (expected >= 0 && static_cast<int>(v.size()) != expected)
    throw ManifestError(path + ": expected " + std::to_string(expected) + " entries, got " + std::to_string(v.size()));
  Vec x(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ManifestError(path + "/" + std::to_string(i) + ": expected a number");
    x(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  return x;
}

Vec get_vector(const Json& j, const std::string& key, const std::string& path, int expected) {
  return vector_value(require(j, key, path), path + "/" + key, expected);
}

std::vector<std::string> get_strings(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = require(j, key, path);
  if (!v.is_array() || v.empty()) throw ManifestError(path + "/" + key + ": expected a non-empty array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) throw ManifestError(path + "/" + key + "/" + std::to_string(i) + ": expected a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

} // namespace fields

Json parse_manifest(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string msg = e.what();
    if (const auto p = msg.find("syntax error"); p != std::string::npos) msg = msg.substr(p);
    throw ManifestError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
  }
}

Json load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path);
}

ScalarProduct ambient_from_json(const Json& spec, const std::string& path) {
  using namespace fields;
  if (spec.is_string()) {
    throw ManifestError(path + ": expected an object such as {\"euclidean\": m}, {\"light_cone\": N} or {\"signs\": [...]}");
  }
  if (spec.contains("euclidean")) return ScalarProduct::euclidean(get_int(spec, "euclidean", path, 1));
  if (spec.contains("light_cone")) return ScalarProduct::light_cone(get_int(spec, "light_cone", path, 1));
  if (spec.contains("signs")) {
    const Vec s = get_vector(spec, "signs", path, -1);
    std::vector<int> signs;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) != 1.0 && s(i) != -1.0)
        throw ManifestError(path + "/signs/" + std::to_string(i) + ": entries must be +1 or -1");
      signs.push_back(static_cast<int>(s(i)));
    }
    return ScalarProduct::diagonal(signs);
  }
  throw ManifestError(path + ": expected one of euclidean, light_cone, signs");
}

Grid grid_from_json(const Json& spec, const std::string& path) {
  using namespace fields;
  const Json& c = require(spec, "counts", path);
  if (!c.is_array() || c.empty()) throw ManifestError(path + "/counts: expected a non-empty array of integers");
  std::vector<int> counts;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!c[i].is_number_integer() || c[i].get<int>() < 1)
      throw ManifestError(path + "/counts/" + std::to_string(i) + ": expected a positive integer");
    counts.push_back(c[i].get<int>());
  }
  const int n = static_cast<int>(counts.size());
  Vec lo, hi;
  if (spec.contains("center")) {
    const Vec ctr = get_vector(spec, "center", path, n);
    const double r = get_double(spec, "radius", path);
    if (!(r >= 0)) throw ManifestError(path + "/radius: must be >= 0");
    lo = ctr.array() - r;
    hi = ctr.array() + r;
  } else {
    lo = get_vector(spec, "lo", path, n);
    hi = get_vector(spec, "hi", path, n);
  }
  for (int i = 0; i < n; ++i)
    if (hi(i) < lo(i)) throw ManifestError(path + "/hi/" + std::to_string(i) + ": below lo");
  return Grid(lo, hi, counts);
}

ImmersionPtr immersion_from_json(const Json& spec, const std::string& path) {
  if (!spec.is_object()) throw ManifestError((path.empty() ? "/" : path) + ": expected an immersion object");
  int kinds = int(spec.contains("builtin")) + int(spec.contains("expression")) + int(spec.contains("table"));
  if (kinds != 1) throw ManifestError(path + ": expected exactly one of builtin, expression, table");
  ImmersionPtr f;
  if (spec.contains("builtin")) f = builtin(spec, path);
  else if (spec.contains("expression")) f = expression(spec, path);
  else f = table(spec, path);
  return f;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const char* version_string() {
#ifdef CDEF_VERSION
  return "cdef " CDEF_VERSION;
#else
  return "cdef 0.0.0";
#endif
}

std::string render_report(const Json& report) { return report.dump(2) + "\n"; }

} // namespace cdef
