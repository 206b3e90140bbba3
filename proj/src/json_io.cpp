#include "levyot/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace levyot {

using nlohmann::json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << content;
}

namespace {

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("JSON parse error: ") + e.what());
  }
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ValidationError(where + ": expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ValidationError(where + ": non-finite value");
  return x;
}

Vec get_vector(const json& j, const std::string& where, int expect_dim = -1) {
  if (!j.is_array()) throw ValidationError(where + ": expected an array");
  if (expect_dim >= 0 && static_cast<int>(j.size()) != expect_dim)
    throw ValidationError(where + ": wrong length");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = get_number(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

Mat get_matrix(const json& j, const std::string& where, int d) {
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    throw ValidationError(where + ": expected a " + std::to_string(d) + "-row matrix");
  Mat m(d, d);
  for (int r = 0; r < d; ++r)
    m.row(r) = get_vector(j[r], where + "[" + std::to_string(r) + "]", d).transpose();
  return m;
}

double get_weight(const json& j, const std::string& where) {
  const double w = get_number(j, where);
  if (w <= 0.0) throw ValidationError(where + ": weight must be > 0");
  return w;
}

int get_dim(const json& j) {
  if (!j.contains("d") || !j["d"].is_number_integer())
    throw ValidationError("d: expected an integer dimension");
  const int d = j["d"].get<int>();
  if (d < 1) throw ValidationError("d: must be >= 1");
  return d;
}

DiscreteLevyMeasure measure_from(const json& arr, int d, const std::string& where) {
  if (!arr.is_array()) throw ValidationError(where + ": expected an array");
  std::vector<Atom> atoms;
  atoms.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    const json& e = arr[i];
    if (!e.is_object() || !e.contains("x") || !e.contains("w"))
      throw ValidationError(at + ": expected {x, w}");
    atoms.push_back({get_vector(e["x"], at + ".x", d), get_weight(e["w"], at + ".w")});
  }
  return DiscreteLevyMeasure(d, std::move(atoms));
}

std::vector<CouplingAtom> coupling_atoms_from(const json& arr, int d,
                                              const std::string& where) {
  if (!arr.is_array()) throw ValidationError(where + ": expected an array");
  std::vector<CouplingAtom> atoms;
  atoms.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    const json& e = arr[i];
    if (!e.is_object() || !e.contains("x") || !e.contains("y") || !e.contains("w"))
      throw ValidationError(at + ": expected {x, y, w}");
    atoms.push_back({get_vector(e["x"], at + ".x", d), get_vector(e["y"], at + ".y", d),
                     get_weight(e["w"], at + ".w")});
  }
  return atoms;
}

void append_vector(std::string& out, const Vec& v) {
  out += '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  out += ']';
}

void append_matrix(std::string& out, const Mat& m) {
  out += '[';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) out += ',';
    append_vector(out, m.row(r));
  }
  out += ']';
}

std::string vector_key(const Vec& v) {
  std::string s;
  append_vector(s, v);
  return s;
}

}  // namespace

InputKind detect_kind(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (...) {
    return InputKind::Unknown;
  }
  if (!j.is_object()) return InputKind::Unknown;
  if (j.contains("coupling")) return InputKind::CoupledTriplet;
  if (j.contains("drift") || j.contains("diffusion") || j.contains("jumps"))
    return InputKind::Triplet;
  if (j.contains("atoms")) return InputKind::Measure;
  return InputKind::Unknown;
}

LevyTriplet parse_triplet(const std::string& text) {
  const json j = parse_text(text);
  if (!j.is_object()) throw ValidationError("triplet: expected a JSON object");
  const int d = get_dim(j);
  if (!j.contains("drift") || !j.contains("diffusion") || !j.contains("jumps"))
    throw ValidationError("triplet: expected drift, diffusion and jumps fields");
  return make_triplet(get_vector(j["drift"], "drift", d),
                      get_matrix(j["diffusion"], "diffusion", d),
                      measure_from(j["jumps"], d, "jumps"));
}

DiscreteLevyMeasure parse_measure(const std::string& text) {
  const json j = parse_text(text);
  if (!j.is_object() || !j.contains("atoms"))
    throw ValidationError("measure: expected an object with an atoms field");
  return measure_from(j["atoms"], get_dim(j), "atoms");
}

LevyCoupling parse_coupling(const std::string& text) {
  const json j = parse_text(text);
  if (!j.is_object() || !j.contains("atoms"))
    throw ValidationError("coupling: expected an object with an atoms field");
  const int d = get_dim(j);
  return LevyCoupling(d, coupling_atoms_from(j["atoms"], d, "atoms"));
}

CoupledTriplet parse_coupled_triplet(const std::string& text) {
  const json j = parse_text(text);
  if (!j.is_object()) throw ValidationError("coupled triplet: expected a JSON object");
  const int d2 = get_dim(j);
  if (d2 % 2 != 0) throw ValidationError("coupled triplet: d must be even (2d)");
  if (!j.contains("drift") || !j.contains("diffusion") || !j.contains("coupling"))
    throw ValidationError("coupled triplet: expected drift, diffusion and coupling fields");
  CoupledTriplet out;
  out.drift = get_vector(j["drift"], "drift", d2);
  out.diffusion = get_matrix(j["diffusion"], "diffusion", d2);
  out.jumps = LevyCoupling(d2 / 2, coupling_atoms_from(j["coupling"], d2 / 2, "coupling"));
  validate_coupled_triplet(out);
  return out;
}

LevyTriplet load_triplet(const std::string& path) { return parse_triplet(read_file(path)); }
DiscreteLevyMeasure load_measure(const std::string& path) {
  return parse_measure(read_file(path));
}
CoupledTriplet load_coupled_triplet(const std::string& path) {
  return parse_coupled_triplet(read_file(path));
}
InputKind detect_file_kind(const std::string& path) { return detect_kind(read_file(path)); }

std::string to_json(const DiscreteLevyMeasure& m) {
  std::string out = "{\"d\":" + std::to_string(m.dim()) + ",\"atoms\":[";
  bool first = true;
  for (const auto& a : m.atoms()) {
    if (!first) out += ',';
    first = false;
    out += "{\"x\":";
    append_vector(out, a.x);
    out += ",\"w\":" + format_double(a.w) + "}";
  }
  out += "]}";
  return out;
}

std::string to_json(const LevyTriplet& t) {
  std::string out = "{\"d\":" + std::to_string(t.dim()) + ",\"drift\":";
  append_vector(out, t.drift);
  out += ",\"diffusion\":";
  append_matrix(out, t.diffusion);
  out += ",\"jumps\":[";
  bool first = true;
  for (const auto& a : t.jumps.atoms()) {
    if (!first) out += ',';
    first = false;
    out += "{\"x\":";
    append_vector(out, a.x);
    out += ",\"w\":" + format_double(a.w) + "}";
  }
  out += "]}";
  return out;
}

namespace {

void append_coupling_atoms(std::string& out, const LevyCoupling& c) {
  out += '[';
  bool first = true;
  for (const auto& a : c.atoms()) {
    if (!first) out += ',';
    first = false;
    out += "{\"x\":";
    append_vector(out, a.x);
    out += ",\"y\":";
    append_vector(out, a.y);
    out += ",\"w\":" + format_double(a.w) + "}";
  }
  out += ']';
}

}  // namespace

std::string to_json(const CoupledTriplet& j) {
  std::string out = "{\"d\":" + std::to_string(2 * j.dim()) + ",\"drift\":";
  append_vector(out, j.drift);
  out += ",\"diffusion\":";
  append_matrix(out, j.diffusion);
  out += ",\"coupling\":";
  append_coupling_atoms(out, j.jumps);
  out += '}';
  return out;
}

std::string to_json(const GeneratorDistance& g) {
  return "{\"total_sq\":" + format_double(g.total_sq) +
         ",\"drift_sq\":" + format_double(g.drift_sq) +
         ",\"diffusion_sq\":" + format_double(g.diffusion_sq) +
         ",\"jump_sq\":" + format_double(g.jump_sq) + "}";
}

std::string solution_to_json(const TransportSolution& sol, const DiscreteLevyMeasure& mu,
                             const DiscreteLevyMeasure& nu) {
  std::string out = "{\"cost\":" + format_double(sol.cost) + ",\"plan\":";
  append_coupling_atoms(out, sol.plan);
  out += ",\"phi\":{";
  for (std::size_t i = 0; i < sol.phi.size(); ++i) {
    if (i) out += ',';
    out += '"' + vector_key(mu.atoms()[i].x) + "\":" + format_double(sol.phi[i]);
  }
  out += "},\"psi\":{";
  for (std::size_t j = 0; j < sol.psi.size(); ++j) {
    if (j) out += ',';
    out += '"' + vector_key(nu.atoms()[j].x) + "\":" + format_double(sol.psi[j]);
  }
  out += "},\"gap\":" + format_double(sol.duality_gap);
  out += ",\"monotone\":";
  out += sol.monotone_certified ? "true" : "false";
  out += '}';
  return out;
}

}  // namespace levyot
