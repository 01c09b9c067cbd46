#include "isomix/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "isomix/errors.hpp"

namespace isomix {
namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::ValidationError, path + ": " + what);
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
}

void allow_keys(const json& j, const std::string& path, std::initializer_list<std::string_view> keys) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (auto k : keys) known = known || item.key() == k;
    if (!known) fail(join(path, item.key()), "unknown key");
  }
}

const json* find(const json& j, std::string_view key) {
  const auto it = j.find(std::string(key));
  return it == j.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) fail(path, "must be finite");
  return x;
}

double number(const json& obj, const std::string& path, std::string_view key, double fallback) {
  const json* v = find(obj, key);
  return v ? number(*v, join(path, key)) : fallback;
}

double required_number(const json& obj, const std::string& path, std::string_view key) {
  const json* v = find(obj, key);
  if (!v) fail(join(path, key), "missing");
  return number(*v, join(path, key));
}

std::size_t count(const json& obj, const std::string& path, std::string_view key,
                  std::size_t fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer() || v->get<long long>() < 0) {
    fail(join(path, key), "expected a non-negative integer");
  }
  return static_cast<std::size_t>(v->get<long long>());
}

int integer(const json& obj, const std::string& path, std::string_view key, int fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) fail(join(path, key), "expected an integer");
  return v->get<int>();
}

std::string text(const json& obj, const std::string& path, std::string_view key,
                 const std::string& fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_string()) fail(join(path, key), "expected a string");
  return v->get<std::string>();
}

Vector vec(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of numbers");
  Vector out(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) out[static_cast<Eigen::Index>(i)] = number(j[i], index(path, i));
  return out;
}

Vector vec_of_size(const json& j, const std::string& path, std::size_t n) {
  Vector v = vec(j, path);
  if (static_cast<std::size_t>(v.size()) != n) {
    fail(path, "expected " + std::to_string(n) + " entries, got " + std::to_string(v.size()));
  }
  return v;
}

MixtureSpec parse_mixture(const json& j, const std::string& path) {
  require_object(j, path);
  allow_keys(j, path, {"vbar", "molar_mass", "mu_ref", "theta_kb"});
  const json* vb = find(j, "vbar");
  if (!vb) fail(join(path, "vbar"), "missing");
  MixtureSpec spec = MixtureSpec::ideal(vec(*vb, join(path, "vbar")));
  const auto n = spec.n_species();
  if (n < 2) fail(join(path, "vbar"), "at least two constituents are required");
  if (const json* m = find(j, "molar_mass")) spec.molar_mass = vec_of_size(*m, join(path, "molar_mass"), n);
  if (const json* m = find(j, "mu_ref")) spec.mu_ref = vec_of_size(*m, join(path, "mu_ref"), n);
  spec.theta_kb = number(j, path, "theta_kb", 1.0);
  try {
    spec.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return spec;
}

ClosureModel parse_closure(const json* j, const std::string& path, std::size_t n) {
  if (!j) return ClosureModel::quasi_diagonal(1.0);
  require_object(*j, path);
  const std::string kind = text(*j, path, "kind", "quasi_diagonal");
  ClosureModel model;
  if (kind == "quasi_diagonal") {
    allow_keys(*j, path, {"kind", "mobility_scale"});
    model = ClosureModel::quasi_diagonal(number(*j, path, "mobility_scale", 1.0));
  } else if (kind == "maxwell_stefan") {
    allow_keys(*j, path, {"kind", "diffusivities"});
    const json* d = find(*j, "diffusivities");
    const std::string dpath = join(path, "diffusivities");
    if (!d || !d->is_array() || d->size() != n) fail(dpath, "expected an N x N array");
    Matrix mat = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
      mat.row(static_cast<Eigen::Index>(r)) = vec_of_size((*d)[r], index(dpath, r), n).transpose();
    }
    model = ClosureModel::maxwell_stefan(mat);
  } else {
    fail(join(path, "kind"), "expected quasi_diagonal or maxwell_stefan, got '" + kind + "'");
  }
  try {
    model.validate(n);
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return model;
}

Profile parse_profile(const json& j, const std::string& path, double fallback_value) {
  Profile p;
  p.mean = fallback_value;
  if (j.is_number()) {
    p.mean = number(j, path);
    return p;
  }
  require_object(j, path);
  const std::string kind = text(j, path, "kind", "uniform");
  if (kind == "uniform") {
    allow_keys(j, path, {"kind", "value"});
    p.mean = number(j, path, "value", fallback_value);
  } else if (kind == "cosine" || kind == "sine") {
    allow_keys(j, path, {"kind", "mean", "amplitude", "mode"});
    p.kind = kind == "cosine" ? Profile::Kind::Cosine : Profile::Kind::Sine;
    p.mean = number(j, path, "mean", fallback_value);
    p.amplitude = number(j, path, "amplitude", 0.0);
    p.mode = integer(j, path, "mode", 1);
    if (p.mode < 0) fail(join(path, "mode"), "must be non-negative");
  } else if (kind == "table") {
    allow_keys(j, path, {"kind", "values"});
    p.kind = Profile::Kind::Table;
    const json* v = find(j, "values");
    if (!v) fail(join(path, "values"), "missing");
    const Vector values = vec(*v, join(path, "values"));
    p.values.assign(values.data(), values.data() + values.size());
  } else {
    fail(join(path, "kind"), "expected uniform, cosine, sine or table, got '" + kind + "'");
  }
  return p;
}

ForceTerm parse_force(const json& j, const std::string& path, const Frame& frame) {
  require_object(j, path);
  allow_keys(j, path, {"direction", "shape", "mode", "amplitude", "rate"});
  ForceTerm f;
  const json* d = find(j, "direction");
  if (!d) fail(join(path, "direction"), "missing");
  f.direction = vec_of_size(*d, join(path, "direction"), frame.n_species());
  const std::string shape = text(j, path, "shape", "constant");
  if (shape == "constant") {
    f.shape = ForceTerm::Shape::Constant;
  } else if (shape == "sine") {
    f.shape = ForceTerm::Shape::Sine;
  } else if (shape == "cosine") {
    f.shape = ForceTerm::Shape::Cosine;
  } else {
    fail(join(path, "shape"), "expected constant, sine or cosine, got '" + shape + "'");
  }
  f.mode = integer(j, path, "mode", 1);
  if (f.mode < 0) fail(join(path, "mode"), "must be non-negative");
  f.amplitude = number(j, path, "amplitude", 0.0);
  f.rate = number(j, path, "rate", 0.0);
  // Shapes that do not vanish at the walls would drive a diffusive flux
  // through them; only the barycentric direction 1^N is accepted there.
  if (f.shape != ForceTerm::Shape::Sine) {
    const auto parts = frame.decompose(f.direction);
    const double off = parts.q_part.lpNorm<Eigen::Infinity>() + std::abs(parts.vbar_part);
    if (off > 1e-12 * std::max(1.0, f.direction.lpNorm<Eigen::Infinity>())) {
      fail(join(path, "direction"),
           "constant and cosine forces must be parallel to (1,...,1); use shape 'sine' otherwise");
    }
  }
  return f;
}

ReactionSpec parse_reaction(const json* j, const std::string& path, std::size_t n) {
  ReactionSpec r;
  if (!j) return r;
  require_object(*j, path);
  const std::string kind = text(*j, path, "kind", "zero");
  if (kind == "zero") {
    allow_keys(*j, path, {"kind"});
  } else if (kind == "constant") {
    allow_keys(*j, path, {"kind", "value"});
    r.kind = ReactionSpec::Kind::Constant;
    const json* v = find(*j, "value");
    if (!v) fail(join(path, "value"), "missing");
    r.value = vec_of_size(*v, join(path, "value"), n);
  } else if (kind == "linear_relaxation") {
    allow_keys(*j, path, {"kind", "rate", "rho_ref"});
    r.kind = ReactionSpec::Kind::LinearRelaxation;
    r.rate = required_number(*j, path, "rate");
    if (r.rate < 0.0) fail(join(path, "rate"), "must be non-negative");
    const json* v = find(*j, "rho_ref");
    if (!v) fail(join(path, "rho_ref"), "missing");
    r.rho_ref = vec_of_size(*v, join(path, "rho_ref"), n);
  } else {
    fail(join(path, "kind"), "expected zero, constant or linear_relaxation, got '" + kind + "'");
  }
  return r;
}

std::function<Vector(const Vector&)> reaction_function(const ReactionSpec& spec, const Frame& frame) {
  switch (spec.kind) {
    case ReactionSpec::Kind::Zero:
      return {};
    case ReactionSpec::Kind::Constant:
      return [value = spec.value](const Vector&) { return value; };
    case ReactionSpec::Kind::LinearRelaxation:
      return [rate = spec.rate, ref = spec.rho_ref, proj = frame.proj_perp_ones_vbar()](const Vector& rho) {
        return Vector(-rate * (proj * (rho - ref)));
      };
  }
  return {};
}

// Admissibility of the reaction: r.vbar = 0 and r.1 = 0 on a fixed set of states.
void check_reaction(const RunConfig& cfg, const std::string& path) {
  if (cfg.reaction.kind == ReactionSpec::Kind::Zero) return;
  const Thermodynamics thermo(cfg.mixture);
  const auto react = reaction_function(cfg.reaction, thermo.frame());
  const auto nq = static_cast<Eigen::Index>(thermo.n_reduced());
  const double lo = thermo.varrho_min();
  const double hi = thermo.varrho_max();
  for (double s : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double varrho = lo + s * (hi - lo);
    for (Eigen::Index k = -1; k < nq; ++k) {
      Vector q = Vector::Zero(nq);
      if (k >= 0) q[k] = (k % 2 == 0) ? 1.0 : -1.0;
      const Vector rho = thermo.map_r(varrho, q).rho;
      const Vector r = react(rho);
      const double scale = std::max(1.0, r.lpNorm<Eigen::Infinity>());
      const double vol = std::abs(r.dot(thermo.frame().vbar()));
      const double mass = std::abs(r.sum());
      if (vol > 1e-12 * scale || mass > 1e-12 * scale) {
        std::ostringstream os;
        os.precision(3);
        os << "reaction violates the admissibility rule r.vbar = 0 and r.1 = 0 (|r.vbar| = " << vol
           << ", |r.1| = " << mass << " at varrho = " << varrho << ")";
        fail(path, os.str());
      }
    }
  }
}

}  // namespace

double Profile::at(double x, double length, std::size_t cell) const {
  const double arg = static_cast<double>(mode) * std::numbers::pi * x / length;
  switch (kind) {
    case Kind::Uniform: return mean;
    case Kind::Cosine: return mean + amplitude * std::cos(arg);
    case Kind::Sine: return mean + amplitude * std::sin(arg);
    case Kind::Table: return values.at(cell);
  }
  return mean;
}

std::size_t RunConfig::n_steps() const {
  const double ratio = t_final / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(ratio));
}

SolverSettings RunConfig::solver_settings() const {
  SolverSettings s;
  s.dt = dt;
  s.viscosity = viscosity;
  s.picard_tol = picard_tol;
  s.max_sweeps = max_sweeps;
  return s;
}

Forcing RunConfig::forcing(const Frame& frame) const {
  Forcing f;
  if (!forces.empty()) {
    f.body_force = [terms = forces, len = length, n = frame.n_species()](double x, double t) {
      Vector b = Vector::Zero(static_cast<Eigen::Index>(n));
      for (const auto& term : terms) {
        const double arg = static_cast<double>(term.mode) * std::numbers::pi * x / len;
        double shape = 1.0;
        if (term.shape == ForceTerm::Shape::Sine) shape = std::sin(arg);
        if (term.shape == ForceTerm::Shape::Cosine) shape = std::cos(arg);
        b += term.direction * ((term.amplitude + term.rate * t) * shape);
      }
      return b;
    };
  }
  f.reaction = reaction_function(reaction, frame);
  return f;
}

DiscreteState RunConfig::initial_state(const Grid1D& grid) const {
  const auto n = static_cast<Eigen::Index>(grid.n_cells());
  const auto nq = static_cast<Eigen::Index>(mixture.n_species() - 2);
  DiscreteState s;
  s.varrho.resize(n);
  s.q = Matrix::Zero(nq, n);
  s.zeta = Vector::Zero(n);
  s.v.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto cell = static_cast<std::size_t>(i);
    const double x = grid.center(cell);
    s.varrho[i] = initial_varrho.at(x, length, cell);
    s.v[i] = initial_v.at(x, length, cell);
    for (Eigen::Index l = 0; l < nq; ++l) s.q(l, i) = initial_q[static_cast<std::size_t>(l)].at(x, length, cell);
  }
  return s;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

RunConfig parse_config(const std::string& source) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  require_object(doc, "");
  allow_keys(doc, "", {"mixture", "closure", "grid", "time", "picard", "viscosity", "initial",
                       "forces", "reaction", "output"});

  RunConfig cfg;
  const json* mixture = find(doc, "mixture");
  if (!mixture) fail("mixture", "missing");
  cfg.mixture = parse_mixture(*mixture, "mixture");
  const std::size_t n = cfg.mixture.n_species();
  const Frame frame = Frame::build(cfg.mixture.vbar);
  cfg.closure = parse_closure(find(doc, "closure"), "closure", n);

  if (const json* g = find(doc, "grid")) {
    require_object(*g, "grid");
    allow_keys(*g, "grid", {"n_cells", "length"});
    cfg.n_cells = count(*g, "grid", "n_cells", cfg.n_cells);
    cfg.length = number(*g, "grid", "length", cfg.length);
  }
  if (cfg.n_cells < 8) fail("grid.n_cells", "at least 8 cells are required");
  if (!(cfg.length > 0.0)) fail("grid.length", "must be positive");

  if (const json* t = find(doc, "time")) {
    require_object(*t, "time");
    allow_keys(*t, "time", {"dt", "t_final"});
    cfg.dt = number(*t, "time", "dt", cfg.dt);
    cfg.t_final = number(*t, "time", "t_final", cfg.t_final);
  }
  if (!(cfg.dt > 0.0)) fail("time.dt", "must be positive");
  if (!(cfg.t_final >= 0.0)) fail("time.t_final", "must be non-negative");

  if (const json* p = find(doc, "picard")) {
    require_object(*p, "picard");
    allow_keys(*p, "picard", {"tol", "max_sweeps"});
    cfg.picard_tol = number(*p, "picard", "tol", cfg.picard_tol);
    cfg.max_sweeps = count(*p, "picard", "max_sweeps", cfg.max_sweeps);
  }
  if (!(cfg.picard_tol > 0.0)) fail("picard.tol", "must be positive");
  if (cfg.max_sweeps < 1) fail("picard.max_sweeps", "must be at least 1");

  if (const json* v = find(doc, "viscosity")) cfg.viscosity = number(*v, "viscosity");
  if (!(cfg.viscosity > 0.0)) fail("viscosity", "must be positive");

  const double mid = 0.5 * (cfg.mixture.varrho_min() + cfg.mixture.varrho_max());
  cfg.initial_varrho.mean = mid;
  cfg.initial_q.assign(n - 2, Profile{});
  if (const json* init = find(doc, "initial")) {
    require_object(*init, "initial");
    allow_keys(*init, "initial", {"varrho", "q", "v"});
    if (const json* r = find(*init, "varrho")) cfg.initial_varrho = parse_profile(*r, "initial.varrho", mid);
    if (const json* v = find(*init, "v")) cfg.initial_v = parse_profile(*v, "initial.v", 0.0);
    if (const json* q = find(*init, "q")) {
      if (!q->is_array() || q->size() != n - 2) {
        fail("initial.q", "expected " + std::to_string(n - 2) + " profiles (one per reduced coordinate)");
      }
      for (std::size_t l = 0; l < n - 2; ++l) cfg.initial_q[l] = parse_profile((*q)[l], index("initial.q", l), 0.0);
    }
  }
  auto check_table = [&](const Profile& p, const std::string& path) {
    if (p.kind == Profile::Kind::Table && p.values.size() != cfg.n_cells) {
      fail(path, "table needs one value per cell (" + std::to_string(cfg.n_cells) + ")");
    }
  };
  check_table(cfg.initial_varrho, "initial.varrho");
  check_table(cfg.initial_v, "initial.v");
  for (std::size_t l = 0; l < cfg.initial_q.size(); ++l) check_table(cfg.initial_q[l], index("initial.q", l));
  {
    const Grid1D grid(cfg.n_cells, cfg.length);
    const DiscreteState s0 = cfg.initial_state(grid);
    for (Eigen::Index i = 0; i < s0.varrho.size(); ++i) {
      const double r = s0.varrho[i];
      if (!(r > cfg.mixture.varrho_min() && r < cfg.mixture.varrho_max())) {
        std::ostringstream os;
        os.precision(17);
        os << "initial total density " << r << " in cell " << i << " lies outside the open interval ("
           << cfg.mixture.varrho_min() << ", " << cfg.mixture.varrho_max() << ")";
        fail("initial.varrho", os.str());
      }
    }
    if (!s0.v.allFinite() || !s0.q.allFinite()) fail("initial", "fields must be finite");
  }

  if (const json* forces = find(doc, "forces")) {
    if (!forces->is_array()) fail("forces", "expected an array");
    for (std::size_t k = 0; k < forces->size(); ++k) cfg.forces.push_back(parse_force((*forces)[k], index("forces", k), frame));
  }
  cfg.reaction = parse_reaction(find(doc, "reaction"), "reaction", n);
  check_reaction(cfg, "reaction");

  if (const json* out = find(doc, "output")) {
    require_object(*out, "output");
    allow_keys(*out, "output", {"directory", "cadence", "precision", "norm_exponent", "holder_exponent"});
    cfg.output.directory = text(*out, "output", "directory", cfg.output.directory);
    cfg.output.cadence = count(*out, "output", "cadence", cfg.output.cadence);
    cfg.output.precision = integer(*out, "output", "precision", cfg.output.precision);
    cfg.output.norm_exponent = number(*out, "output", "norm_exponent", cfg.output.norm_exponent);
    cfg.output.holder_exponent = number(*out, "output", "holder_exponent", cfg.output.holder_exponent);
  }
  if (cfg.output.cadence < 1) fail("output.cadence", "must be at least 1");
  if (cfg.output.precision < 1 || cfg.output.precision > 17) fail("output.precision", "must lie in [1, 17]");
  if (!(cfg.output.norm_exponent > 3.0)) fail("output.norm_exponent", "must exceed 3");
  if (!(cfg.output.holder_exponent > 0.0 && cfg.output.holder_exponent < 1.0)) {
    fail("output.holder_exponent", "must lie in (0, 1)");
  }

  cfg.canonical = doc.dump();
  cfg.hash = fnv1a(cfg.canonical);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace isomix
