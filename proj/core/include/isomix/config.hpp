#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "isomix/closure.hpp"
#include "isomix/solver.hpp"
#include "isomix/thermo.hpp"

namespace isomix {

/// Spatial profile on [0, L]:
///   uniform   value
///   cosine    mean + amplitude cos(mode pi x / L)
///   sine      mean + amplitude sin(mode pi x / L)
///   table     one value per cell
struct Profile {
  enum class Kind { Uniform, Cosine, Sine, Table };
  Kind kind = Kind::Uniform;
  double mean = 0.0;
  double amplitude = 0.0;
  int mode = 1;
  std::vector<double> values;

  double at(double x, double length, std::size_t cell) const;
};

/// b(x, t) += direction * (amplitude + rate t) * shape(x), shape one of
/// constant, sine or cosine of mode pi x / L. Constant and cosine shapes must
/// point along (1,...,1).
struct ForceTerm {
  enum class Shape { Constant, Sine, Cosine };
  Vector direction;
  Shape shape = Shape::Constant;
  int mode = 1;
  double amplitude = 0.0;
  double rate = 0.0;
};

/// zero; constant r; linear_relaxation r = -rate P (rho - rho_ref) with P the
/// projector onto {1, vbar}^perp.
struct ReactionSpec {
  enum class Kind { Zero, Constant, LinearRelaxation };
  Kind kind = Kind::Zero;
  Vector value;
  double rate = 0.0;
  Vector rho_ref;
};

struct OutputSpec {
  std::string directory = "out";
  std::size_t cadence = 10;
  int precision = 17;
  double norm_exponent = 4.0;
  double holder_exponent = 0.25;
};

struct RunConfig {
  MixtureSpec mixture;
  ClosureModel closure;
  std::size_t n_cells = 128;
  double length = 1.0;
  double dt = 1e-3;
  double t_final = 0.5;
  double picard_tol = 1e-9;
  std::size_t max_sweeps = 50;
  double viscosity = 1.0;
  Profile initial_varrho;
  std::vector<Profile> initial_q;  // N-2 profiles
  Profile initial_v;
  std::vector<ForceTerm> forces;
  ReactionSpec reaction;
  OutputSpec output;

  std::string canonical;  // normalized JSON echo of the input document
  std::uint64_t hash = 0;  // FNV-1a of `canonical`

  std::size_t n_steps() const;
  SolverSettings solver_settings() const;
  Forcing forcing(const Frame& frame) const;
  DiscreteState initial_state(const Grid1D& grid) const;
};

/// Parses and validates a JSON document. Throws ParseError for malformed text
/// and ValidationError naming the key path for rule violations.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

std::uint64_t fnv1a(const std::string& bytes);

}  // namespace isomix
