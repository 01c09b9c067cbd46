#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "isomix/config.hpp"
#include "isomix/errors.hpp"

using isomix::ErrorKind;
using isomix::parse_config;

namespace {

struct Failure {
  ErrorKind kind;
  std::string message;
};

Failure failure_of(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const isomix::Error& e) {
    return {e.kind(), e.what()};
  }
  ADD_FAILURE() << "accepted: " << text;
  return {ErrorKind::IoError, ""};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST(Config, Defaults) {
  const auto c = parse_config(R"({"mixture": {"vbar": [1, 2]}})");
  EXPECT_EQ(c.n_cells, 128u);
  EXPECT_DOUBLE_EQ(c.length, 1.0);
  EXPECT_DOUBLE_EQ(c.dt, 1e-3);
  EXPECT_DOUBLE_EQ(c.t_final, 0.5);
  EXPECT_EQ(c.n_steps(), 500u);
  EXPECT_DOUBLE_EQ(c.viscosity, 1.0);
  EXPECT_TRUE(c.closure.is_quasi_diagonal());
  EXPECT_EQ(c.output.cadence, 10u);
  EXPECT_EQ(c.output.precision, 17);
  EXPECT_DOUBLE_EQ(c.output.norm_exponent, 4.0);
  EXPECT_DOUBLE_EQ(c.output.holder_exponent, 0.25);
  EXPECT_EQ(c.mixture.molar_mass, isomix::Vector::Ones(2));
  // Initial total density defaults to the middle of (1/2, 1).
  const auto s = c.initial_state(isomix::Grid1D(c.n_cells, c.length));
  EXPECT_DOUBLE_EQ(s.varrho[0], 0.75);
  EXPECT_EQ(s.q.rows(), 0);
}

TEST(Config, Profiles) {
  const auto c = parse_config(R"({
    "mixture": {"vbar": [1, 2, 4]},
    "grid": {"n_cells": 8, "length": 2},
    "initial": {
      "varrho": {"kind": "cosine", "mean": 0.5, "amplitude": 0.1, "mode": 1},
      "q": [{"kind": "table", "values": [1, 2, 3, 4, 5, 6, 7, 8]}],
      "v": {"kind": "sine", "mean": 0, "amplitude": 1, "mode": 2}
    }})");
  const isomix::Grid1D g(c.n_cells, c.length);
  const auto s = c.initial_state(g);
  const double pi = std::acos(-1.0);
  EXPECT_NEAR(s.varrho[2], 0.5 + 0.1 * std::cos(pi * g.center(2) / 2.0), 1e-15);
  EXPECT_EQ(s.q(0, 4), 5.0);
  EXPECT_NEAR(s.v[1], std::sin(2 * pi * g.center(1) / 2.0), 1e-15);
}

TEST(Config, StepCount) {
  EXPECT_EQ(parse_config(R"({"mixture": {"vbar": [1, 2]}, "time": {"dt": 0.1, "t_final": 0.3}})").n_steps(), 3u);
  EXPECT_EQ(parse_config(R"({"mixture": {"vbar": [1, 2]}, "time": {"dt": 0.1, "t_final": 0.35}})").n_steps(), 4u);
  EXPECT_EQ(parse_config(R"({"mixture": {"vbar": [1, 2]}, "time": {"dt": 0.1, "t_final": 0}})").n_steps(), 0u);
}

TEST(Config, EqualVolumesNameTheRule) {
  const auto f = failure_of(R"({"mixture": {"vbar": [2, 2]}})");
  EXPECT_EQ(f.kind, ErrorKind::ValidationError);
  EXPECT_TRUE(contains(f.message, "DegenerateVolumes")) << f.message;
  EXPECT_TRUE(contains(f.message, "mixture")) << f.message;
}

TEST(Config, ReactionMustConserveMassAndVolume) {
  const auto f = failure_of(R"({"mixture": {"vbar": [1, 2]}, "reaction": {"kind": "constant", "value": [1, 0]}})");
  EXPECT_EQ(f.kind, ErrorKind::ValidationError);
  EXPECT_TRUE(contains(f.message, "reaction")) << f.message;
  // (1, -2, 1) is orthogonal to (1,1,1) but not to vbar = (1,2,4)
  EXPECT_EQ(failure_of(R"({"mixture": {"vbar": [1, 2, 4]},
      "reaction": {"kind": "constant", "value": [1, -2, 1]}})").kind, ErrorKind::ValidationError);
  // (2, -3, 1) . (1, 2, 4) = 0 and . 1 = 0
  EXPECT_NO_THROW((void)parse_config(R"({"mixture": {"vbar": [1, 2, 4]},
      "reaction": {"kind": "constant", "value": [2, -3, 1]}, "initial": {"q": [0]}})")
      );
}

TEST(Config, KeyPaths) {
  EXPECT_TRUE(contains(failure_of(R"({"mixture": {"vbar": [1, 2]}, "grid": {"n_cells": 4}})").message, "grid.n_cells"));
  EXPECT_TRUE(contains(failure_of(R"({"mixture": {"vbar": [1, 2]}, "time": {"dt": -1}})").message, "time.dt"));
  EXPECT_TRUE(contains(failure_of(R"({"mixture": {"vbar": [1, 2]}, "output": {"precision": 18}})").message,
                       "output.precision"));
  EXPECT_TRUE(contains(failure_of(R"({"mixture": {"vbar": [1, 2]}, "forces": [{"direction": [1, 0], "shape": "constant"}]})").message,
                       "forces[0].direction"));
  EXPECT_TRUE(contains(failure_of(R"({"mixture": {"vbar": [1, 2]}, "initial": {"varrho": 0.4}})").message,
                       "initial.varrho"));
  EXPECT_TRUE(contains(failure_of(R"({"mixture": {"vbar": [1, 2, 4]}, "initial": {"q": []}})").message,
                       "initial.q"));
  EXPECT_TRUE(contains(failure_of(R"({"grid": {"n_cells": 16}})").message, "mixture"));
  EXPECT_TRUE(contains(failure_of(R"({"mixture": {"vbar": [1, 2]},
      "closure": {"kind": "maxwell_stefan", "diffusivities": [[0, 1], [2, 0]]}})").message, "closure"));
}

TEST(Config, UnknownKeyRejected) {
  const auto f = failure_of(R"({"mixture": {"vbar": [1, 2]}, "grid": {"cells": 16}})");
  EXPECT_EQ(f.kind, ErrorKind::ValidationError);
  EXPECT_TRUE(contains(f.message, "grid.cells")) << f.message;
}

TEST(Config, MalformedJson) {
  EXPECT_EQ(failure_of(R"({"mixture": {"vbar": [1, 2],, }})").kind, ErrorKind::ParseError);
  EXPECT_EQ(failure_of("[1, 2]").kind, ErrorKind::ValidationError);
}

TEST(Config, MissingFile) {
  try {
    (void)isomix::load_config("/nonexistent/dir/config.json");
    FAIL();
  } catch (const isomix::Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IoError);
  }
}

TEST(Config, HashIsStableUnderFormatting) {
  const auto a = parse_config(R"({"mixture": {"vbar": [1, 2]}, "viscosity": 2})");
  const auto b = parse_config("{\n  \"viscosity\": 2,\n  \"mixture\": {\"vbar\": [1, 2]}\n}");
  const auto c = parse_config(R"({"mixture": {"vbar": [1, 2]}, "viscosity": 3})");
  EXPECT_EQ(a.hash, b.hash);
  EXPECT_NE(a.hash, c.hash);
  EXPECT_EQ(isomix::fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(isomix::fnv1a("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Config, ShippedScenariosParse) {
  for (const char* name : {"minimal", "binary_interdiffusion", "equilibrium", "ternary_forced", "threshold_breach"}) {
    EXPECT_NO_THROW((void)isomix::load_config(std::string(ISOMIX_SOURCE_DIR) + "/configs/" + name + ".json")) << name;
  }
}

TEST(Config, LinearRelaxationIsAdmissible) {
  const auto c = isomix::load_config(std::string(ISOMIX_SOURCE_DIR) + "/configs/ternary_forced.json");
  const auto frame = isomix::Frame::build(c.mixture.vbar);
  const auto forcing = c.forcing(frame);
  ASSERT_TRUE(static_cast<bool>(forcing.reaction));
  isomix::Vector rho(3);
  rho << 0.3, 0.05, 0.1;
  const auto r = forcing.reaction(rho);
  EXPECT_NEAR(r.sum(), 0.0, 1e-15);
  EXPECT_NEAR(r.dot(c.mixture.vbar), 0.0, 1e-15);
  EXPECT_GT(r.norm(), 0.0);
}
