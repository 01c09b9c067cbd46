#include "isomix/output.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "isomix/errors.hpp"

namespace isomix {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot open '" + path.string() + "' for writing");
  out << content;
  out.close();
  if (!out) throw Error(ErrorKind::IoError, "failed writing '" + path.string() + "'");
}

std::string hex64(std::uint64_t h) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string monitors_csv(const TimeSeries& series, int digits) {
  std::string s =
      "step,time,mass,m_lower,M_upper,zeta_mean,volume_residual,picard_iters,picard_ratio,N_crit,"
      "K_crit,free_energy\n";
  for (const MonitorRow& r : series.rows) {
    s += std::to_string(r.step);
    for (double x : {r.time, r.mass, r.m_lower, r.M_upper, r.zeta_mean, r.volume_residual}) {
      s += ',';
      s += format_number(x, digits);
    }
    s += ',';
    s += std::to_string(r.picard_iters);
    for (double x : {r.picard_ratio, r.N_crit, r.K_crit, r.free_energy}) {
      s += ',';
      s += format_number(x, digits);
    }
    s += '\n';
  }
  return s;
}

std::string fields_csv(const FieldRecord& rec, double dx, int digits) {
  const auto n = rec.state.varrho.size();
  const auto nq = rec.state.q.rows();
  const auto ns = rec.rho.rows();
  std::string s = "x,varrho";
  for (Eigen::Index l = 0; l < nq; ++l) s += ",q_" + std::to_string(l + 1);
  s += ",zeta,v";
  for (Eigen::Index k = 0; k < ns; ++k) s += ",rho_" + std::to_string(k + 1);
  s += ",pressure\n";
  auto put = [&](double x) {
    s += ',';
    s += format_number(x, digits);
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    s += format_number((static_cast<double>(i) + 0.5) * dx, digits);
    put(rec.state.varrho[i]);
    for (Eigen::Index l = 0; l < nq; ++l) put(rec.state.q(l, i));
    put(rec.state.zeta[i]);
    put(rec.state.v[i]);
    for (Eigen::Index k = 0; k < ns; ++k) put(rec.rho(k, i));
    put(rec.pressure[i]);
    s += '\n';
  }
  return s;
}

std::string run_json(const TimeSeries& series, const RunConfig& config) {
  json doc;
  doc["config"] = json::parse(config.canonical);
  doc["config_hash"] = hex64(config.hash);
  doc["termination"] = std::string(to_string(series.termination));
  doc["message"] = series.message;
  const std::size_t steps = series.rows.empty() ? 0 : series.rows.back().step;
  doc["steps"] = steps;
  doc["final_time"] = series.rows.empty() ? 0.0 : series.rows.back().time;
  if (series.breach) {
    const BreachInfo& b = *series.breach;
    doc["breach"] = {{"cell", b.cell},
                     {"x", b.x},
                     {"value", b.value},
                     {"side", b.side == ThresholdBreachError::Side::Upper ? "upper" : "lower"},
                     {"time", b.time}};
  } else {
    doc["breach"] = nullptr;
  }
  double mass_drift = 0.0, zeta_mean = 0.0, volume = 0.0, mass_res = 0.0, iso = 0.0, ratio = 0.0;
  std::size_t sweeps = 0;
  for (const MonitorRow& r : series.rows) {
    const double m0 = series.rows.front().mass;
    mass_drift = std::max(mass_drift, std::abs(r.mass - m0) / std::max(std::abs(m0), 1e-300));
    zeta_mean = std::max(zeta_mean, r.zeta_mean);
    volume = std::max(volume, r.volume_residual);
    mass_res = std::max(mass_res, r.mass_residual);
    iso = std::max(iso, r.isochoric);
    ratio = std::max(ratio, r.picard_ratio);
    sweeps = std::max(sweeps, r.picard_iters);
  }
  doc["summary"] = {{"max_relative_mass_drift", mass_drift},
                    {"max_zeta_mean", zeta_mean},
                    {"max_volume_residual", volume},
                    {"max_mass_residual", mass_res},
                    {"max_isochoric_residual", iso},
                    {"max_picard_ratio", ratio},
                    {"max_picard_sweeps", sweeps}};
  return doc.dump(2) + "\n";
}

}  // namespace

std::string format_number(double x, int digits) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, digits);
  if (res.ec != std::errc{}) throw Error(ErrorKind::IoError, "number formatting failed");
  return std::string(buf, res.ptr);
}

void emit_outputs(const TimeSeries& series, const RunConfig& config, const std::string& directory) {
  const fs::path dir(directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create '" + directory + "': " + ec.message());
  const int digits = config.output.precision;
  const double dx = config.length / static_cast<double>(config.n_cells);
  write_file(dir / "monitors.csv", monitors_csv(series, digits));
  for (const FieldRecord& rec : series.fields) {
    write_file(dir / ("fields_" + std::to_string(rec.step) + ".csv"), fields_csv(rec, dx, digits));
  }
  write_file(dir / "run.json", run_json(series, config));
}

}  // namespace isomix
