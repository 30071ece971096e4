#pragma once
/// Output files: trajectory CSV, profile dumps, JSON summaries. Numbers are
/// written in shortest round-trip form so reruns are byte-identical.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "measure.hpp"
#include "pde.hpp"

namespace wtk {

using Json = nlohmann::ordered_json;

struct TrajectoryRow {
  double t = 0.0;
  double mass_total = 0.0;  // including the overflow ledger
  double mass_condensate = 0.0;
  double energy_active = 0.0;
  double overflow_mass = 0.0;
  double overflow_energy = 0.0;
  double near_mass_delta = 0.0;
  double tail_mass_R = 0.0;
  double moment_m05 = 0.0;
};

inline TrajectoryRow make_row(double t, const Measure& mu, double overflow_mass, double overflow_energy,
                              double delta, double R) {
  TrajectoryRow r;
  r.t = t;
  r.mass_total = total_mass(mu) + overflow_mass;
  r.mass_condensate = mu.condensate();
  r.energy_active = moment(mu, 1.0).value;
  r.overflow_mass = overflow_mass;
  r.overflow_energy = overflow_energy;
  r.near_mass_delta = near_mass(mu, delta);
  r.tail_mass_R = tail_mass(mu, R);
  r.moment_m05 = moment(mu, -0.5).value;
  return r;
}

inline std::vector<TrajectoryRow> pde_rows(const PdeRun& run, double delta, double R) {
  std::vector<TrajectoryRow> rows;
  for (const auto& s : run.snapshots) rows.push_back(make_row(s.t, s.mu, s.overflow_mass, s.overflow_energy, delta, R));
  return rows;
}

inline std::vector<TrajectoryRow> trajectory_rows(const Trajectory& traj, double delta, double R) {
  std::vector<TrajectoryRow> rows;
  for (const auto& s : traj) rows.push_back(make_row(s.t, s.mu, 0.0, 0.0, delta, R));
  return rows;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  return os;
}

inline void write_trajectory_csv(const std::filesystem::path& path, const std::vector<TrajectoryRow>& rows) {
  auto os = open_output(path);
  os << "t,mass_total,mass_condensate,energy_active,overflow_mass,overflow_energy,near_mass_delta,tail_mass_R,"
        "moment_m05\n";
  for (const auto& r : rows) {
    os << format_double(r.t) << ',' << format_double(r.mass_total) << ',' << format_double(r.mass_condensate) << ','
       << format_double(r.energy_active) << ',' << format_double(r.overflow_mass) << ','
       << format_double(r.overflow_energy) << ',' << format_double(r.near_mass_delta) << ','
       << format_double(r.tail_mass_R) << ',' << format_double(r.moment_m05) << '\n';
  }
}

/// Node position/weight pairs per snapshot; the condensate is the x = 0 row.
inline void write_snapshot_dump(const std::filesystem::path& path, const Trajectory& traj) {
  auto os = open_output(path);
  os << "t,x,w\n";
  for (const auto& s : traj) {
    os << format_double(s.t) << ",0," << format_double(s.mu.condensate()) << '\n';
    for (const Atom& a : s.mu.atoms()) {
      os << format_double(s.t) << ',' << format_double(a.position) << ',' << format_double(a.weight) << '\n';
    }
  }
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  auto os = open_output(path);
  os << text;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Summary with the timestamp confined to the header object.
inline void write_summary(const std::filesystem::path& path, const std::string& scenario, const Json& body) {
  Json j;
  j["header"] = {{"scenario", scenario}, {"generated_utc", utc_timestamp()}};
  for (const auto& [k, v] : body.items()) j[k] = v;
  write_text(path, j.dump(2) + "\n");
}

}  // namespace wtk
