#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "berrydyn/effective.hpp"
#include "berrydyn/errors.hpp"
#include "berrydyn/fulldyn.hpp"

namespace berrydyn {

// Full double precision, round-trip safe.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Single-writer atomic file emission: write a sibling temp file, then rename.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw SimError(ErrorCode::parse_error, "cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.flush()) throw SimError(ErrorCode::parse_error, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// Columns: t, x, y, px, py, re_psi_1, im_psi_1, ..., energy, norm, I_1..I_N.
inline std::string hybrid_trajectory_csv(const HybridTrajectory& traj, std::size_t n_levels) {
  std::string s = "t,x,y,px,py";
  for (std::size_t i = 1; i <= n_levels; ++i) {
    s += ",re_psi_" + std::to_string(i) + ",im_psi_" + std::to_string(i);
  }
  s += ",energy,norm";
  for (std::size_t i = 1; i <= n_levels; ++i) s += ",I_" + std::to_string(i);
  s += "\n";
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const HybridState& st = traj.samples[k];
    const SampleDiagnostics& d = traj.diagnostics[k];
    s += fmt17(st.t) + ',' + fmt17(st.q2.x) + ',' + fmt17(st.q2.y) + ',' + fmt17(st.p2.x) + ',' +
         fmt17(st.p2.y);
    for (std::size_t i = 0; i < n_levels; ++i) {
      s += ',' + fmt17(st.psi.amps()[i].real()) + ',' + fmt17(st.psi.amps()[i].imag());
    }
    s += ',' + fmt17(d.energy) + ',' + fmt17(d.norm);
    for (std::size_t i = 0; i < n_levels; ++i) s += ',' + fmt17(d.actions[i]);
    s += '\n';
  }
  return s;
}

// Same schema minus the quantum columns; px, py are kinetic momenta M*v.
inline std::string effective_trajectory_csv(const EffectiveTrajectory& traj, double mass) {
  std::string s = "t,x,y,px,py,energy\n";
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const EffectiveState& st = traj.samples[k];
    s += fmt17(st.t) + ',' + fmt17(st.q2.x) + ',' + fmt17(st.q2.y) + ',' +
         fmt17(mass * st.v2.x) + ',' + fmt17(mass * st.v2.y) + ',' + fmt17(traj.energies[k]) +
         '\n';
  }
  return s;
}

struct CurvatureGridPoint {
  double x, y, value;
};

inline std::string curvature_grid_csv(const std::vector<CurvatureGridPoint>& grid) {
  std::string s = "x,y,B_curvature\n";
  for (const auto& p : grid) {
    s += fmt17(p.x) + ',' + fmt17(p.y) + ',' + fmt17(p.value) + '\n';
  }
  return s;
}

}  // namespace berrydyn
