#pragma once

// File formats: the energy-series CSV, the "NCHF" binary snapshot, and the
// 8-bit PGM preview. All writers are deterministic: 17-significant-digit
// decimal for CSV (doubles round-trip exactly) and fixed little-endian
// layout for snapshots.

#include <string>
#include <utility>
#include <vector>

#include "nch/energy.hpp"
#include "nch/grid.hpp"

namespace nch {

// Header "t,mass,E,E_mod,linf,min,max,dt"; E_mod is an empty cell when absent.
void write_energy_csv(const std::vector<EnergyRecord>& records,
                      const std::string& path);
std::vector<EnergyRecord> read_energy_csv(const std::string& path);

// Snapshot layout (little-endian): magic "NCHF", u32 format version (1),
// u32 N1, u32 N2, f64 X1, f64 X2, f64 t, then N1*N2 f64 values row-major.
void write_snapshot(const RealField& field, double t, const std::string& path);
std::pair<RealField, double> read_snapshot(const std::string& path);

// Grayscale preview: phi mapped linearly from [-1.1, 1.1] to [0, 255],
// clamped.
void write_pgm(const RealField& field, const std::string& path);

} // namespace nch
