#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "otrm/flows.hpp"
#include "otrm/measures.hpp"
#include "otrm/ot.hpp"
#include "otrm/stats_types.hpp"

namespace otrm {

// 17 significant digits: doubles survive a write/read round trip exactly.
std::string format17(double v);

// FNV-1a 64-bit over a canonical config serialization, as a hex string.
std::string fnv1a_hex(const std::string& payload);

// Measure CSV: header `w,x1..xd`, one row per atom. Lines starting with '#'
// are metadata comments (config hash, seed) and are skipped on read.
void write_measure_csv(const std::string& path, const discrete_measure& m,
                       const std::string& config_hash, std::uint64_t seed);
discrete_measure read_measure_csv(const std::string& path);

// Geodesic snapshots: columns t,w,x1..xd, concatenated over the grid.
void write_geodesic_csv(const std::string& path,
                        const std::vector<std::pair<double, discrete_measure>>& snaps,
                        const std::string& config_hash, std::uint64_t seed);

// Trajectory CSV: t,particle_id,x1..xd.
void write_trajectory_csv(const std::string& path, const flow_trajectory& traj,
                          const std::string& config_hash, std::uint64_t seed);

// Experiment rows CSV: n,mean,stderr.
void write_rows_csv(const std::string& path, const std::vector<rate_row>& rows,
                    const std::string& config_hash, std::uint64_t seed);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace otrm
