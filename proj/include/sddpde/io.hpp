#pragma once

#include <string>
#include <vector>

#include "sddpde/history.hpp"
#include "sddpde/integrator.hpp"

namespace sddpde {

/// Trajectory/history CSV: header `t,g_1..g_m,gd_1..gd_m`, one row per piece
/// endpoint, doubles printed with 17 significant digits so parsing round-trips
/// bit-for-bit. A derivative jump shows up as two consecutive rows with equal
/// t (equal values, different derivatives).
void write_history_csv(const HistoryBuffer& buf, const std::string& path);
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

/// Reconstruct Hermite pieces from CSV rows. The returned buffer spans the
/// full recorded range [t_first, t_last] (window length = span).
HistoryBuffer load_history_csv(const std::string& path);

/// Plot-data emitter: first column t, remaining columns named quantities.
void write_columns_csv(const std::string& path, const std::vector<std::string>& names,
                       const std::vector<std::vector<double>>& columns);

std::string format_double(double v);

}  // namespace sddpde
