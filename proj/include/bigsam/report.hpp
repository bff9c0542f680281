#pragma once

#include "bigsam/solver.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bigsam {

/// File-system failures; the message names the path and the cause.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// (phi_y - phi*) / phi*. Throws ConfigError when phi* <= 0; zero-residual
// instances need an absolute gap instead.
double metric_rfg(double phi_y, double phi_star);

struct GapValue {
  double value = 0.0;
  bool absolute = false;  // omega* was zero, value is |omega_y|
};

// |omega_y - omega*| / |omega*|, or the absolute gap when omega* == 0.
GapValue metric_rog(double omega_y, double omega_star);

// ---------------------------------------------------------------------------
// CSV (RFC 4180)

// 17 significant digits; "nan", "inf" and "-inf" for non-finite values.
std::string format_double(double v);
// Parses what format_double produces.
double parse_double(std::string_view s);

std::string csv_quote(std::string_view field);
std::string csv_line(const std::vector<std::string>& fields);
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view text);

inline const std::vector<std::string> kTrajectoryColumns{
    "k", "alpha", "phi_y", "omega_y", "step_residual", "map_residual", "elapsed_seconds"};

// Writes one row per record. With x_mn the extra column distance_to_x_mn holds
// |x^k - x_mn|.
std::string trajectory_csv(const Trajectory& traj, const std::optional<Vector>& x_mn = {});
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const std::optional<Vector>& x_mn = {});

}  // namespace bigsam
