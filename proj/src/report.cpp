#include "bigsam/report.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace bigsam {

double metric_rfg(double phi_y, double phi_star) {
  if (!(phi_star > 0.0))
    throw ConfigError(
        "relative feasibility gap needs phi* > 0; this instance has zero residual, use the "
        "absolute gap phi(y) - phi* instead");
  return (phi_y - phi_star) / phi_star;
}

GapValue metric_rog(double omega_y, double omega_star) {
  if (omega_star == 0.0) return {std::abs(omega_y), true};
  return {std::abs(omega_y - omega_star) / std::abs(omega_star), false};
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return kInfinity;
  if (s == "-inf") return -kInfinity;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError("not a number: '" + std::string(s) + "'");
  return v;
}

std::string csv_quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_quote(fields[i]);
  }
  out += "\r\n";
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool pending = false;  // something on the current line
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        pending = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        pending = true;
        break;
      case '\r':
        break;
      case '\n':
        row.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(row));
        row.clear();
        pending = false;
        break;
      default:
        field += c;
        pending = true;
    }
  }
  if (quoted) throw ConfigError("csv: unterminated quoted field");
  if (pending) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading: " + std::strerror(errno));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing: " + std::strerror(errno));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError(path.string() + ": write failed: " + std::strerror(errno));
}

std::string trajectory_csv(const Trajectory& traj, const std::optional<Vector>& x_mn) {
  std::vector<std::string> header = kTrajectoryColumns;
  if (x_mn) header.emplace_back("distance_to_x_mn");
  std::string out = csv_line(header);
  for (const IterationRecord& r : traj.records) {
    std::vector<std::string> row{std::to_string(r.k),
                                 format_double(r.alpha),
                                 format_double(r.phi_y),
                                 format_double(r.omega_y),
                                 format_double(r.step_residual),
                                 format_double(r.map_residual),
                                 format_double(r.elapsed.count())};
    if (x_mn) row.push_back(format_double((r.x - *x_mn).norm()));
    out += csv_line(row);
  }
  return out;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                          const std::optional<Vector>& x_mn) {
  write_text_file(path, trajectory_csv(traj, x_mn));
}

}  // namespace bigsam
