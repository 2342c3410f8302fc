#include "tpm/export.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "tpm/error.hpp"

namespace tpm {

namespace {

constexpr std::string_view kPointsHeader = "x,y,z,inside,ik_count,min_abs_detA,min_abs_detB";

std::string num(Real v, int decimals, bool json = false) {
  const double d = static_cast<double>(v);
  if (std::isnan(d)) return json ? "null" : "nan";
  if (std::isinf(d)) return json ? "null" : (d > 0 ? "inf" : "-inf");
  if (decimals < 0) return fmt::format("{:.17g}", d);
  return fmt::format("{:.{}f}", d, decimals);
}

void check(std::ostream& out) {
  if (!out) throw Error(ErrorKind::IoFailure, "write to output stream failed");
}

std::string join_cases(const std::vector<SerialCase>& cases, char sep) {
  std::string s;
  for (auto c : cases) {
    if (!s.empty()) s += sep;
    s += to_string(c);
  }
  return s;
}

std::array<const char*, 3> axis_names(SurfaceSpace space) {
  if (space == SurfaceSpace::Jointspace) return {"yA1", "yA2", "yA3"};
  return {"x", "y", "z"};
}

void ply_header(std::ostream& out, std::size_t count, const std::vector<std::string>& props) {
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << count << "\n";
  for (const auto& p : props) out << "property " << p << "\n";
  out << "end_header\n";
}

Real parse_real(std::string_view field, std::size_t line) {
  double v = 0;
  const char* first = field.data();
  const char* last = first + field.size();
  if (!field.empty() && field.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorKind::IoFailure, fmt::format("line {}: bad number '{}'", line, field));
  }
  return v;
}

}  // namespace

ExportFormat parse_export_format(std::string_view name) {
  if (name == "csv") return ExportFormat::Csv;
  if (name == "jsonl" || name == "json") return ExportFormat::JsonLines;
  if (name == "ply") return ExportFormat::Ply;
  throw Error(ErrorKind::IoFailure, fmt::format("unknown export format '{}'", name));
}

void write_points(std::ostream& out, std::span<const WorkspacePoint> points, ExportFormat format,
                  int decimals) {
  switch (format) {
    case ExportFormat::Csv:
      out << kPointsHeader << "\n";
      for (const auto& p : points) {
        out << num(p.pose.x, decimals) << ',' << num(p.pose.y, decimals) << ','
            << num(p.pose.z, decimals) << ',' << (p.inside ? 1 : 0) << ',' << p.feasible_ik_count
            << ',' << num(p.min_abs_detA, decimals) << ',' << num(p.min_abs_detB, decimals) << "\n";
      }
      break;
    case ExportFormat::JsonLines:
      for (const auto& p : points) {
        out << fmt::format(
            "{{\"x\":{},\"y\":{},\"z\":{},\"inside\":{},\"ik_count\":{},\"min_abs_detA\":{},"
            "\"min_abs_detB\":{}}}\n",
            num(p.pose.x, decimals, true), num(p.pose.y, decimals, true),
            num(p.pose.z, decimals, true), p.inside ? "true" : "false", p.feasible_ik_count,
            num(p.min_abs_detA, decimals, true), num(p.min_abs_detB, decimals, true));
      }
      break;
    case ExportFormat::Ply:
      ply_header(out, points.size(),
                 {"double x", "double y", "double z", "uchar inside", "uchar ik_count"});
      for (const auto& p : points) {
        out << num(p.pose.x, decimals) << ' ' << num(p.pose.y, decimals) << ' '
            << num(p.pose.z, decimals) << ' ' << (p.inside ? 1 : 0) << ' '
            << p.feasible_ik_count << "\n";
      }
      break;
  }
  check(out);
}

void write_patch(std::ostream& out, const SurfacePatch& patch, ExportFormat format, int decimals) {
  const auto names = axis_names(patch.space);
  switch (format) {
    case ExportFormat::Csv:
      out << names[0] << ',' << names[1] << ',' << names[2] << ",abs_det,cases\n";
      for (const auto& p : patch.points) {
        out << num(p.point[0], decimals) << ',' << num(p.point[1], decimals) << ','
            << num(p.point[2], decimals) << ',' << num(p.abs_normalized_det, -1) << ','
            << join_cases(p.cases, ';') << "\n";
      }
      break;
    case ExportFormat::JsonLines:
      for (const auto& p : patch.points) {
        std::string cases;
        for (auto c : p.cases) cases += fmt::format("{}\"{}\"", cases.empty() ? "" : ",", to_string(c));
        out << fmt::format("{{\"{}\":{},\"{}\":{},\"{}\":{},\"abs_det\":{},\"cases\":[{}]}}\n",
                           names[0], num(p.point[0], decimals, true), names[1],
                           num(p.point[1], decimals, true), names[2],
                           num(p.point[2], decimals, true), num(p.abs_normalized_det, -1, true),
                           cases);
      }
      break;
    case ExportFormat::Ply:
      out << "ply\nformat ascii 1.0\n";
      out << "comment " << to_string(patch.kind) << " singular surface in "
          << to_string(patch.space) << "\n";
      out << "element vertex " << patch.points.size() << "\n";
      out << "property double x\nproperty double y\nproperty double z\nend_header\n";
      for (const auto& p : patch.points) {
        out << num(p.point[0], decimals) << ' ' << num(p.point[1], decimals) << ' '
            << num(p.point[2], decimals) << "\n";
      }
      break;
  }
  check(out);
}

void write_projection(std::ostream& out, std::span<const Point2> points, Plane plane,
                      ExportFormat format, int decimals) {
  const auto [u, v] = plane_axes(plane);
  constexpr std::array<char, 3> axis{'x', 'y', 'z'};
  switch (format) {
    case ExportFormat::Csv:
      out << axis[u] << ',' << axis[v] << "\n";
      for (const auto& p : points) out << num(p[0], decimals) << ',' << num(p[1], decimals) << "\n";
      break;
    case ExportFormat::JsonLines:
      for (const auto& p : points) {
        out << fmt::format("{{\"{}\":{},\"{}\":{}}}\n", axis[u], num(p[0], decimals, true), axis[v],
                           num(p[1], decimals, true));
      }
      break;
    case ExportFormat::Ply:
      // Dropped coordinate written as 0 so viewers show the silhouette in place.
      ply_header(out, points.size(), {"double x", "double y", "double z"});
      for (const auto& p : points) {
        std::array<std::string, 3> xyz{"0", "0", "0"};
        xyz[u] = num(p[0], decimals);
        xyz[v] = num(p[1], decimals);
        out << xyz[0] << ' ' << xyz[1] << ' ' << xyz[2] << "\n";
      }
      break;
  }
  check(out);
}

std::vector<WorkspacePoint> import_points_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kPointsHeader) {
    throw Error(ErrorKind::IoFailure, "missing or unexpected CSV header");
  }
  std::vector<WorkspacePoint> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 7) {
      throw Error(ErrorKind::IoFailure, fmt::format("line {}: expected 7 fields, got {}", lineno, f.size()));
    }
    WorkspacePoint p;
    p.index = out.size();
    p.pose = {parse_real(f[0], lineno), parse_real(f[1], lineno), parse_real(f[2], lineno)};
    p.inside = parse_real(f[3], lineno) != 0;
    p.feasible_ik_count = static_cast<int>(parse_real(f[4], lineno));
    p.min_abs_detA = parse_real(f[5], lineno);
    p.min_abs_detB = parse_real(f[6], lineno);
    out.push_back(p);
  }
  if (in.bad()) throw Error(ErrorKind::IoFailure, "read from input stream failed");
  return out;
}

}  // namespace tpm
