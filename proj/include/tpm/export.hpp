#pragma once

// Point-cloud output: CSV, JSON lines and ASCII PLY. Every writer throws
// Error(IoFailure) if the stream goes bad.

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "tpm/workspace.hpp"

namespace tpm {

enum class ExportFormat { Csv, JsonLines, Ply };

// "csv", "jsonl" / "json", "ply". Throws Error(IoFailure) on anything else.
ExportFormat parse_export_format(std::string_view name);

// decimals < 0 writes 17 significant digits (exact round trip for double).
void write_points(std::ostream& out, std::span<const WorkspacePoint> points, ExportFormat format,
                  int decimals = -1);
void write_patch(std::ostream& out, const SurfacePatch& patch, ExportFormat format,
                 int decimals = -1);
void write_projection(std::ostream& out, std::span<const Point2> points, Plane plane,
                      ExportFormat format, int decimals = -1);

// Reads back the CSV written by write_points.
std::vector<WorkspacePoint> import_points_csv(std::istream& in);

}  // namespace tpm
