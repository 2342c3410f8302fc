#pragma once

// Discrete workspace determination and numerical sampling of singularity
// loci.
//
// The workspace is found node by node on a pose grid: a node is inside when
// at least one inverse-kinematics branch survives every constraint filter.
// Singularity surfaces are sampled by looking for sign changes of a scalar
// singularity function along grid edges and bisecting each crossing.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "tpm/differential.hpp"
#include "tpm/kinematics.hpp"
#include "tpm/model.hpp"

namespace tpm {

struct AxisRange {
  Real min = 0;
  Real max = 0;
  int count = 1;

  Real pitch() const { return count > 1 ? (max - min) / (count - 1) : Real(0); }
  Real at(int i) const { return count > 1 ? min + (max - min) * i / (count - 1) : min; }
};

// Per-axis sampling of either pose space (x, y, z) or joint space
// (yA1, yA2, yA3). A single-node axis needs min == max.
struct GridSpec {
  std::array<AxisRange, 3> axes;

  void validate() const;  // throws Error(InvalidGrid)
  std::size_t size() const;
  std::array<int, 3> unflatten(std::size_t index) const;
  std::size_t flatten(const std::array<int, 3>& ijk) const;
  Vec3 node(std::size_t index) const;
  Vec3 node(const std::array<int, 3>& ijk) const;
  Real max_pitch() const;

  // -150..150 x -200..200 x 380..550 at 61 x 81 x 35 nodes (5 mm pitch).
  static GridSpec default_workspace();
};

// Filters applied to every inverse solution during a workspace scan.
struct WorkspaceLimits {
  std::optional<std::pair<Real, Real>> joint_range;  // applies to all three rails
  bool require_ordering = true;    // yA2 > yA1
  bool positive_sin_alpha = true;  // alpha in (0, pi)
  bool positive_sin_beta = true;   // beta in (0, pi)

  // Rails of length a centred on the origin, passive angles in (0, pi).
  static WorkspaceLimits defaults(const StructuralParams& params);
  // Real-valued solutions with yA2 > yA1 only.
  static WorkspaceLimits ordering_only();
};

// Does this inverse solution pass every filter in `limits`?
bool passes(const IkSolution& sol, const PlatformPose& pose, const StructuralParams& params,
            const WorkspaceLimits& limits);

struct WorkspacePoint {
  std::size_t index = 0;  // flat grid index
  PlatformPose pose;
  int feasible_ik_count = 0;
  // Row-normalised |det A| and length-normalised |det B|, minimised over
  // the surviving branches. NaN when none survives.
  Real min_abs_detA = 0;
  Real min_abs_detB = 0;
  bool inside = false;
};

// Evaluates one pose.
WorkspacePoint evaluate_pose(const PlatformPose& pose, const StructuralParams& params,
                             const WorkspaceLimits& limits);

struct ScanOptions {
  unsigned threads = 1;
};

// One WorkspacePoint per grid node, ordered by flat index.
std::vector<WorkspacePoint> scan_workspace(const StructuralParams& params, const GridSpec& grid,
                                           const WorkspaceLimits& limits,
                                           const ScanOptions& options = {});

enum class SurfaceKind { Serial, Parallel };
enum class SurfaceSpace { Workspace, Jointspace };

std::string_view to_string(SurfaceKind k);
std::string_view to_string(SurfaceSpace s);

struct SurfacePoint {
  Vec3 point;                      // pose or joints, per the patch's space
  std::vector<SerialCase> cases;   // serial factors vanishing here (empty for parallel)
  Real abs_normalized_det = 0;     // re-evaluated at the refined point
};

struct SurfacePatch {
  SurfaceKind kind = SurfaceKind::Serial;
  SurfaceSpace space = SurfaceSpace::Jointspace;
  std::vector<SurfacePoint> points;
  std::size_t skipped_nodes = 0;       // kinematics not evaluable
  std::size_t crossings = 0;           // edges with a sign change
  std::size_t rejected_crossings = 0;  // bisection left the branch or did not converge to a zero
};

struct SurfaceOptions {
  // Forward branch for joint-space sampling.
  Sign m = Sign::Plus;
  Sign n = Sign::Plus;
  // Inverse branch for workspace sampling; the prototype's assembly mode.
  Sign v = Sign::Plus;
  Sign w1 = Sign::Minus;
  Sign w2 = Sign::Plus;
  Sign w3 = Sign::Plus;
  Real det_tolerance = 1e-6L;
  int max_bisections = 200;
};

SurfacePatch singular_surface(const StructuralParams& params, const GridSpec& grid,
                              SurfaceKind kind, SurfaceSpace space,
                              const SurfaceOptions& options = {});

enum class Plane { XZ, YZ, XY };

std::string_view to_string(Plane p);
std::pair<int, int> plane_axes(Plane p);

using Point2 = std::array<Real, 2>;

// Drops one coordinate. With resolution > 0, points falling into the same
// resolution-sized cell are merged (first one kept); with resolution 0 only
// exact duplicates are. Output is sorted.
std::vector<Point2> project(std::span<const Vec3> points, Plane plane, Real resolution = 0);

// Poses of the inside points.
std::vector<Vec3> inside_points(std::span<const WorkspacePoint> scan);

}  // namespace tpm
