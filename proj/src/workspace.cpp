#include "tpm/workspace.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <thread>

#include <fmt/format.h>

#include "tpm/error.hpp"

namespace tpm {

namespace {
constexpr Real kNaN = std::numeric_limits<Real>::quiet_NaN();
}

void GridSpec::validate() const {
  constexpr std::array<char, 3> names{'0', '1', '2'};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& a = axes[i];
    if (!std::isfinite(a.min) || !std::isfinite(a.max)) {
      throw Error(ErrorKind::InvalidGrid, fmt::format("axis {} has non-finite bounds", names[i]));
    }
    if (a.count < 1) {
      throw Error(ErrorKind::InvalidGrid, fmt::format("axis {} needs at least one node", names[i]));
    }
    if (a.count == 1 ? a.min != a.max : !(a.min < a.max)) {
      throw Error(ErrorKind::InvalidGrid,
                  fmt::format("axis {}: need min < max (or min == max with a single node)", names[i]));
    }
  }
}

std::size_t GridSpec::size() const {
  return static_cast<std::size_t>(axes[0].count) * axes[1].count * axes[2].count;
}

std::array<int, 3> GridSpec::unflatten(std::size_t index) const {
  const auto n0 = static_cast<std::size_t>(axes[0].count);
  const auto n1 = static_cast<std::size_t>(axes[1].count);
  return {static_cast<int>(index % n0), static_cast<int>((index / n0) % n1),
          static_cast<int>(index / (n0 * n1))};
}

std::size_t GridSpec::flatten(const std::array<int, 3>& ijk) const {
  return static_cast<std::size_t>(ijk[0]) +
         static_cast<std::size_t>(axes[0].count) *
             (static_cast<std::size_t>(ijk[1]) + static_cast<std::size_t>(axes[1].count) * ijk[2]);
}

Vec3 GridSpec::node(const std::array<int, 3>& ijk) const {
  return {axes[0].at(ijk[0]), axes[1].at(ijk[1]), axes[2].at(ijk[2])};
}

Vec3 GridSpec::node(std::size_t index) const { return node(unflatten(index)); }

Real GridSpec::max_pitch() const {
  return std::max({axes[0].pitch(), axes[1].pitch(), axes[2].pitch()});
}

GridSpec GridSpec::default_workspace() {
  return {{AxisRange{-150, 150, 61}, AxisRange{-200, 200, 81}, AxisRange{380, 550, 35}}};
}

WorkspaceLimits WorkspaceLimits::defaults(const StructuralParams& params) {
  WorkspaceLimits limits;
  limits.joint_range = std::pair{-params.a / 2, params.a / 2};
  return limits;
}

WorkspaceLimits WorkspaceLimits::ordering_only() {
  WorkspaceLimits limits;
  limits.positive_sin_alpha = false;
  limits.positive_sin_beta = false;
  return limits;
}

bool passes(const IkSolution& sol, const PlatformPose& pose, const StructuralParams& p,
            const WorkspaceLimits& limits) {
  if (!sol.real()) return false;
  if (limits.require_ordering && !sol.feasible()) return false;
  if (limits.joint_range) {
    const auto [lo, hi] = *limits.joint_range;
    for (int i = 0; i < 3; ++i) {
      if (sol.joints[i] < lo || sol.joints[i] > hi) return false;
    }
  }
  if (limits.positive_sin_beta && !(sol.beta.sin > 0)) return false;
  if (limits.positive_sin_alpha) {
    // z of C1 above B1.
    const Real rise = pose.z - p.l7 - p.l6 * sol.beta.sin - p.l4 - p.l1;
    if (!(rise > 0)) return false;
  }
  return true;
}

WorkspacePoint evaluate_pose(const PlatformPose& pose, const StructuralParams& params,
                             const WorkspaceLimits& limits) {
  WorkspacePoint pt;
  pt.pose = pose;
  pt.min_abs_detA = std::numeric_limits<Real>::infinity();
  pt.min_abs_detB = std::numeric_limits<Real>::infinity();
  for (const IkSolution& sol : inverse_all(pose, params)) {
    if (!passes(sol, pose, params, limits)) continue;
    ++pt.feasible_ik_count;
    try {
      const JacobianPair jp = jacobians(pose, sol, params);
      pt.min_abs_detA = std::min(pt.min_abs_detA, std::abs(jp.normalized_detA));
      pt.min_abs_detB = std::min(pt.min_abs_detB, std::abs(jp.normalized_detB));
    } catch (const Error&) {
      // beta at 0 or pi: D2E2 horizontal, rows 1 and 2 of A degenerate.
      pt.min_abs_detA = 0;
      pt.min_abs_detB = 0;
    }
  }
  pt.inside = pt.feasible_ik_count > 0;
  if (!pt.inside) pt.min_abs_detA = pt.min_abs_detB = kNaN;
  return pt;
}

std::vector<WorkspacePoint> scan_workspace(const StructuralParams& params, const GridSpec& grid,
                                           const WorkspaceLimits& limits,
                                           const ScanOptions& options) {
  grid.validate();
  std::vector<WorkspacePoint> out(grid.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = evaluate_pose(PlatformPose::from(grid.node(i)), params, limits);
      out[i].index = i;
    }
  };
  const std::size_t n = out.size();
  const unsigned shards = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(n)));
  if (shards == 1) {
    work(0, n);
    return out;
  }
  {
    std::vector<std::jthread> pool;
    for (unsigned s = 0; s < shards; ++s) {
      pool.emplace_back(work, n * s / shards, n * (s + 1) / shards);
    }
  }
  return out;
}

std::string_view to_string(SurfaceKind k) {
  return k == SurfaceKind::Serial ? "serial" : "parallel";
}

std::string_view to_string(SurfaceSpace s) {
  return s == SurfaceSpace::Workspace ? "workspace" : "jointspace";
}

namespace {

using Evaluator = std::function<std::optional<JacobianPair>(const Vec3&)>;
using ScalarField = std::function<std::optional<Real>(const Vec3&)>;

struct Field {
  std::vector<SerialCase> cases;
  ScalarField eval;
};

Evaluator make_evaluator(const StructuralParams& params, SurfaceSpace space,
                         const SurfaceOptions& opt) {
  if (space == SurfaceSpace::Jointspace) {
    return [params, opt](const Vec3& q) -> std::optional<JacobianPair> {
      const ActuatedJoints joints = ActuatedJoints::from(q);
      const FkSolution fk = forward(joints, params, opt.m, opt.n);
      if (!fk.feasible()) return std::nullopt;
      try {
        return jacobians(joints, fk, params);
      } catch (const Error&) {
        return std::nullopt;
      }
    };
  }
  return [params, opt](const Vec3& x) -> std::optional<JacobianPair> {
    const PlatformPose pose = PlatformPose::from(x);
    const IkSolution ik = inverse(pose, params, opt.v, opt.w1, opt.w2, opt.w3);
    if (!ik.real()) return std::nullopt;
    try {
      return jacobians(pose, ik, params);
    } catch (const Error&) {
      return std::nullopt;
    }
  };
}

// Normalised radicand of the rail equation for limbs A (index 0) or B
// (index 2) at a pose. It vanishes exactly where the matching u_ii does and,
// unlike u_ii on a fixed branch, changes sign there.
ScalarField radicand_field(const StructuralParams& p, Sign v, int limb) {
  return [p, v, limb](const Vec3& x) -> std::optional<Real> {
    const PlatformPose pose = PlatformPose::from(x);
    CosSin beta;
    try {
      beta = inverse_beta(pose, p, v);
    } catch (const Error&) {
      return std::nullopt;
    }
    const Real h12 = pose.z - p.l7 - p.l6 * beta.sin - p.l4 - p.l1;
    const Real L12 = pose.x + p.d + p.l6 * beta.cos - p.b;
    const Real r12 = ((p.l2 - h12) * (p.l2 + h12) - L12 * L12) / (p.l2 * p.l2);
    const Real h3 = pose.z - p.l8 - p.l1;
    const Real L3 = pose.x + p.b - p.d;
    const Real r3 = ((p.l9 - h3) * (p.l9 + h3) - L3 * L3) / (p.l9 * p.l9);
    // The other limb must still close for the pose to be a configuration.
    const Real other = limb == 0 ? r3 : r12;
    if (other < -kDiscriminantClamp) return std::nullopt;
    return limb == 0 ? r12 : r3;
  };
}

std::vector<Field> make_fields(const StructuralParams& params, SurfaceKind kind,
                               SurfaceSpace space, const SurfaceOptions& opt,
                               const Evaluator& evaluator) {
  std::vector<Field> fields;
  if (kind == SurfaceKind::Parallel) {
    fields.push_back({{}, [evaluator](const Vec3& q) -> std::optional<Real> {
                        const auto jp = evaluator(q);
                        if (!jp) return std::nullopt;
                        return jp->normalized_detA;
                      }});
    return fields;
  }
  // u11 and u22 vanish together (B1C1 and B2C2 both vertical); u33 alone.
  const std::vector<SerialCase> limb_a{SerialCase::U11Zero, SerialCase::U22Zero};
  const std::vector<SerialCase> limb_b{SerialCase::U33Zero};
  if (space == SurfaceSpace::Workspace) {
    fields.push_back({limb_a, radicand_field(params, opt.v, 0)});
    fields.push_back({limb_b, radicand_field(params, opt.v, 2)});
    return fields;
  }
  fields.push_back({limb_a, [evaluator](const Vec3& q) -> std::optional<Real> {
                      const auto jp = evaluator(q);
                      if (!jp) return std::nullopt;
                      return jp->B(0, 0) / jp->link_lengths[0];
                    }});
  fields.push_back({limb_b, [evaluator](const Vec3& q) -> std::optional<Real> {
                      const auto jp = evaluator(q);
                      if (!jp) return std::nullopt;
                      return jp->B(2, 2) / jp->link_lengths[2];
                    }});
  return fields;
}

bool opposite(Real a, Real b) { return (a < 0 && b > 0) || (a > 0 && b < 0); }

}  // namespace

SurfacePatch singular_surface(const StructuralParams& params, const GridSpec& grid,
                              SurfaceKind kind, SurfaceSpace space, const SurfaceOptions& opt) {
  grid.validate();
  SurfacePatch patch;
  patch.kind = kind;
  patch.space = space;

  const Evaluator evaluator = make_evaluator(params, space, opt);
  const std::vector<Field> fields = make_fields(params, kind, space, opt, evaluator);

  auto verified_det = [&](const Vec3& q) -> std::optional<Real> {
    const auto jp = evaluator(q);
    if (!jp) return std::nullopt;
    return std::abs(kind == SurfaceKind::Serial ? jp->normalized_detB : jp->normalized_detA);
  };

  const std::size_t n = grid.size();
  std::vector<std::optional<Real>> values(n);
  std::vector<bool> skipped(n, false);
  for (const Field& field : fields) {
    for (std::size_t i = 0; i < n; ++i) {
      values[i] = field.eval(grid.node(i));
      if (!values[i]) skipped[i] = true;
    }

    for (std::size_t i = 0; i < n; ++i) {
      if (!values[i]) continue;
      // A node exactly on the locus has no sign change on either side.
      if (*values[i] == 0) {
        const Vec3 q = grid.node(i);
        const auto det = verified_det(q);
        if (det && *det < opt.det_tolerance) patch.points.push_back({q, field.cases, *det});
        continue;
      }
      const auto ijk = grid.unflatten(i);
      for (int axis = 0; axis < 3; ++axis) {
        auto next = ijk;
        if (++next[axis] >= grid.axes[axis].count) continue;
        const std::size_t j = grid.flatten(next);
        if (!values[j] || !opposite(*values[i], *values[j])) continue;
        ++patch.crossings;

        Vec3 lo = grid.node(i), hi = grid.node(j);
        Real flo = *values[i], fhi = *values[j];
        bool lost = false;
        for (int it = 0; it < opt.max_bisections; ++it) {
          const Vec3 mid = (lo + hi) / 2;
          if ((hi - lo).norm() <= std::numeric_limits<Real>::epsilon() * (1 + mid.norm())) break;
          const auto fm = field.eval(mid);
          if (!fm) {
            lost = true;
            break;
          }
          if (*fm == 0) {
            lo = hi = mid;
            flo = fhi = 0;
            break;
          }
          if (opposite(*fm, flo)) {
            hi = mid;
            fhi = *fm;
          } else {
            lo = mid;
            flo = *fm;
          }
        }
        if (lost) {
          ++patch.rejected_crossings;
          continue;
        }

        // Keep whichever bracket end is closer to the zero and sits on a real
        // configuration that is singular to tolerance.
        std::optional<SurfacePoint> best;
        Real best_f = std::numeric_limits<Real>::infinity();
        for (const auto& [q, f] : {std::pair{lo, flo}, std::pair{hi, fhi}}) {
          const auto det = verified_det(q);
          if (!det || *det >= opt.det_tolerance || std::abs(f) >= best_f) continue;
          best = SurfacePoint{q, field.cases, *det};
          best_f = std::abs(f);
        }
        if (best) {
          patch.points.push_back(std::move(*best));
        } else {
          ++patch.rejected_crossings;
        }
      }
    }
  }
  patch.skipped_nodes = static_cast<std::size_t>(std::count(skipped.begin(), skipped.end(), true));
  return patch;
}

std::string_view to_string(Plane p) {
  switch (p) {
    case Plane::XZ: return "xz";
    case Plane::YZ: return "yz";
    case Plane::XY: return "xy";
  }
  return "?";
}

std::pair<int, int> plane_axes(Plane p) {
  switch (p) {
    case Plane::XZ: return {0, 2};
    case Plane::YZ: return {1, 2};
    case Plane::XY: return {0, 1};
  }
  return {0, 1};
}

std::vector<Point2> project(std::span<const Vec3> points, Plane plane, Real resolution) {
  const auto [u, v] = plane_axes(plane);
  std::map<std::pair<long long, long long>, Point2> cells;
  std::map<Point2, bool> exact;
  for (const Vec3& q : points) {
    const Point2 pt{q[u], q[v]};
    if (resolution > 0) {
      cells.try_emplace({std::llround(pt[0] / resolution), std::llround(pt[1] / resolution)}, pt);
    } else {
      exact.try_emplace(pt, true);
    }
  }
  std::vector<Point2> out;
  if (resolution > 0) {
    for (const auto& [_, pt] : cells) out.push_back(pt);
  } else {
    for (const auto& [pt, _] : exact) out.push_back(pt);
  }
  return out;
}

std::vector<Vec3> inside_points(std::span<const WorkspacePoint> scan) {
  std::vector<Vec3> out;
  for (const auto& p : scan) {
    if (p.inside) out.push_back(p.pose.vec());
  }
  return out;
}

}  // namespace tpm
