#include <algorithm>
#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "tpm/error.hpp"
#include "tpm/workspace.hpp"

using namespace tpm;

namespace {

GridSpec reachable_window(int nx, int ny, int nz) {
  return {{AxisRange{-150, 150, nx}, AxisRange{-200, 200, ny}, AxisRange{150, 370, nz}}};
}

bool passes_oracle(const WorkspacePoint& pt, const StructuralParams& p, const WorkspaceLimits& lim) {
  for (const auto& s : inverse_all(pt.pose, p)) {
    if (!passes(s, pt.pose, p, lim)) continue;
    if (residuals(pt.pose, s.joints, p, s.v).cwiseAbs().maxCoeff() < 1e-9) return true;
  }
  return false;
}

}  // namespace

TEST(Grid, Validation) {
  EXPECT_NO_THROW(GridSpec::default_workspace().validate());
  EXPECT_EQ(GridSpec::default_workspace().size(), 61u * 81u * 35u);
  EXPECT_NEAR(GridSpec::default_workspace().max_pitch(), 5, 1e-12);

  auto bad = [](GridSpec g) {
    try {
      g.validate();
    } catch (const Error& e) {
      return e.kind() == ErrorKind::InvalidGrid;
    }
    return false;
  };
  GridSpec g = GridSpec::default_workspace();
  g.axes[0].count = 0;
  EXPECT_TRUE(bad(g));
  g = GridSpec::default_workspace();
  g.axes[1] = {10, -10, 5};
  EXPECT_TRUE(bad(g));
  g = GridSpec::default_workspace();
  g.axes[2] = {1, 2, 1};
  EXPECT_TRUE(bad(g));
  g = GridSpec::default_workspace();
  g.axes[2] = {1, 1, 1};
  EXPECT_FALSE(bad(g));
  g.axes[0].max = std::numeric_limits<Real>::infinity();
  EXPECT_TRUE(bad(g));
}

TEST(Grid, Indexing) {
  const GridSpec g{{AxisRange{0, 1, 3}, AxisRange{0, 1, 4}, AxisRange{0, 1, 5}}};
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(g.flatten(g.unflatten(i)), i);
  EXPECT_EQ(g.node(std::size_t{0}), Vec3(0, 0, 0));
  EXPECT_EQ(g.node(g.size() - 1), Vec3(1, 1, 1));
}

TEST(Workspace, DefaultBoundsAreAboveReach) {
  // The third limb alone limits z to l1 + l8 + l9 = 370.
  const StructuralParams p;
  const GridSpec g{{AxisRange{-150, 150, 31}, AxisRange{-200, 200, 31}, AxisRange{380, 550, 31}}};
  const auto scan = scan_workspace(p, g, WorkspaceLimits::defaults(p));
  EXPECT_EQ(scan.size(), g.size());
  EXPECT_TRUE(inside_points(scan).empty());
  const auto relaxed = scan_workspace(p, g, WorkspaceLimits::ordering_only());
  EXPECT_TRUE(inside_points(relaxed).empty());
}

TEST(Workspace, BelowReach) {
  const StructuralParams p;
  const Real zmax = p.l1 - p.l2 - p.l6 - 1;
  const GridSpec g{{AxisRange{-150, 150, 7}, AxisRange{-200, 200, 7}, AxisRange{zmax - 50, zmax, 3}}};
  const auto scan = scan_workspace(p, g, WorkspaceLimits::ordering_only());
  for (const auto& pt : scan) {
    EXPECT_FALSE(pt.inside);
    EXPECT_EQ(pt.feasible_ik_count, 0);
    EXPECT_TRUE(std::isnan(pt.min_abs_detA));
  }
}

TEST(Workspace, PrototypePoseSingleNode) {
  const StructuralParams p;
  const Vec3 pose(-80.3862L, 66.73L, 307.2328L);
  const GridSpec g{{AxisRange{pose.x(), pose.x(), 1}, AxisRange{pose.y(), pose.y(), 1},
                    AxisRange{pose.z(), pose.z(), 1}}};
  const auto scan = scan_workspace(p, g, WorkspaceLimits::ordering_only());
  ASSERT_EQ(scan.size(), 1u);
  EXPECT_TRUE(scan[0].inside);
  EXPECT_EQ(scan[0].feasible_ik_count, 6);
  // Four of the six sit on the rows-1-2 parallel singularity.
  EXPECT_LT(scan[0].min_abs_detA, 1e-8);
}

TEST(Workspace, ReachableWindowPassesOracle) {
  const StructuralParams p;
  const auto limits = WorkspaceLimits::defaults(p);
  const auto scan = scan_workspace(p, reachable_window(13, 17, 12), limits);
  int inside = 0;
  for (const auto& pt : scan) {
    ASSERT_EQ(pt.inside, pt.feasible_ik_count > 0);
    if (!pt.inside) continue;
    ++inside;
    EXPECT_TRUE(passes_oracle(pt, p, limits));
    EXPECT_LE(pt.feasible_ik_count, 16);
  }
  EXPECT_GT(inside, 0);
}

TEST(Workspace, LimitsFilter) {
  const StructuralParams p;
  const PlatformPose pose{-80.3862L, 66.73L, 307.2328L};
  const auto all = inverse_all(pose, p);
  // Branch (+,-,+,+): yA3 = 246.92 is beyond the default rail half-length.
  EXPECT_FALSE(passes(all[4], pose, p, WorkspaceLimits::defaults(p)));
  EXPECT_TRUE(passes(all[4], pose, p, WorkspaceLimits::ordering_only()));
  EXPECT_FALSE(passes(all[2], pose, p, WorkspaceLimits::ordering_only()));  // yA2 < yA1
  WorkspaceLimits wide = WorkspaceLimits::defaults(p);
  wide.joint_range = std::pair<Real, Real>{-300, 300};
  EXPECT_TRUE(passes(all[4], pose, p, wide));
}

TEST(Workspace, SymmetricInY) {
  const StructuralParams p;
  const auto scan = scan_workspace(p, reachable_window(9, 21, 9), WorkspaceLimits::defaults(p));
  std::set<std::array<long long, 3>> pts;
  auto key = [](const Vec3& v) {
    return std::array<long long, 3>{std::llround(v.x() * 1000), std::llround(v.y() * 1000),
                                    std::llround(v.z() * 1000)};
  };
  for (const auto& v : inside_points(scan)) pts.insert(key(v));
  ASSERT_FALSE(pts.empty());
  for (const auto& v : inside_points(scan)) {
    EXPECT_TRUE(pts.count(key(Vec3(v.x(), -v.y(), v.z())))) << v.transpose();
  }
}

TEST(Workspace, RefinementKeepsStatus) {
  const StructuralParams p;
  const auto limits = WorkspaceLimits::defaults(p);
  const auto coarse = scan_workspace(p, reachable_window(7, 9, 6), limits);
  const GridSpec fine_grid = reachable_window(13, 17, 11);
  const auto fine = scan_workspace(p, fine_grid, limits);
  for (const auto& c : coarse) {
    const auto ijk = reachable_window(7, 9, 6).unflatten(c.index);
    const auto& f = fine[fine_grid.flatten({2 * ijk[0], 2 * ijk[1], 2 * ijk[2]})];
    EXPECT_LT((f.pose.vec() - c.pose.vec()).norm(), 1e-9);
    EXPECT_EQ(f.inside, c.inside);
  }
}

TEST(Workspace, ThreadedScanMatches) {
  const StructuralParams p;
  const auto limits = WorkspaceLimits::defaults(p);
  const GridSpec g = reachable_window(9, 11, 7);
  const auto a = scan_workspace(p, g, limits, {1});
  const auto b = scan_workspace(p, g, limits, {3});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(b[i].index, i);
    EXPECT_EQ(a[i].inside, b[i].inside);
    EXPECT_EQ(a[i].feasible_ik_count, b[i].feasible_ik_count);
  }
}

TEST(Surface, JointspaceSerialRecoversVerticalLimbLocus) {
  const StructuralParams p;
  const GridSpec g{{AxisRange{-180, 180, 13}, AxisRange{-180, 180, 13}, AxisRange{-180, 180, 13}}};
  const SurfacePatch patch = singular_surface(p, g, SurfaceKind::Serial, SurfaceSpace::Jointspace);
  int limb_a = 0;
  for (const auto& pt : patch.points) {
    EXPECT_LT(pt.abs_normalized_det, 1e-6);
    if (std::find(pt.cases.begin(), pt.cases.end(), SerialCase::U11Zero) != pt.cases.end()) {
      ++limb_a;
      EXPECT_LT(std::abs(pt.point[1] - pt.point[0] - p.l3), 1e-6);
    }
  }
  EXPECT_GT(limb_a, 0);
  EXPECT_GT(patch.skipped_nodes, 0u);
}

TEST(Surface, BisectionBetweenNodes) {
  // Pitch 360/13 does not divide l3, so every locus point comes from bisection.
  const StructuralParams p;
  const GridSpec g{{AxisRange{-180, 180, 14}, AxisRange{-180, 180, 14}, AxisRange{-180, 180, 14}}};
  const SurfacePatch patch = singular_surface(p, g, SurfaceKind::Serial, SurfaceSpace::Jointspace);
  int limb_a = 0, limb_b = 0;
  for (const auto& pt : patch.points) {
    EXPECT_LT(pt.abs_normalized_det, 1e-6);
    const ActuatedJoints q = ActuatedJoints::from(pt.point);
    const FkSolution fk = forward(q, p, Sign::Plus, Sign::Plus);
    ASSERT_TRUE(fk.feasible());
    if (std::find(pt.cases.begin(), pt.cases.end(), SerialCase::U11Zero) != pt.cases.end()) {
      ++limb_a;
      EXPECT_LT(std::abs(pt.point[1] - pt.point[0] - p.l3), 1e-9);
    } else {
      ++limb_b;
      EXPECT_LT(std::abs(pt.point[2] - fk.pose.y), 1e-9);  // B3C3 normal to the rails
    }
  }
  EXPECT_GT(limb_a, 0);
  EXPECT_GT(limb_b, 0);
  EXPECT_EQ(patch.rejected_crossings, 0u);
}

TEST(Surface, JointspaceParallelPointsClassifyParallel) {
  const StructuralParams p;
  const GridSpec g{{AxisRange{-180, 180, 11}, AxisRange{-180, 180, 11}, AxisRange{-180, 180, 11}}};
  const SurfacePatch patch = singular_surface(p, g, SurfaceKind::Parallel, SurfaceSpace::Jointspace);
  EXPECT_FALSE(patch.points.empty());
  for (const auto& pt : patch.points) {
    const ActuatedJoints q = ActuatedJoints::from(pt.point);
    const FkSolution fk = forward(q, p, Sign::Plus, Sign::Plus);
    ASSERT_TRUE(fk.feasible());
    EXPECT_TRUE(classify(jacobians(q, fk, p), 1e-6L).parallel());
  }
}

TEST(Surface, WorkspaceSerial) {
  const StructuralParams p;
  const SurfacePatch patch =
      singular_surface(p, reachable_window(11, 11, 11), SurfaceKind::Serial, SurfaceSpace::Workspace);
  EXPECT_FALSE(patch.points.empty());
  for (const auto& pt : patch.points) EXPECT_LT(pt.abs_normalized_det, 1e-6);
}

TEST(Surface, NoSignChangeGivesEmptyPatch) {
  const StructuralParams p;
  // cos(alpha) > 0 and yA3 well above the platform's y throughout.
  const GridSpec g{{AxisRange{-100, -90, 3}, AxisRange{100, 110, 3}, AxisRange{100, 110, 3}}};
  const SurfacePatch patch = singular_surface(p, g, SurfaceKind::Serial, SurfaceSpace::Jointspace);
  EXPECT_EQ(patch.crossings, 0u);
  EXPECT_TRUE(patch.points.empty());
}

TEST(Project, Basics) {
  EXPECT_TRUE(project({}, Plane::XZ).empty());
  const std::vector<Vec3> one{Vec3(1, 2, 3)};
  const auto xz = project(one, Plane::XZ);
  ASSERT_EQ(xz.size(), 1u);
  EXPECT_EQ(xz[0], (Point2{1, 3}));
  const std::vector<Vec3> dup{Vec3(1, 2, 3), Vec3(1, 5, 3), Vec3(0, 5, 3)};
  const auto yz = project(dup, Plane::XZ);
  EXPECT_EQ(yz.size(), 2u);
  EXPECT_TRUE(std::is_sorted(yz.begin(), yz.end()));
  EXPECT_EQ(project(dup, Plane::YZ).size(), 2u);
  EXPECT_EQ(project(dup, Plane::XY, 100).size(), 1u);
}
