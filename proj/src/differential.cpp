#include "tpm/differential.hpp"

#include <algorithm>

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <fmt/format.h>

#include "tpm/error.hpp"

namespace tpm {

std::string_view to_string(SingularityKind k) {
  switch (k) {
    case SingularityKind::Regular: return "regular";
    case SingularityKind::Serial: return "serial";
    case SingularityKind::Parallel: return "parallel";
    case SingularityKind::Mixed: return "mixed";
  }
  return "?";
}

std::string_view to_string(SerialCase c) {
  switch (c) {
    case SerialCase::U11Zero: return "u11_zero";
    case SerialCase::U22Zero: return "u22_zero";
    case SerialCase::U33Zero: return "u33_zero";
  }
  return "?";
}

std::string_view to_string(ParallelCase c) {
  switch (c) {
    case ParallelCase::Rows12Dependent: return "rows12_dependent";
    case ParallelCase::Rows13Dependent: return "rows13_dependent";
    case ParallelCase::Rows23Dependent: return "rows23_dependent";
    case ParallelCase::ThreeRowDependent: return "three_row_dependent";
  }
  return "?";
}

bool SingularityReport::has(SerialCase c) const {
  return std::find(serial_cases.begin(), serial_cases.end(), c) != serial_cases.end();
}

bool SingularityReport::has(ParallelCase c) const {
  return std::find(parallel_cases.begin(), parallel_cases.end(), c) != parallel_cases.end();
}

JacobianPair jacobians(const ActuatedJoints& joints, const PlatformPose& pose,
                       const StructuralParams& p, const AngleState& angles) {
  const CosSin& beta = angles.beta;
  if (std::abs(beta.sin) <= kBetaDegenerate) {
    throw Error(ErrorKind::BetaDegenerate, "sin(beta) ~ 0, cot(beta) undefined");
  }
  const ChainPoints pts = chain_points_from_pose(pose, joints, p, beta);
  const Vec3 r{(pts.C[0] - pts.B[0]).squaredNorm() - p.l2 * p.l2,
               (pts.C[1] - pts.B[1]).squaredNorm() - p.l2 * p.l2,
               (pts.C[2] - pts.B[2]).squaredNorm() - p.l9 * p.l9};
  if (r.cwiseAbs().maxCoeff() > kConsistencyTolerance) {
    throw Error(ErrorKind::InconsistentConfiguration,
                fmt::format("limb-length residuals ({:.3g}, {:.3g}, {:.3g}) mm^2",
                            static_cast<double>(r[0]), static_cast<double>(r[1]),
                            static_cast<double>(r[2])));
  }

  const Vec3 d1 = pts.C[0] - pts.B[0];
  const Vec3 d2 = pts.C[1] - pts.B[1];
  const Vec3 d3 = pts.C[2] - pts.B[2];
  const Real cot = beta.cos / beta.sin;

  JacobianPair jp;
  jp.A << cot * d1.z(), -d1.y(), -d1.z(),
          cot * d2.z(), -d2.y(), -d2.z(),
          d3.x(), d3.y(), d3.z();
  jp.B.diagonal() << d1.y(), d2.y(), -d3.y();
  jp.detA = jp.A.determinant();
  jp.detB = jp.B(0, 0) * jp.B(1, 1) * jp.B(2, 2);
  jp.link_lengths = {p.l2, p.l2, p.l9};

  Mat3 unit = jp.A;
  bool zero_row = false;
  for (int i = 0; i < 3; ++i) {
    const Real n = unit.row(i).norm();
    if (n == 0) {
      zero_row = true;
      break;
    }
    unit.row(i) /= n;
  }
  jp.normalized_detA = zero_row ? Real(0) : unit.determinant();
  jp.normalized_detB = (jp.B(0, 0) / p.l2) * (jp.B(1, 1) / p.l2) * (jp.B(2, 2) / p.l9);
  return jp;
}

JacobianPair jacobians(const ActuatedJoints& joints, const FkSolution& fk,
                       const StructuralParams& params) {
  if (!fk.feasible()) {
    throw Error(ErrorKind::InconsistentConfiguration,
                fmt::format("forward branch is {}", to_string(fk.status)));
  }
  return jacobians(joints, fk.pose, params, fk.angles);
}

JacobianPair jacobians(const PlatformPose& pose, const IkSolution& ik,
                       const StructuralParams& params) {
  if (!ik.real()) {
    throw Error(ErrorKind::InconsistentConfiguration,
                fmt::format("inverse branch is {}", to_string(ik.status)));
  }
  AngleState angles;
  angles.beta = ik.beta;
  const Vec3 b1c1 = chain_points_from_pose(pose, ik.joints, params, ik.beta).C[0] -
                    Vec3(params.b, ik.joints.yA1, params.l1);
  angles.alpha = {b1c1.y() / params.l2, b1c1.z() / params.l2};
  return jacobians(ik.joints, pose, params, angles);
}

namespace {

void require_regular(const JacobianPair& jp) {
  if (std::abs(jp.normalized_detA) < kSingularityThreshold) {
    throw Error(ErrorKind::NearParallelSingularity,
                fmt::format("normalised |det A| = {:.3g}", static_cast<double>(std::abs(jp.normalized_detA))));
  }
}

}  // namespace

Mat3 forward_jacobian(const JacobianPair& jp) {
  require_regular(jp);
  return -jp.A.fullPivLu().solve(jp.B);
}

Vec3 velocity_forward(const JacobianPair& jp, const Vec3& joint_rates) {
  require_regular(jp);
  return jp.A.fullPivLu().solve(-(jp.B * joint_rates));
}

SingularityReport classify(const JacobianPair& jp, Real tol) {
  SingularityReport rep;
  rep.abs_detA = std::abs(jp.detA);
  rep.abs_detB = std::abs(jp.detB);
  rep.abs_normalized_detA = std::abs(jp.normalized_detA);
  rep.abs_normalized_detB = std::abs(jp.normalized_detB);

  constexpr std::array<SerialCase, 3> serial{SerialCase::U11Zero, SerialCase::U22Zero,
                                             SerialCase::U33Zero};
  for (int i = 0; i < 3; ++i) {
    rep.serial_residuals[i] = std::abs(jp.B(i, i)) / jp.link_lengths[i];
    if (rep.serial_residuals[i] < tol) rep.serial_cases.push_back(serial[i]);
  }

  constexpr std::array<std::pair<int, int>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
  constexpr std::array<ParallelCase, 3> pair_cases{
      ParallelCase::Rows12Dependent, ParallelCase::Rows13Dependent, ParallelCase::Rows23Dependent};
  for (int k = 0; k < 3; ++k) {
    const Vec3 ei = jp.A.row(pairs[k].first).transpose();
    const Vec3 ej = jp.A.row(pairs[k].second).transpose();
    const Real denom = ei.norm() * ej.norm();
    rep.pairwise_residuals[k] = denom == 0 ? Real(0) : ei.cross(ej).norm() / denom;
    if (rep.pairwise_residuals[k] < tol) rep.parallel_cases.push_back(pair_cases[k]);
  }

  const bool is_serial = rep.abs_normalized_detB < tol;
  const bool is_parallel = rep.abs_normalized_detA < tol;
  if (is_parallel && rep.parallel_cases.empty()) {
    rep.parallel_cases.push_back(ParallelCase::ThreeRowDependent);
  }
  rep.kind = is_serial ? (is_parallel ? SingularityKind::Mixed : SingularityKind::Serial)
                       : (is_parallel ? SingularityKind::Parallel : SingularityKind::Regular);
  return rep;
}

std::string format_report(const SingularityReport& r) {
  auto join = [](const auto& cases) {
    std::string s;
    for (const auto& c : cases) s += (s.empty() ? "" : ",") + std::string(to_string(c));
    return s.empty() ? std::string("none") : s;
  };
  std::string out;
  out += fmt::format("kind: {}\n", to_string(r.kind));
  out += fmt::format("serial_cases: {}\n", join(r.serial_cases));
  out += fmt::format("parallel_cases: {}\n", join(r.parallel_cases));
  out += fmt::format("|detA|: {:.6e}\n", static_cast<double>(r.abs_detA));
  out += fmt::format("|detB|: {:.6e}\n", static_cast<double>(r.abs_detB));
  out += fmt::format("|detA| normalized: {:.6e}\n", static_cast<double>(r.abs_normalized_detA));
  out += fmt::format("|detB| normalized: {:.6e}\n", static_cast<double>(r.abs_normalized_detB));
  out += fmt::format("serial residuals: {:.6e} {:.6e} {:.6e}\n",
                     static_cast<double>(r.serial_residuals[0]),
                     static_cast<double>(r.serial_residuals[1]),
                     static_cast<double>(r.serial_residuals[2]));
  out += fmt::format("row-pair residuals (12 13 23): {:.6e} {:.6e} {:.6e}\n",
                     static_cast<double>(r.pairwise_residuals[0]),
                     static_cast<double>(r.pairwise_residuals[1]),
                     static_cast<double>(r.pairwise_residuals[2]));
  return out;
}

Mat3 finite_difference_jacobian(const ActuatedJoints& joints, const StructuralParams& params,
                                Sign m, Sign n, Real step) {
  const FkSolution centre = forward(joints, params, m, n);
  if (!centre.feasible()) {
    throw Error(ErrorKind::BranchFlip, fmt::format("branch infeasible at centre ({})", to_string(centre.status)));
  }
  // Angles may move by O(step) on a smooth branch; a jump means the stencil
  // crossed a branch boundary.
  const Real max_angle_jump = std::max(Real(1e-3), 1e3L * step / params.l2);
  auto same_branch = [&](const FkSolution& s) {
    auto dist = [](const CosSin& a, const CosSin& b) {
      return std::hypot(a.cos - b.cos, a.sin - b.sin);
    };
    return s.feasible() && dist(s.angles.alpha, centre.angles.alpha) < max_angle_jump &&
           dist(s.angles.beta, centre.angles.beta) < max_angle_jump;
  };

  Mat3 J;
  for (int k = 0; k < 3; ++k) {
    Vec3 q = joints.vec();
    q[k] += step;
    const FkSolution plus = forward(ActuatedJoints::from(q), params, m, n);
    q[k] -= 2 * step;
    const FkSolution minus = forward(ActuatedJoints::from(q), params, m, n);
    if (!same_branch(plus) || !same_branch(minus)) {
      throw Error(ErrorKind::BranchFlip, fmt::format("stencil leaves branch along joint {}", k + 1));
    }
    J.col(k) = (plus.pose.vec() - minus.pose.vec()) / (2 * step);
  }
  return J;
}

}  // namespace tpm
