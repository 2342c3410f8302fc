#include "tpm/kinematics.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

#include "tpm/error.hpp"

namespace tpm {

std::string_view to_string(FkStatus s) {
  switch (s) {
    case FkStatus::Ok: return "ok";
    case FkStatus::CosOutOfRange: return "cos_out_of_range";
    case FkStatus::DiscriminantNegative: return "discriminant_negative";
    case FkStatus::Degenerate: return "degenerate";
  }
  return "?";
}

std::string_view to_string(IkStatus s) {
  switch (s) {
    case IkStatus::Ok: return "ok";
    case IkStatus::BetaCosOutOfRange: return "beta_cos_out_of_range";
    case IkStatus::ComplexDiscriminant: return "complex_discriminant";
    case IkStatus::OrderingViolation: return "ordering_violation";
  }
  return "?";
}

namespace {

constexpr Real kNaN = std::numeric_limits<Real>::quiet_NaN();

// cos = num / den with |num| <= den clamped; sin from the factored 1 - cos^2.
CosSin cos_sin_from_ratio(Real num, Real den, Sign sign, const char* what) {
  if (std::abs(num) > den * (1 + kCosClamp)) {
    throw Error(ErrorKind::CosOutOfRange,
                fmt::format("|cos({})| = {:.12g} > 1", what, static_cast<double>(std::abs(num / den))));
  }
  const Real c = std::clamp(num / den, Real(-1), Real(1));
  const Real s2 = std::max(Real(0), (den - num) * (den + num)) / (den * den);
  return {c, value(sign) * std::sqrt(s2)};
}

// sqrt of a radicand measured in length^2, clamped within the tolerance band.
// Returns NaN when genuinely negative.
Real clamped_sqrt(Real radicand, Real length) {
  if (radicand >= 0) return std::sqrt(radicand);
  if (radicand >= -kDiscriminantClamp * length * length) return 0;
  return kNaN;
}

}  // namespace

CosSin solve_alpha(const ActuatedJoints& joints, const StructuralParams& p, Sign m) {
  const Real B = joints.yA2 - joints.yA1 - p.l3;
  return cos_sin_from_ratio(B, 2 * p.l2, m, "alpha");
}

CosSin solve_beta_fk(const ActuatedJoints& joints, const StructuralParams& p, const CosSin& alpha,
                     Sign n) {
  const Real F1 = 2 * p.b - 2 * p.d;
  const Real F2 = joints.yA1 - joints.yA3 + p.l2 * alpha.cos + p.l3 / 2;
  const Real F3 = p.l4 + p.l7 - p.l8 + p.l2 * alpha.sin;
  const Real G1 = 2 * F3 * p.l6;
  const Real G2 = -2 * F1 * p.l6;
  const Real G3 = F1 * F1 + F2 * F2 + F3 * F3 + p.l6 * p.l6 - p.l9 * p.l9;

  const Real g12 = G1 * G1 + G2 * G2;
  if (g12 == 0) {
    throw Error(ErrorKind::DegenerateDenominator, "G1 = G2 = 0, beta is undetermined");
  }

  // G1^2 + G2^2 - G3^2 factored so that it does not cancel near the reach
  // boundary: (K - (R - l6)^2) * ((R + l6)^2 - K).
  const Real R = std::hypot(F1, F3);
  const Real K = p.l9 * p.l9 - F2 * F2;
  Real disc = (K - (R - p.l6) * (R - p.l6)) * ((R + p.l6) * (R + p.l6) - K);
  if (disc < 0) {
    if (disc < -kDiscriminantClamp * g12) {
      throw Error(ErrorKind::DiscriminantNegative,
                  fmt::format("G1^2+G2^2-G3^2 = {:.6g}", static_cast<double>(disc)));
    }
    disc = 0;
  }
  const Real root = std::sqrt(disc);
  const Real ns = value(n);
  return {(-G3 * G2 + ns * G1 * root) / g12, (-G3 * G1 - ns * G2 * root) / g12};
}

FkSolution forward(const ActuatedJoints& joints, const StructuralParams& p, Sign m, Sign n) {
  FkSolution sol;
  sol.m = m;
  sol.n = n;
  sol.pose = {kNaN, kNaN, kNaN};
  try {
    sol.angles.alpha = solve_alpha(joints, p, m);
    sol.angles.beta = solve_beta_fk(joints, p, sol.angles.alpha, n);
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::CosOutOfRange: sol.status = FkStatus::CosOutOfRange; break;
      case ErrorKind::DiscriminantNegative: sol.status = FkStatus::DiscriminantNegative; break;
      default: sol.status = FkStatus::Degenerate; break;
    }
    return sol;
  }
  const auto& [ca, sa] = sol.angles.alpha;
  const auto& [cb, sb] = sol.angles.beta;
  sol.pose.x = p.b - p.l6 * cb - p.d;
  sol.pose.y = joints.yA1 + p.l2 * ca + p.l3 / 2;
  sol.pose.z = p.l1 + p.l4 + p.l7 + p.l2 * sa + p.l6 * sb;
  return sol;
}

std::array<FkSolution, 4> forward_all(const ActuatedJoints& joints, const StructuralParams& p) {
  std::array<FkSolution, 4> out;
  int k = 0;
  for (Sign m : kSigns) {
    for (Sign n : kSigns) out[k++] = forward(joints, p, m, n);
  }
  return out;
}

CosSin inverse_beta(const PlatformPose& pose, const StructuralParams& p, Sign v) {
  return cos_sin_from_ratio(p.b - p.d - pose.x, p.l6, v, "beta");
}

IkSolution inverse(const PlatformPose& pose, const StructuralParams& p, Sign v, Sign w1, Sign w2,
                   Sign w3) {
  IkSolution sol;
  sol.v = v;
  sol.w1 = w1;
  sol.w2 = w2;
  sol.w3 = w3;
  sol.joints = {kNaN, kNaN, kNaN};
  try {
    sol.beta = inverse_beta(pose, p, v);
  } catch (const Error&) {
    sol.status = IkStatus::BetaCosOutOfRange;
    return sol;
  }
  const auto& [cb, sb] = sol.beta;

  // y_Ai = M_i + w sqrt(-L_i - N_i), with the N terms written as
  // (l - h)(l + h) - ... to keep the radicand accurate near zero.
  const Real L12 = (pose.x + p.d + p.l6 * cb - p.b) * (pose.x + p.d + p.l6 * cb - p.b);
  const Real L3 = (pose.x + p.b - p.d) * (pose.x + p.b - p.d);
  const Real h12 = pose.z - p.l7 - p.l6 * sb - p.l4 - p.l1;
  const Real h3 = pose.z - p.l8 - p.l1;
  const Real r12 = (p.l2 - h12) * (p.l2 + h12) - L12;
  const Real r3 = (p.l9 - h3) * (p.l9 + h3) - L3;

  const Real s12 = clamped_sqrt(r12, p.l2);
  const Real s3 = clamped_sqrt(r3, p.l9);
  if (std::isnan(s12) || std::isnan(s3)) {
    sol.status = IkStatus::ComplexDiscriminant;
    return sol;
  }
  sol.joints.yA1 = pose.y - p.l3 / 2 + value(w1) * s12;
  sol.joints.yA2 = pose.y + p.l3 / 2 + value(w2) * s12;
  sol.joints.yA3 = pose.y + value(w3) * s3;
  if (!sol.joints.admissible()) sol.status = IkStatus::OrderingViolation;
  return sol;
}

std::array<IkSolution, 16> inverse_all(const PlatformPose& pose, const StructuralParams& p) {
  std::array<IkSolution, 16> out;
  int k = 0;
  for (Sign v : kSigns)
    for (Sign w1 : kSigns)
      for (Sign w2 : kSigns)
        for (Sign w3 : kSigns) out[k++] = inverse(pose, p, v, w1, w2, w3);
  return out;
}

Vec3 residuals(const PlatformPose& pose, const ActuatedJoints& joints, const StructuralParams& p,
               Sign v) {
  const CosSin beta = inverse_beta(pose, p, v);
  const ChainPoints pts = chain_points_from_pose(pose, joints, p, beta);
  return {(pts.C[0] - pts.B[0]).squaredNorm() - p.l2 * p.l2,
          (pts.C[1] - pts.B[1]).squaredNorm() - p.l2 * p.l2,
          (pts.C[2] - pts.B[2]).squaredNorm() - p.l9 * p.l9};
}

}  // namespace tpm
