#pragma once

// Closed-form position kinematics.
//
// Forward: loop 1 fixes alpha from the two rail positions of limb A, then the
// B3C3 length constraint fixes beta. Two signs (m for alpha, n for beta) give
// four branches.
//
// Inverse: the platform x fixes cos(beta); each rail position then follows
// from one link-length equation. Signs v (beta) and w1..w3 (one per rail)
// give sixteen branches.

#include <array>
#include <string_view>

#include "tpm/model.hpp"

namespace tpm {

// Band inside which a slightly out-of-range cosine is clamped to +-1.
inline constexpr Real kCosClamp = 1e-12L;
// Normalised band inside which a slightly negative discriminant is clamped
// to zero (configurations on the reach boundary).
inline constexpr Real kDiscriminantClamp = 1e-9L;

enum class FkStatus { Ok, CosOutOfRange, DiscriminantNegative, Degenerate };
enum class IkStatus { Ok, BetaCosOutOfRange, ComplexDiscriminant, OrderingViolation };

std::string_view to_string(FkStatus s);
std::string_view to_string(IkStatus s);

struct FkSolution {
  PlatformPose pose;
  AngleState angles;
  Sign m = Sign::Plus;
  Sign n = Sign::Plus;
  FkStatus status = FkStatus::Ok;

  bool feasible() const { return status == FkStatus::Ok; }
  // Sign of sin(beta), i.e. the inverse-kinematics v that reproduces it.
  Sign v() const { return angles.beta.sin < 0 ? Sign::Minus : Sign::Plus; }
};

struct IkSolution {
  ActuatedJoints joints;  // NaN entries where the solution is not real
  CosSin beta;
  Sign v = Sign::Plus;
  Sign w1 = Sign::Plus;
  Sign w2 = Sign::Plus;
  Sign w3 = Sign::Plus;
  IkStatus status = IkStatus::Ok;

  bool feasible() const { return status == IkStatus::Ok; }
  // Real-valued (passes everything except possibly the rail ordering).
  bool real() const { return status == IkStatus::Ok || status == IkStatus::OrderingViolation; }
};

// cos(alpha) = (yA2 - yA1 - l3) / (2 l2); sin(alpha) carries the sign m.
// Throws Error(CosOutOfRange) beyond the clamp band.
CosSin solve_alpha(const ActuatedJoints& joints, const StructuralParams& params, Sign m);

// Root of G1 sin(beta) + G2 cos(beta) + G3 = 0 on branch n (the tan-half
// angle root (-G1 + n sqrt(G1^2+G2^2-G3^2)) / (G3 - G2), evaluated without
// the half-angle substitution so beta = pi needs no special case).
// Throws Error(DiscriminantNegative) when beta is not real and
// Error(DegenerateDenominator) when G1 = G2 = 0.
CosSin solve_beta_fk(const ActuatedJoints& joints, const StructuralParams& params,
                     const CosSin& alpha, Sign n);

FkSolution forward(const ActuatedJoints& joints, const StructuralParams& params, Sign m, Sign n);

// The four branches in order (m,n) = (+,+), (+,-), (-,+), (-,-).
std::array<FkSolution, 4> forward_all(const ActuatedJoints& joints, const StructuralParams& params);

// cos(beta) = (b - d - x) / l6; sin(beta) carries the sign v.
CosSin inverse_beta(const PlatformPose& pose, const StructuralParams& params, Sign v);

IkSolution inverse(const PlatformPose& pose, const StructuralParams& params, Sign v, Sign w1,
                   Sign w2, Sign w3);

// The sixteen branches: v outermost, then w1, w2, w3, each + before -.
std::array<IkSolution, 16> inverse_all(const PlatformPose& pose, const StructuralParams& params);

// |C_i - B_i|^2 - l^2 for the three limb-length equations, with C_i built
// from the pose and beta (sign v). The ground-truth check for any
// (pose, joints) pair, in mm^2.
Vec3 residuals(const PlatformPose& pose, const ActuatedJoints& joints,
               const StructuralParams& params, Sign v);

}  // namespace tpm
