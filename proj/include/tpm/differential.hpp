#pragma once

// Velocity-level analysis: A xdot + B udot = 0 from differentiating the three
// limb-length equations, and singularity classification on A (parallel) and
// B (serial).

#include <string>
#include <vector>

#include "tpm/kinematics.hpp"
#include "tpm/model.hpp"

namespace tpm {

// A configuration is singular when the normalised determinant falls below
// this.
inline constexpr Real kSingularityThreshold = 1e-8L;
// |sin(beta)| at or below this leaves cot(beta) undefined.
inline constexpr Real kBetaDegenerate = 1e-9L;
// Largest limb-length residual (mm^2) accepted as a consistent configuration.
inline constexpr Real kConsistencyTolerance = 1e-6L;

struct JacobianPair {
  Mat3 A = Mat3::Zero();  // parallel Jacobian, rows e1, e2, e3
  Mat3 B = Mat3::Zero();  // serial Jacobian, diagonal
  Real detA = 0;
  Real detB = 0;
  // det of A with every row scaled to unit length (0 if a row vanishes).
  Real normalized_detA = 0;
  // (u11 / l2)(u22 / l2)(u33 / l9).
  Real normalized_detB = 0;
  Vec3 link_lengths = Vec3::Zero();  // l2, l2, l9: the scale of each u_ii
};

JacobianPair jacobians(const ActuatedJoints& joints, const PlatformPose& pose,
                       const StructuralParams& params, const AngleState& angles);

// Jacobians at a forward solution (must be feasible).
JacobianPair jacobians(const ActuatedJoints& joints, const FkSolution& fk,
                       const StructuralParams& params);

// Jacobians at an inverse solution (must be real).
JacobianPair jacobians(const PlatformPose& pose, const IkSolution& ik,
                       const StructuralParams& params);

// xdot = -A^{-1} B udot. Throws Error(NearParallelSingularity).
Vec3 velocity_forward(const JacobianPair& jp, const Vec3& joint_rates);

// -A^{-1} B, i.e. d pose / d joints. Throws Error(NearParallelSingularity).
Mat3 forward_jacobian(const JacobianPair& jp);

enum class SingularityKind { Regular, Serial, Parallel, Mixed };

enum class SerialCase { U11Zero, U22Zero, U33Zero };
enum class ParallelCase { Rows12Dependent, Rows13Dependent, Rows23Dependent, ThreeRowDependent };

std::string_view to_string(SingularityKind k);
std::string_view to_string(SerialCase c);
std::string_view to_string(ParallelCase c);

struct SingularityReport {
  SingularityKind kind = SingularityKind::Regular;
  std::vector<SerialCase> serial_cases;
  std::vector<ParallelCase> parallel_cases;
  Real abs_detA = 0;
  Real abs_detB = 0;
  Real abs_normalized_detA = 0;
  Real abs_normalized_detB = 0;
  Vec3 serial_residuals = Vec3::Zero();    // |u_ii| / link length
  Vec3 pairwise_residuals = Vec3::Zero();  // |e_i x e_j| / (|e_i||e_j|) for 12, 13, 23

  bool serial() const { return kind == SingularityKind::Serial || kind == SingularityKind::Mixed; }
  bool parallel() const { return kind == SingularityKind::Parallel || kind == SingularityKind::Mixed; }
  bool has(SerialCase c) const;
  bool has(ParallelCase c) const;
};

SingularityReport classify(const JacobianPair& jp, Real tol = kSingularityThreshold);

std::string format_report(const SingularityReport& report);

// Central-difference d pose / d joints of forward() on one branch. Throws
// Error(BranchFlip) if the stencil leaves the branch.
Mat3 finite_difference_jacobian(const ActuatedJoints& joints, const StructuralParams& params,
                                Sign m, Sign n, Real step);

}  // namespace tpm
