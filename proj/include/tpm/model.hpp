#pragma once

// Geometry and parameters of the 2-limb translational parallel manipulator.
//
// Frame O-XYZ sits at the centre of the rectangular base, X across the base
// (rails I at x = +b, rail II at x = -b), Y along the rails, Z up. All
// lengths are millimetres, all angles radians.

#include <array>
#include <cmath>
#include <iosfwd>
#include <string>

#include <Eigen/Core>

namespace tpm {

// Extended precision: near serial singularities the inverse map amplifies
// pose rounding by ~tan(alpha), which eats most of a double's mantissa.
using Real = long double;
using Vec3 = Eigen::Matrix<Real, 3, 1>;
using Mat3 = Eigen::Matrix<Real, 3, 3>;

inline constexpr Real kPi = 3.141592653589793238462643383279502884L;

// Solution-branch selector, always exactly +1 or -1.
enum class Sign : int { Plus = 1, Minus = -1 };

constexpr Real value(Sign s) { return static_cast<Real>(static_cast<int>(s)); }
constexpr Sign negate(Sign s) { return s == Sign::Plus ? Sign::Minus : Sign::Plus; }
constexpr char symbol(Sign s) { return s == Sign::Plus ? '+' : '-'; }
inline constexpr std::array<Sign, 2> kSigns{Sign::Plus, Sign::Minus};

// Link lengths and platform dimensions. Defaults are the prototype values.
struct StructuralParams {
  Real a = 360;  // stored only; used as rail length for default joint limits
  Real b = 90;   // half-width of the base
  Real d = 45;   // half of ST on the moving platform
  Real l1 = 70;  // A_iB_i
  Real l2 = 160; // B1C1 = B2C2
  Real l3 = 120; // C1C2
  Real l4 = 0;   // D1D2
  Real l5 = 90;  // stored only
  Real l6 = 180; // D2E2
  Real l7 = 0;   // E2S
  Real l8 = 0;   // TC3
  Real l9 = 300; // B3C3
  Real l10 = 150; // stored only

  // Throws Error(InvalidParams) on negative or non-finite lengths, or a
  // zero l2/l6/l9.
  void validate() const;

  // Uniformly scaled copy (all lengths multiplied by `factor`).
  StructuralParams scaled(Real factor) const;

  bool operator==(const StructuralParams&) const = default;
};

// Reads a flat JSON object {"a": 360, "b": 90, ...}. Keys a, l5, l10 are
// optional; every other length is required. Unknown keys are rejected.
StructuralParams load_params(std::istream& in);
StructuralParams load_params_file(const std::string& path);
void save_params(std::ostream& out, const StructuralParams& params);

// Rail positions of the three prismatic actuators.
struct ActuatedJoints {
  Real yA1 = 0;
  Real yA2 = 0;
  Real yA3 = 0;

  Vec3 vec() const { return {yA1, yA2, yA3}; }
  static ActuatedJoints from(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
  Real operator[](int i) const { return i == 0 ? yA1 : (i == 1 ? yA2 : yA3); }

  // yA2 > yA1: the order imposed by the rail layout of limb A.
  bool admissible() const { return yA2 > yA1; }
};

// Position of the tool centre point O'.
struct PlatformPose {
  Real x = 0;
  Real y = 0;
  Real z = 0;

  Vec3 vec() const { return {x, y, z}; }
  static PlatformPose from(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
};

// A (cos, sin) pair kept together so that no precision is lost on a round
// trip through an angle.
struct CosSin {
  Real cos = 1;
  Real sin = 0;

  Real angle() const { return std::atan2(sin, cos); }
  static CosSin of(Real angle) { return {std::cos(angle), std::sin(angle)}; }
};

// alpha: angle of B1C1 from +Y. beta: angle of D2E2 from -X.
struct AngleState {
  CosSin alpha;
  CosSin beta;
};

// Sign selectors: m, n pick the forward branch; v, w1..w3 the inverse one.
struct BranchSigns {
  Sign m = Sign::Plus;
  Sign n = Sign::Plus;
  Sign v = Sign::Plus;
  Sign w1 = Sign::Plus;
  Sign w2 = Sign::Plus;
  Sign w3 = Sign::Plus;
};

struct ChainPoints {
  std::array<Vec3, 3> A;
  std::array<Vec3, 3> B;
  std::array<Vec3, 3> C;
  Vec3 D1;
  Vec3 D2;
  Vec3 E2;
  Vec3 S;
  Vec3 T;
  Vec3 Oprime;
};

// Every labelled point, built from the forward-kinematics angles.
ChainPoints chain_points_from_fk(const ActuatedJoints& joints, const StructuralParams& params,
                                 const AngleState& angles);

// Same point set built from the platform side (pose plus beta), as the
// inverse problem sees it. Agrees with chain_points_from_fk on a consistent
// configuration.
ChainPoints chain_points_from_pose(const PlatformPose& pose, const ActuatedJoints& joints,
                                   const StructuralParams& params, const CosSin& beta);

}  // namespace tpm
