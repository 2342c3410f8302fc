#pragma once

// Position-and-orientation characteristic (POC) sets and the mobility,
// constraint-degree and coupling-degree bookkeeping built on them.
//
// A POC set is modelled as a pair of linear subspaces of R^3: the directions
// the end link can translate along and the axes it can rotate about. Union
// (serial composition) is the span of both; intersection (parallel
// composition) is the subspace intersection.

#include <string>
#include <vector>

#include <Eigen/Core>

namespace tpm::topology {

using Direction = Eigen::Vector3d;

// Linear subspace of R^3 held as an orthonormal basis.
class Subspace {
 public:
  Subspace() = default;

  // Span of the given vectors; zero vectors are ignored.
  static Subspace span(const std::vector<Direction>& vectors);
  static Subspace full() { return span({Direction::UnitX(), Direction::UnitY(), Direction::UnitZ()}); }
  static Subspace none() { return {}; }

  int dim() const { return static_cast<int>(basis_.size()); }
  const std::vector<Direction>& basis() const { return basis_; }
  bool contains(const Direction& v) const;

  Subspace operator+(const Subspace& other) const;  // sum (span of union)
  Subspace operator&(const Subspace& other) const;  // intersection
  bool operator==(const Subspace& other) const;

 private:
  std::vector<Direction> basis_;
};

// Rank tolerance on unit-normalised spanning vectors.
inline constexpr double kRankTolerance = 1e-10;

struct PocSet {
  Subspace translation;
  Subspace rotation;

  int dim() const { return translation.dim() + rotation.dim(); }
  bool operator==(const PocSet&) const = default;
};

// "t^k r^j" with axis hints, e.g. "t3 r1(||X)".
std::string describe(const PocSet& poc);

PocSet poc_union(const PocSet& a, const PocSet& b);
PocSet poc_intersect(const PocSet& a, const PocSet& b);

// dim(partial U next): independent displacement equations contributed when
// branch `next` closes a loop on the sub-mechanism with POC `partial`.
int independent_displacement_count(const PocSet& partial, const PocSet& next_branch);

struct LoopSpec {
  std::string name;
  int joint_dof_sum = 1;        // sum of f_i over the joints the loop adds
  int actuated_count = 0;       // I_j
  std::vector<PocSet> poc_terms;  // unioned left to right
};

// xi of one loop: dimension of the union of its POC terms.
int loop_xi(const LoopSpec& loop);

// F = total_joint_dof - sum of xi over loops.
int dof(const std::vector<LoopSpec>& loops, int total_joint_dof);

// Delta = joint_dof_sum - actuated_count - xi.
int constraint_degree(const LoopSpec& loop, int xi);

// kappa = sum|Delta| / 2. Throws Error(NotAnSkc) when the deltas do not sum
// to zero.
int coupling_degree(const std::vector<int>& deltas);

struct TopologyReport {
  std::vector<int> xi_per_loop;
  int F = 0;
  std::vector<int> delta_per_loop;
  int kappa = 0;
  PocSet poc_platform;
  PocSet poc_limb_a;
  PocSet poc_limb_b;
};

// The two-loop decomposition of this manipulator, hard-wired.
struct MechanismDescription {
  PocSet limb_a;  // hybrid chain A at O'
  PocSet limb_b;  // hybrid chain B at T
  std::vector<LoopSpec> loops;
  int total_joint_dof = 0;
};

MechanismDescription tpm_mechanism();
TopologyReport analyze(const MechanismDescription& mech);

std::string format_report(const TopologyReport& report);

}  // namespace tpm::topology
