#include "tpm/topology.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>

#include <Eigen/LU>
#include <Eigen/QR>
#include <fmt/format.h>

#include "tpm/error.hpp"

namespace tpm::topology {

namespace {

using Matrix3X = Eigen::Matrix<double, 3, Eigen::Dynamic>;

Matrix3X stack(const std::vector<Direction>& vectors) {
  Matrix3X m(3, 0);
  for (const auto& v : vectors) {
    const double n = v.norm();
    if (n <= kRankTolerance) continue;
    m.conservativeResize(Eigen::NoChange, m.cols() + 1);
    m.col(m.cols() - 1) = v / n;
  }
  return m;
}

// Orthogonal complement in R^3.
Subspace complement(const Subspace& s) {
  if (s.dim() == 0) return Subspace::full();
  if (s.dim() == 3) return Subspace::none();
  Eigen::MatrixXd rows(s.dim(), 3);
  for (int i = 0; i < s.dim(); ++i) rows.row(i) = s.basis()[i].transpose();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(rows);
  lu.setThreshold(kRankTolerance);
  const Eigen::MatrixXd kernel = lu.kernel();
  std::vector<Direction> vs;
  for (int c = 0; c < kernel.cols(); ++c) vs.emplace_back(kernel.col(c));
  return Subspace::span(vs);
}

std::string axis_name(const Direction& v) {
  static const std::array<std::pair<const char*, Direction>, 3> axes{{
      {"X", Direction::UnitX()}, {"Y", Direction::UnitY()}, {"Z", Direction::UnitZ()}}};
  for (const auto& [name, axis] : axes) {
    if (std::abs(std::abs(v.normalized().dot(axis)) - 1.0) < 1e-9) return name;
  }
  return fmt::format("({:.3f},{:.3f},{:.3f})", v.x(), v.y(), v.z());
}

std::string describe_part(char symbol, const Subspace& s) {
  switch (s.dim()) {
    case 1: return fmt::format("{}1(||{})", symbol, axis_name(s.basis()[0]));
    case 2: return fmt::format("{}2(_|_{})", symbol, axis_name(complement(s).basis()[0]));
    default: return fmt::format("{}{}", symbol, s.dim());
  }
}

}  // namespace

Subspace Subspace::span(const std::vector<Direction>& vectors) {
  const Matrix3X m = stack(vectors);
  Subspace out;
  if (m.cols() == 0) return out;

  Eigen::FullPivLU<Matrix3X> lu(m);
  lu.setThreshold(kRankTolerance);
  const Eigen::Index rank = lu.rank();
  if (rank == 0) return out;

  const Matrix3X independent = lu.image(m);
  Eigen::HouseholderQR<Matrix3X> qr(independent);
  const Eigen::Matrix3d q = qr.householderQ();
  for (Eigen::Index c = 0; c < rank; ++c) out.basis_.emplace_back(q.col(c));
  return out;
}

bool Subspace::contains(const Direction& v) const {
  auto vs = basis_;
  vs.push_back(v);
  return span(vs).dim() == dim();
}

Subspace Subspace::operator+(const Subspace& other) const {
  auto vs = basis_;
  vs.insert(vs.end(), other.basis_.begin(), other.basis_.end());
  return span(vs);
}

Subspace Subspace::operator&(const Subspace& other) const {
  return complement(complement(*this) + complement(other));
}

bool Subspace::operator==(const Subspace& other) const {
  if (dim() != other.dim()) return false;
  for (const auto& v : other.basis_) {
    if (!contains(v)) return false;
  }
  return true;
}

std::string describe(const PocSet& poc) {
  return describe_part('t', poc.translation) + " " + describe_part('r', poc.rotation);
}

PocSet poc_union(const PocSet& a, const PocSet& b) {
  return {a.translation + b.translation, a.rotation + b.rotation};
}

PocSet poc_intersect(const PocSet& a, const PocSet& b) {
  return {a.translation & b.translation, a.rotation & b.rotation};
}

int independent_displacement_count(const PocSet& partial, const PocSet& next_branch) {
  return poc_union(partial, next_branch).dim();
}

int loop_xi(const LoopSpec& loop) {
  if (loop.poc_terms.empty()) return 0;
  PocSet acc = loop.poc_terms.front();
  if (loop.poc_terms.size() == 1) return acc.dim();
  int xi = 0;
  for (std::size_t i = 1; i < loop.poc_terms.size(); ++i) {
    xi = independent_displacement_count(acc, loop.poc_terms[i]);
    acc = poc_union(acc, loop.poc_terms[i]);
  }
  return xi;
}

int dof(const std::vector<LoopSpec>& loops, int total_joint_dof) {
  int xi_sum = 0;
  for (const auto& loop : loops) xi_sum += loop_xi(loop);
  return total_joint_dof - xi_sum;
}

int constraint_degree(const LoopSpec& loop, int xi) {
  return loop.joint_dof_sum - loop.actuated_count - xi;
}

int coupling_degree(const std::vector<int>& deltas) {
  const int sum = std::accumulate(deltas.begin(), deltas.end(), 0);
  if (sum != 0) {
    throw Error(ErrorKind::NotAnSkc, fmt::format("constraint degrees sum to {}, not 0", sum));
  }
  int abs_sum = 0;
  for (int d : deltas) abs_sum += std::abs(d);
  return abs_sum / 2;
}

MechanismDescription tpm_mechanism() {
  const Direction X = Direction::UnitX();
  const Direction Y = Direction::UnitY();
  const Direction Z = Direction::UnitZ();

  // Link 6 of the 2P4R planar loop: planar motion normal to the X-parallel
  // revolute axes.
  const PocSet planar{Subspace::span({Y, Z}), Subspace::span({X})};
  // Parallelogram 1 moves in the X-Z plane; X is the component link 6 lacks.
  const PocSet parallelogram_a{Subspace::span({X}), Subspace::none()};
  // Limb B before its parallelogram: three translations plus R32 (|| Y).
  const PocSet limb_b_base{Subspace::full(), Subspace::span({Y})};
  const PocSet parallelogram_b{Subspace::span({X}), Subspace::none()};

  MechanismDescription mech;
  mech.limb_a = poc_union(planar, parallelogram_a);
  mech.limb_b = poc_union(limb_b_base, parallelogram_b);

  // LOOP1: P11 R12 R13 R23 R22 P21, both prismatic joints actuated.
  mech.loops.push_back({"LOOP1", 6, 2, {planar, planar}});
  // LOOP2: Pa1, P31, R32, Pa2, R33 close on link 6; P31 actuated.
  mech.loops.push_back({"LOOP2", 5, 1, {planar, parallelogram_a, mech.limb_b}});
  mech.total_joint_dof = 6 + 5;
  return mech;
}

TopologyReport analyze(const MechanismDescription& mech) {
  TopologyReport report;
  for (const auto& loop : mech.loops) {
    const int xi = loop_xi(loop);
    report.xi_per_loop.push_back(xi);
    report.delta_per_loop.push_back(constraint_degree(loop, xi));
  }
  report.F = dof(mech.loops, mech.total_joint_dof);
  report.kappa = coupling_degree(report.delta_per_loop);
  report.poc_limb_a = mech.limb_a;
  report.poc_limb_b = mech.limb_b;
  report.poc_platform = poc_intersect(mech.limb_a, mech.limb_b);
  return report;
}

std::string format_report(const TopologyReport& r) {
  auto list = [](const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt::format("{:+d}", v[i]);
    return s;
  };
  std::string xi;
  for (std::size_t i = 0; i < r.xi_per_loop.size(); ++i) {
    xi += (i ? ", " : "") + std::to_string(r.xi_per_loop[i]);
  }
  std::string out;
  out += fmt::format("poc_limb_a: {}\n", describe(r.poc_limb_a));
  out += fmt::format("poc_limb_b: {}\n", describe(r.poc_limb_b));
  out += fmt::format("poc_platform: {}\n", describe(r.poc_platform));
  out += fmt::format("xi: {}\n", xi);
  out += fmt::format("F: {}\n", r.F);
  out += fmt::format("delta: {}\n", list(r.delta_per_loop));
  out += fmt::format("kappa: {}\n", r.kappa);
  return out;
}

}  // namespace tpm::topology
