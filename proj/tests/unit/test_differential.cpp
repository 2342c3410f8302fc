#include <cmath>
#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "tpm/differential.hpp"
#include "tpm/error.hpp"

using namespace tpm;

namespace {

const ActuatedJoints kPrototypeJoints{-111.24L, 244.70L, 246.92L};
const PlatformPose kPrototypePose{-80.3862L, 66.7300L, 307.2328L};

JacobianPair prototype_column(int column) {
  const StructuralParams p;
  const auto all = inverse_all(kPrototypePose, p);
  return jacobians(kPrototypePose, all[column - 1], p);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no tpm::Error thrown";
  return ErrorKind::IoFailure;
}

}  // namespace

TEST(Jacobians, MatchFiniteDifferencesAtPrototype) {
  const StructuralParams p;
  const FkSolution fk = forward(kPrototypeJoints, p, Sign::Plus, Sign::Plus);
  const Mat3 J = forward_jacobian(jacobians(kPrototypeJoints, fk, p));
  const Mat3 Jfd = finite_difference_jacobian(kPrototypeJoints, p, Sign::Plus, Sign::Plus, 1e-6L);
  EXPECT_LT((J - Jfd).norm() / J.norm(), 1e-8);
}

TEST(Jacobians, MatchFiniteDifferencesOnEveryBranch) {
  const StructuralParams p;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-180, 180);
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    const ActuatedJoints q{u(rng), u(rng), u(rng)};
    for (const auto& fk : forward_all(q, p)) {
      if (!fk.feasible() || std::abs(fk.angles.beta.sin) < 1e-3) continue;
      const JacobianPair jp = jacobians(q, fk, p);
      const SingularityReport rep = classify(jp);
      if (rep.abs_normalized_detA < 1e-4 || rep.abs_normalized_detB < 1e-4) continue;
      Mat3 Jfd;
      try {
        Jfd = finite_difference_jacobian(q, p, fk.m, fk.n, 1e-6L);
      } catch (const Error&) {
        continue;
      }
      const Mat3 J = forward_jacobian(jp);
      EXPECT_LT((J - Jfd).norm() / J.norm(), 1e-6);
      ++checked;
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Jacobians, YDecoupledFromThirdRail) {
  const StructuralParams p;
  const FkSolution fk = forward(kPrototypeJoints, p, Sign::Plus, Sign::Plus);
  const Mat3 J = forward_jacobian(jacobians(kPrototypeJoints, fk, p));
  EXPECT_LT(std::abs(J(1, 2)), 1e-12);
  // x depends on yA3 only through beta.
  EXPECT_GT(std::abs(J(0, 2)), 1e-3);
}

TEST(Jacobians, ResidualOfVelocityEquationVanishes) {
  const StructuralParams p;
  const FkSolution fk = forward(kPrototypeJoints, p, Sign::Plus, Sign::Plus);
  const JacobianPair jp = jacobians(kPrototypeJoints, fk, p);
  const Vec3 udot(1.5L, -0.25L, 2);
  const Vec3 xdot = velocity_forward(jp, udot);
  EXPECT_LT((jp.A * xdot + jp.B * udot).norm(), 1e-9);
}

TEST(Jacobians, BothOverloadsAgree) {
  const StructuralParams p;
  const FkSolution fk = forward(kPrototypeJoints, p, Sign::Plus, Sign::Plus);
  const JacobianPair a = jacobians(kPrototypeJoints, fk, p);
  IkSolution ik = inverse(fk.pose, p, Sign::Plus, Sign::Minus, Sign::Plus, Sign::Plus);
  ASSERT_TRUE(ik.feasible());
  const JacobianPair b = jacobians(fk.pose, ik, p);
  EXPECT_LT((a.A - b.A).norm(), 1e-6);
  EXPECT_LT((a.B - b.B).norm(), 1e-6);
}

TEST(Jacobians, InconsistentConfigurationRejected) {
  const StructuralParams p;
  FkSolution fk = forward(kPrototypeJoints, p, Sign::Plus, Sign::Plus);
  fk.pose.z += 1;
  EXPECT_EQ(kind_of([&] { jacobians(kPrototypeJoints, fk.pose, p, fk.angles); }),
            ErrorKind::InconsistentConfiguration);
}

TEST(Jacobians, BetaDegenerate) {
  const StructuralParams p;
  // cos(beta) = 1
  const PlatformPose pose{p.b - p.d - p.l6, 0, 150};
  const IkSolution ik = inverse(pose, p, Sign::Plus, Sign::Minus, Sign::Plus, Sign::Plus);
  ASSERT_TRUE(ik.real());
  EXPECT_EQ(kind_of([&] { jacobians(pose, ik, p); }), ErrorKind::BetaDegenerate);
}

TEST(Jacobians, NormalizedDeterminantsAreScaleFree) {
  const StructuralParams p;
  const StructuralParams p3 = p.scaled(3);
  const ActuatedJoints q3 = ActuatedJoints::from(3 * kPrototypeJoints.vec());
  const JacobianPair a = jacobians(kPrototypeJoints, forward(kPrototypeJoints, p, Sign::Plus, Sign::Plus), p);
  const JacobianPair b = jacobians(q3, forward(q3, p3, Sign::Plus, Sign::Plus), p3);
  EXPECT_NEAR(a.normalized_detA, b.normalized_detA, 1e-12);
  EXPECT_NEAR(a.normalized_detB, b.normalized_detB, 1e-12);
  EXPECT_GT(std::abs(b.detB / a.detB), 26);
}

TEST(Classify, PrototypeColumns) {
  for (int c : {1, 2, 7, 8}) {
    const SingularityReport r = classify(prototype_column(c));
    EXPECT_TRUE(r.parallel()) << c;
    EXPECT_TRUE(r.has(ParallelCase::Rows12Dependent)) << c;
    EXPECT_FALSE(r.serial()) << c;
  }
  for (int c : {5, 6}) {
    const SingularityReport r = classify(prototype_column(c));
    EXPECT_EQ(r.kind, SingularityKind::Regular) << c;
    EXPECT_GT(r.abs_normalized_detA, 1e-3) << c;
    EXPECT_GT(r.abs_normalized_detB, 1e-3) << c;
  }
}

TEST(Classify, AlphaRightAngle) {
  const StructuralParams p;
  // yA2 - yA1 = l3 puts B1C1 vertical.
  const ActuatedJoints q{-60, 60, 50};
  const FkSolution fk = forward(q, p, Sign::Plus, Sign::Plus);
  ASSERT_TRUE(fk.feasible());
  EXPECT_NEAR(fk.angles.alpha.cos, 0, 1e-15);
  const JacobianPair jp = jacobians(q, fk, p);
  const SingularityReport r = classify(jp);
  EXPECT_TRUE(r.serial());
  EXPECT_TRUE(r.has(SerialCase::U11Zero));
  EXPECT_TRUE(r.has(SerialCase::U22Zero));
  EXPECT_FALSE(r.has(SerialCase::U33Zero));
  EXPECT_LT(r.abs_detB, 1e-9);
  // Vertical B1C1 also makes the first two rows of A coincide.
  EXPECT_EQ(r.kind, SingularityKind::Mixed);
  EXPECT_TRUE(r.has(ParallelCase::Rows12Dependent));
  EXPECT_EQ(kind_of([&] { velocity_forward(jp, Vec3(1, 0, 0)); }),
            ErrorKind::NearParallelSingularity);
}

TEST(Classify, ThirdLimbSerial) {
  const StructuralParams p;
  const FkSolution fk = forward(kPrototypeJoints, p, Sign::Plus, Sign::Plus);
  // yA3 = y: B3C3 in the X-Z plane.
  const ActuatedJoints q{kPrototypeJoints.yA1, kPrototypeJoints.yA2, fk.pose.y};
  const FkSolution s = forward(q, p, Sign::Plus, Sign::Plus);
  ASSERT_TRUE(s.feasible());
  const SingularityReport r = classify(jacobians(q, s, p));
  EXPECT_TRUE(r.has(SerialCase::U33Zero));
  EXPECT_FALSE(r.has(SerialCase::U11Zero));
  EXPECT_EQ(r.kind, SingularityKind::Serial);
}

TEST(Classify, ReportText) {
  const std::string text = format_report(classify(prototype_column(1)));
  EXPECT_NE(text.find("kind: parallel"), std::string::npos);
  EXPECT_NE(text.find("rows12_dependent"), std::string::npos);
}

TEST(FiniteDifference, BranchFlipDetected) {
  const StructuralParams p;
  // alpha within a step of 0: the stencil crosses cos(alpha) = 1.
  const ActuatedJoints q{0, p.l3 + 2 * p.l2 - 1e-4L, 0};
  EXPECT_EQ(kind_of([&] { finite_difference_jacobian(q, p, Sign::Plus, Sign::Plus, 1e-3L); }),
            ErrorKind::BranchFlip);
}
