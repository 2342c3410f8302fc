#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "tpm/error.hpp"
#include "tpm/kinematics.hpp"
#include "tpm/model.hpp"

using namespace tpm;

namespace {

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

TEST(Params, DefaultsArePrototype) {
  const StructuralParams p;
  EXPECT_EQ(p.a, 360);
  EXPECT_EQ(p.b, 90);
  EXPECT_EQ(p.d, 45);
  EXPECT_EQ(p.l1, 70);
  EXPECT_EQ(p.l2, 160);
  EXPECT_EQ(p.l3, 120);
  EXPECT_EQ(p.l4, 0);
  EXPECT_EQ(p.l5, 90);
  EXPECT_EQ(p.l6, 180);
  EXPECT_EQ(p.l7, 0);
  EXPECT_EQ(p.l8, 0);
  EXPECT_EQ(p.l9, 300);
  EXPECT_EQ(p.l10, 150);
  EXPECT_NO_THROW(p.validate());
}

TEST(Params, ValidateRejectsBadLengths) {
  StructuralParams p;
  p.l2 = -1;
  EXPECT_EQ(kind_of([&] { p.validate(); }), ErrorKind::InvalidParams);
  p = {};
  p.l9 = 0;
  EXPECT_EQ(kind_of([&] { p.validate(); }), ErrorKind::InvalidParams);
  p = {};
  p.l6 = 0;
  EXPECT_EQ(kind_of([&] { p.validate(); }), ErrorKind::InvalidParams);
  p = {};
  p.b = std::numeric_limits<Real>::quiet_NaN();
  EXPECT_EQ(kind_of([&] { p.validate(); }), ErrorKind::InvalidParams);
  p = {};
  p.l4 = 0;  // zero offsets are fine
  EXPECT_NO_THROW(p.validate());
}

TEST(Params, Scaled) {
  const StructuralParams p = StructuralParams{}.scaled(2);
  EXPECT_EQ(p.l2, 320);
  EXPECT_EQ(p.b, 180);
  EXPECT_EQ(p.a, 720);
}

TEST(Params, JsonRoundTrip) {
  StructuralParams p;
  p.l2 = 161.25L;
  p.l4 = 3;
  std::stringstream ss;
  save_params(ss, p);
  EXPECT_EQ(load_params(ss), p);
}

TEST(Params, JsonOptionalKeysDefault) {
  std::istringstream in(
      R"({"b":90,"d":45,"l1":70,"l2":160,"l3":120,"l4":0,"l6":180,"l7":0,"l8":0,"l9":300})");
  EXPECT_EQ(load_params(in), StructuralParams{});
}

TEST(Params, JsonErrors) {
  auto load = [](const std::string& s) {
    std::istringstream in(s);
    return load_params(in);
  };
  // missing l9
  EXPECT_EQ(kind_of([&] {
              load(R"({"b":90,"d":45,"l1":70,"l2":160,"l3":120,"l4":0,"l6":180,"l7":0,"l8":0})");
            }),
            ErrorKind::InvalidParams);
  // unknown key
  EXPECT_EQ(kind_of([&] {
              load(R"({"b":90,"d":45,"l1":70,"l2":160,"l3":120,"l4":0,"l6":180,"l7":0,"l8":0,"l9":300,"l11":1})");
            }),
            ErrorKind::InvalidParams);
  // not a number
  EXPECT_EQ(kind_of([&] {
              load(R"({"b":"x","d":45,"l1":70,"l2":160,"l3":120,"l4":0,"l6":180,"l7":0,"l8":0,"l9":300})");
            }),
            ErrorKind::InvalidParams);
  EXPECT_EQ(kind_of([&] { load("not json"); }), ErrorKind::InvalidParams);
  EXPECT_EQ(kind_of([&] { load_params_file("/nonexistent/params.json"); }), ErrorKind::IoFailure);
}

TEST(Sign, Helpers) {
  EXPECT_EQ(value(Sign::Plus), 1);
  EXPECT_EQ(value(Sign::Minus), -1);
  EXPECT_EQ(negate(Sign::Plus), Sign::Minus);
  EXPECT_EQ(symbol(Sign::Minus), '-');
}

TEST(ChainPoints, BothConstructionsAgree) {
  const StructuralParams p;
  const ActuatedJoints q{-111.24L, 244.70L, 246.92L};
  const FkSolution fk = forward(q, p, Sign::Plus, Sign::Plus);
  ASSERT_TRUE(fk.feasible());
  const ChainPoints a = chain_points_from_fk(q, p, fk.angles);
  const ChainPoints b = chain_points_from_pose(fk.pose, q, p, fk.angles.beta);
  for (int i = 0; i < 3; ++i) {
    EXPECT_LT((a.A[i] - b.A[i]).norm(), 1e-9);
    EXPECT_LT((a.B[i] - b.B[i]).norm(), 1e-9);
    EXPECT_LT((a.C[i] - b.C[i]).norm(), 1e-9);
  }
  EXPECT_LT((a.Oprime - fk.pose.vec()).norm(), 1e-9);
  EXPECT_LT((a.E2 - b.E2).norm(), 1e-9);
  // Link lengths hold on the built points.
  EXPECT_NEAR((a.C[0] - a.B[0]).norm(), p.l2, 1e-9);
  EXPECT_NEAR((a.C[1] - a.B[1]).norm(), p.l2, 1e-9);
  EXPECT_NEAR((a.C[2] - a.B[2]).norm(), p.l9, 1e-9);
  EXPECT_NEAR((a.E2 - a.D2).norm(), p.l6, 1e-9);
  EXPECT_NEAR((a.C[1] - a.C[0]).norm(), p.l3, 1e-9);
}
