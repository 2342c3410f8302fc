#include "tpm/model.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "tpm/error.hpp"

namespace tpm {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::CosOutOfRange: return "CosOutOfRange";
    case ErrorKind::DiscriminantNegative: return "DiscriminantNegative";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::BetaDegenerate: return "BetaDegenerate";
    case ErrorKind::InconsistentConfiguration: return "InconsistentConfiguration";
    case ErrorKind::NearParallelSingularity: return "NearParallelSingularity";
    case ErrorKind::BranchFlip: return "BranchFlip";
    case ErrorKind::NotAnSkc: return "NotAnSkc";
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

namespace {

// Field table shared by the validator, the loader and the writer.
struct Field {
  const char* key;
  Real StructuralParams::*member;
  bool required;
};

constexpr std::array<Field, 13> kFields{{
    {"a", &StructuralParams::a, false},
    {"b", &StructuralParams::b, true},
    {"d", &StructuralParams::d, true},
    {"l1", &StructuralParams::l1, true},
    {"l2", &StructuralParams::l2, true},
    {"l3", &StructuralParams::l3, true},
    {"l4", &StructuralParams::l4, true},
    {"l5", &StructuralParams::l5, false},
    {"l6", &StructuralParams::l6, true},
    {"l7", &StructuralParams::l7, true},
    {"l8", &StructuralParams::l8, true},
    {"l9", &StructuralParams::l9, true},
    {"l10", &StructuralParams::l10, false},
}};

}  // namespace

void StructuralParams::validate() const {
  for (const auto& f : kFields) {
    const Real v = this->*f.member;
    if (!std::isfinite(v) || v < 0) {
      throw Error(ErrorKind::InvalidParams,
                  fmt::format("'{}' must be a finite non-negative length", f.key));
    }
  }
  if (l2 <= 0 || l6 <= 0 || l9 <= 0) {
    throw Error(ErrorKind::InvalidParams, "l2, l6 and l9 must be strictly positive");
  }
}

StructuralParams StructuralParams::scaled(Real factor) const {
  StructuralParams out = *this;
  for (const auto& f : kFields) out.*f.member *= factor;
  return out;
}

StructuralParams load_params(std::istream& in) {
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidParams, fmt::format("unreadable parameter file: {}", e.what()));
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::InvalidParams, "parameter file must hold a flat key -> number map");
  }

  std::set<std::string> known;
  StructuralParams params;
  for (const auto& f : kFields) {
    known.insert(f.key);
    const auto it = doc.find(f.key);
    if (it == doc.end()) {
      if (f.required) {
        throw Error(ErrorKind::InvalidParams, fmt::format("missing required key '{}'", f.key));
      }
      continue;
    }
    if (!it->is_number()) {
      throw Error(ErrorKind::InvalidParams, fmt::format("key '{}' is not a number", f.key));
    }
    params.*f.member = it->get<double>();
  }
  for (const auto& [key, _] : doc.items()) {
    if (!known.contains(key)) {
      throw Error(ErrorKind::InvalidParams, fmt::format("unknown key '{}'", key));
    }
  }
  params.validate();
  return params;
}

StructuralParams load_params_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, fmt::format("cannot open '{}'", path));
  return load_params(in);
}

void save_params(std::ostream& out, const StructuralParams& params) {
  nlohmann::ordered_json doc;
  for (const auto& f : kFields) doc[f.key] = static_cast<double>(params.*f.member);
  out << std::setw(2) << doc << '\n';
  if (!out) throw Error(ErrorKind::IoFailure, "failed to write parameter file");
}

ChainPoints chain_points_from_fk(const ActuatedJoints& joints, const StructuralParams& p,
                                 const AngleState& angles) {
  const auto& [ca, sa] = angles.alpha;
  const auto& [cb, sb] = angles.beta;

  ChainPoints pts;
  pts.A = {Vec3(p.b, joints.yA1, 0), Vec3(p.b, joints.yA2, 0), Vec3(-p.b, joints.yA3, 0)};
  for (int i = 0; i < 3; ++i) pts.B[i] = pts.A[i] + Vec3(0, 0, p.l1);

  pts.C[0] = Vec3(p.b, joints.yA1 + p.l2 * ca, p.l1 + p.l2 * sa);
  pts.C[1] = pts.C[0] + Vec3(0, p.l3, 0);
  pts.D1 = pts.C[0] + Vec3(0, p.l3 / 2, 0);
  pts.D2 = pts.D1 + Vec3(0, 0, p.l4);
  pts.E2 = pts.D2 + Vec3(-p.l6 * cb, 0, p.l6 * sb);
  pts.S = pts.E2 + Vec3(0, 0, p.l7);
  pts.Oprime = pts.S - Vec3(p.d, 0, 0);
  pts.T = pts.Oprime - Vec3(p.d, 0, 0);
  pts.C[2] = pts.T - Vec3(0, 0, p.l8);
  return pts;
}

ChainPoints chain_points_from_pose(const PlatformPose& pose, const ActuatedJoints& joints,
                                   const StructuralParams& p, const CosSin& beta) {
  ChainPoints pts;
  pts.A = {Vec3(p.b, joints.yA1, 0), Vec3(p.b, joints.yA2, 0), Vec3(-p.b, joints.yA3, 0)};
  for (int i = 0; i < 3; ++i) pts.B[i] = pts.A[i] + Vec3(0, 0, p.l1);

  pts.Oprime = pose.vec();
  pts.S = pts.Oprime + Vec3(p.d, 0, 0);
  pts.T = pts.Oprime - Vec3(p.d, 0, 0);
  pts.E2 = pts.S - Vec3(0, 0, p.l7);
  pts.D2 = pts.E2 + Vec3(p.l6 * beta.cos, 0, -p.l6 * beta.sin);
  pts.D1 = pts.D2 - Vec3(0, 0, p.l4);
  pts.C[0] = pts.D1 - Vec3(0, p.l3 / 2, 0);
  pts.C[1] = pts.D1 + Vec3(0, p.l3 / 2, 0);
  pts.C[2] = pts.T - Vec3(0, 0, p.l8);
  return pts;
}

}  // namespace tpm
