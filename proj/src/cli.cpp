#include "tpm/cli.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "tpm/differential.hpp"
#include "tpm/error.hpp"
#include "tpm/export.hpp"
#include "tpm/kinematics.hpp"
#include "tpm/model.hpp"
#include "tpm/topology.hpp"
#include "tpm/workspace.hpp"

namespace tpm::cli {

namespace {

using nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Global {
  std::string params_path;
  std::string format = "text";
  std::string out_path;
  bool degrees = false;
  int precision = 4;
  bool precision_given = false;
};

Real parse_real(std::string_view s, std::string_view flag) {
  long double v = 0;
  const char* first = s.data();
  const char* last = first + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw UsageError(fmt::format("{}: '{}' is not a number", flag, s));
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto pos = s.find(sep);
    parts.push_back(s.substr(0, pos));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return parts;
}

std::vector<Real> parse_reals(const std::string& s, std::size_t n, std::string_view flag) {
  const auto parts = split(s, ',');
  if (parts.size() != n) {
    throw UsageError(fmt::format("{}: expected {} comma-separated values, got '{}'", flag, n, s));
  }
  std::vector<Real> out;
  for (auto p : parts) out.push_back(parse_real(p, flag));
  return out;
}

Vec3 parse_vec3(const std::string& s, std::string_view flag) {
  const auto v = parse_reals(s, 3, flag);
  return {v[0], v[1], v[2]};
}

std::vector<Sign> parse_signs(const std::string& s, std::size_t n, std::string_view flag) {
  const auto parts = split(s, ',');
  if (parts.size() != n) {
    throw UsageError(fmt::format("{}: expected {} comma-separated signs, got '{}'", flag, n, s));
  }
  std::vector<Sign> out;
  for (auto p : parts) {
    if (p == "+" || p == "+1" || p == "1") {
      out.push_back(Sign::Plus);
    } else if (p == "-" || p == "-1") {
      out.push_back(Sign::Minus);
    } else {
      throw UsageError(fmt::format("{}: '{}' is not a sign (use + or -)", flag, p));
    }
  }
  return out;
}

// "name:min:max" tokens, one per axis, in any order.
GridSpec parse_grid(const std::vector<std::string>& bounds, const std::string& res,
                    const std::array<std::string_view, 3>& names) {
  GridSpec grid;
  std::array<bool, 3> seen{};
  if (bounds.size() != 3) throw UsageError("--bounds: expected three name:min:max tokens");
  for (const auto& tok : bounds) {
    const auto parts = split(tok, ':');
    if (parts.size() != 3) throw UsageError(fmt::format("--bounds: bad token '{}'", tok));
    const auto it = std::find(names.begin(), names.end(), parts[0]);
    if (it == names.end()) {
      throw UsageError(fmt::format("--bounds: unknown axis '{}' (expected {}, {}, {})", parts[0],
                                   names[0], names[1], names[2]));
    }
    const auto i = static_cast<std::size_t>(it - names.begin());
    if (seen[i]) throw UsageError(fmt::format("--bounds: axis '{}' given twice", parts[0]));
    seen[i] = true;
    grid.axes[i].min = parse_real(parts[1], "--bounds");
    grid.axes[i].max = parse_real(parts[2], "--bounds");
  }
  const auto counts = split(res, ',');
  if (counts.size() != 3) throw UsageError("--res: expected three comma-separated counts");
  for (std::size_t i = 0; i < 3; ++i) {
    int c = 0;
    const auto [ptr, ec] = std::from_chars(counts[i].data(), counts[i].data() + counts[i].size(), c);
    if (ec != std::errc() || ptr != counts[i].data() + counts[i].size()) {
      throw UsageError(fmt::format("--res: '{}' is not an integer", counts[i]));
    }
    grid.axes[i].count = c;
  }
  try {
    grid.validate();
  } catch (const Error& e) {
    throw UsageError(fmt::format("--bounds/--res: {}", e.what()));
  }
  return grid;
}

Real to_deg(Real rad) { return rad * 180 / kPi; }

std::string sign_str(Sign s) { return s == Sign::Plus ? "+1" : "-1"; }

// A small table rendered as aligned text, CSV or JSON lines.
using Cell = std::variant<std::string, Real, int>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void render(std::ostream& os, const Global& g) const {
    auto text = [&](const Cell& c) -> std::string {
      if (const auto* s = std::get_if<std::string>(&c)) return *s;
      if (const auto* i = std::get_if<int>(&c)) return std::to_string(*i);
      const Real v = std::get<Real>(c);
      if (std::isnan(v)) return g.format == "csv" ? "nan" : "-";
      return fmt::format("{:.{}f}", static_cast<double>(v), g.precision);
    };
    if (g.format == "json") {
      for (const auto& row : rows) {
        ordered_json j;
        for (std::size_t k = 0; k < columns.size(); ++k) {
          std::visit([&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Real>) {
              j[columns[k]] = std::isnan(v) ? ordered_json(nullptr) : ordered_json(static_cast<double>(v));
            } else {
              j[columns[k]] = v;
            }
          }, row[k]);
        }
        os << j.dump() << "\n";
      }
      return;
    }
    if (g.format == "csv") {
      for (std::size_t k = 0; k < columns.size(); ++k) os << (k ? "," : "") << columns[k];
      os << "\n";
      for (const auto& row : rows) {
        for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << text(row[k]);
        os << "\n";
      }
      return;
    }
    std::vector<std::size_t> width(columns.size());
    std::vector<std::vector<std::string>> cells;
    for (std::size_t k = 0; k < columns.size(); ++k) width[k] = columns[k].size();
    for (const auto& row : rows) {
      auto& out = cells.emplace_back();
      for (std::size_t k = 0; k < row.size(); ++k) {
        out.push_back(text(row[k]));
        width[k] = std::max(width[k], out.back().size());
      }
    }
    for (std::size_t k = 0; k < columns.size(); ++k) {
      os << (k ? "  " : "") << fmt::format("{:>{}}", columns[k], width[k]);
    }
    os << "\n";
    for (const auto& row : cells) {
      for (std::size_t k = 0; k < row.size(); ++k) {
        os << (k ? "  " : "") << fmt::format("{:>{}}", row[k], width[k]);
      }
      os << "\n";
    }
  }
};

// Angle columns: radians and degrees in text, one of them otherwise.
void add_angle_columns(Table& t, const Global& g, const std::string& name) {
  if (g.format == "text") {
    t.columns.push_back(name + "[rad]");
    t.columns.push_back(name + "[deg]");
  } else {
    t.columns.push_back(g.degrees ? name + "_deg" : name);
  }
}

void add_angle_cells(std::vector<Cell>& row, const Global& g, Real rad) {
  if (g.format == "text") {
    row.emplace_back(rad);
    row.emplace_back(std::isnan(rad) ? rad : to_deg(rad));
  } else {
    row.emplace_back(g.degrees && !std::isnan(rad) ? to_deg(rad) : rad);
  }
}

std::string fmt_real(Real v, int precision) {
  return fmt::format("{:.{}f}", static_cast<double>(v), precision);
}

void key_values(std::ostream& os, const Global& g,
                const std::vector<std::pair<std::string, Cell>>& kv) {
  if (g.format == "json") {
    ordered_json j;
    for (const auto& [k, v] : kv) {
      std::visit([&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Real>) {
          j[k] = std::isnan(x) ? ordered_json(nullptr) : ordered_json(static_cast<double>(x));
        } else {
          j[k] = x;
        }
      }, v);
    }
    os << j.dump() << "\n";
    return;
  }
  Table t{{"key", "value"}, {}};
  for (const auto& [k, v] : kv) t.rows.push_back({k, v});
  if (g.format == "csv") {
    t.render(os, g);
    return;
  }
  std::size_t w = 0;
  for (const auto& [k, _] : kv) w = std::max(w, k.size());
  for (const auto& [k, v] : kv) {
    std::string s;
    if (const auto* str = std::get_if<std::string>(&v)) s = *str;
    else if (const auto* i = std::get_if<int>(&v)) s = std::to_string(*i);
    else s = fmt::format("{:.6e}", static_cast<double>(std::get<Real>(v)));
    os << fmt::format("{:<{}}  {}\n", k, w, s);
  }
}

void require_format(const Global& g, std::initializer_list<std::string_view> allowed,
                    std::string_view command) {
  for (auto a : allowed) {
    if (g.format == a) return;
  }
  throw UsageError(fmt::format("--format {} is not supported by '{}'", g.format, command));
}

struct FkArgs {
  std::string joints;
  std::string branch;
  bool all = false;
};

int cmd_fk(const FkArgs& a, const StructuralParams& params, const Global& g, std::ostream& os,
           std::ostream& err) {
  require_format(g, {"text", "csv", "json"}, "fk");
  const ActuatedJoints joints = ActuatedJoints::from(parse_vec3(a.joints, "--joints"));
  std::vector<std::pair<Sign, Sign>> branches;
  if (a.all) {
    for (Sign m : kSigns)
      for (Sign n : kSigns) branches.emplace_back(m, n);
  } else if (!a.branch.empty()) {
    const auto s = parse_signs(a.branch, 2, "--branch");
    branches.emplace_back(s[0], s[1]);
  } else {
    branches.emplace_back(Sign::Plus, Sign::Plus);
  }

  Table t{{"m", "n", "x", "y", "z"}, {}};
  add_angle_columns(t, g, "alpha");
  add_angle_columns(t, g, "beta");
  t.columns.push_back("status");
  int feasible = 0;
  for (auto [m, n] : branches) {
    const FkSolution s = forward(joints, params, m, n);
    const Real nan = std::numeric_limits<Real>::quiet_NaN();
    std::vector<Cell> row{sign_str(m), sign_str(n), s.pose.x, s.pose.y, s.pose.z};
    add_angle_cells(row, g, s.feasible() ? s.angles.alpha.angle() : nan);
    add_angle_cells(row, g, s.feasible() ? s.angles.beta.angle() : nan);
    row.emplace_back(std::string(to_string(s.status)));
    t.rows.push_back(std::move(row));
    if (s.feasible()) {
      ++feasible;
    } else {
      err << fmt::format("branch (m,n)=({},{}): {}\n", sign_str(m), sign_str(n), to_string(s.status));
    }
  }
  t.render(os, g);
  return feasible > 0 ? kOk : kInfeasible;
}

struct IkArgs {
  std::string pose;
  std::string branch;
  bool all = false;
};

int cmd_ik(const IkArgs& a, const StructuralParams& params, const Global& g, std::ostream& os,
           std::ostream& err) {
  require_format(g, {"text", "csv", "json"}, "ik");
  const PlatformPose pose = PlatformPose::from(parse_vec3(a.pose, "--pose"));
  std::vector<IkSolution> sols;
  if (!a.branch.empty() && !a.all) {
    const auto s = parse_signs(a.branch, 4, "--branch");
    sols.push_back(inverse(pose, params, s[0], s[1], s[2], s[3]));
  } else {
    const auto all = inverse_all(pose, params);
    sols.assign(all.begin(), all.end());
  }

  Table t{{"v", "w1", "w2", "w3", "yA1", "yA2", "yA3"}, {}};
  add_angle_columns(t, g, "beta");
  t.columns.push_back("status");
  int real = 0, ordered = 0;
  for (const auto& s : sols) {
    const Real nan = std::numeric_limits<Real>::quiet_NaN();
    std::vector<Cell> row{sign_str(s.v), sign_str(s.w1), sign_str(s.w2), sign_str(s.w3),
                          s.joints.yA1, s.joints.yA2, s.joints.yA3};
    add_angle_cells(row, g, s.status == IkStatus::BetaCosOutOfRange ? nan : s.beta.angle());
    row.emplace_back(std::string(to_string(s.status)));
    t.rows.push_back(std::move(row));
    real += s.real();
    ordered += s.feasible();
  }
  t.render(os, g);
  if (g.format == "text") os << fmt::format("real: {}  with yA2 > yA1: {}\n", real, ordered);
  if (real == 0) {
    err << fmt::format("no real inverse solution: {}\n", to_string(sols.front().status));
    return kInfeasible;
  }
  return kOk;
}

struct ConfigArgs {
  std::string joints;
  std::string pose;
  std::string branch;
};

// Jacobians at a joint vector. The pose comes from the forward branch m,n, or
// is given explicitly together with the sign v of sin(beta).
JacobianPair config_jacobians(const ConfigArgs& a, const StructuralParams& params,
                              ActuatedJoints& joints, PlatformPose& pose, std::string& label) {
  joints = ActuatedJoints::from(parse_vec3(a.joints, "--joints"));
  if (!a.pose.empty()) {
    pose = PlatformPose::from(parse_vec3(a.pose, "--pose"));
    const Sign v = a.branch.empty() ? Sign::Plus : parse_signs(a.branch, 1, "--branch")[0];
    IkSolution ik;
    ik.joints = joints;
    ik.beta = inverse_beta(pose, params, v);
    ik.v = v;
    label = fmt::format("pose given, beta sign v={}", sign_str(v));
    return jacobians(pose, ik, params);
  }
  const auto s = a.branch.empty() ? std::vector<Sign>{Sign::Plus, Sign::Plus}
                                  : parse_signs(a.branch, 2, "--branch");
  const FkSolution fk = forward(joints, params, s[0], s[1]);
  if (!fk.feasible()) {
    throw Error(ErrorKind::InconsistentConfiguration,
                fmt::format("branch (m,n)=({},{}): {}", sign_str(s[0]), sign_str(s[1]),
                            to_string(fk.status)));
  }
  pose = fk.pose;
  label = fmt::format("forward branch (m,n)=({},{})", sign_str(s[0]), sign_str(s[1]));
  return jacobians(joints, fk, params);
}

void print_matrix(std::ostream& os, const std::string& name, const Mat3& M, int precision) {
  os << name << ":\n";
  for (int i = 0; i < 3; ++i) {
    os << fmt::format("  {:>14} {:>14} {:>14}\n", fmt_real(M(i, 0), precision),
                      fmt_real(M(i, 1), precision), fmt_real(M(i, 2), precision));
  }
}

int cmd_jac(const ConfigArgs& a, const StructuralParams& params, const Global& g, std::ostream& os) {
  require_format(g, {"text", "csv", "json"}, "jac");
  ActuatedJoints joints;
  PlatformPose pose;
  std::string label;
  const JacobianPair jp = config_jacobians(a, params, joints, pose, label);
  std::optional<Mat3> J;
  try {
    J = forward_jacobian(jp);
  } catch (const Error&) {
  }

  if (g.format == "text") {
    os << label << "\n";
    os << fmt::format("pose: {} {} {}\n", fmt_real(pose.x, g.precision),
                      fmt_real(pose.y, g.precision), fmt_real(pose.z, g.precision));
    print_matrix(os, "A", jp.A, g.precision);
    print_matrix(os, "B", jp.B, g.precision);
    os << fmt::format("det A: {:.6e}  normalized: {:.6e}\n", static_cast<double>(jp.detA),
                      static_cast<double>(jp.normalized_detA));
    os << fmt::format("det B: {:.6e}  normalized: {:.6e}\n", static_cast<double>(jp.detB),
                      static_cast<double>(jp.normalized_detB));
    if (J) {
      print_matrix(os, "-A^-1 B", *J, g.precision);
    } else {
      os << "-A^-1 B: undefined (parallel singular)\n";
    }
    return kOk;
  }
  std::vector<std::pair<std::string, Cell>> kv;
  auto put = [&](const std::string& name, const Mat3& M) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) kv.emplace_back(fmt::format("{}{}{}", name, i + 1, j + 1), M(i, j));
  };
  kv.emplace_back("x", pose.x);
  kv.emplace_back("y", pose.y);
  kv.emplace_back("z", pose.z);
  put("A", jp.A);
  put("B", jp.B);
  kv.emplace_back("detA", jp.detA);
  kv.emplace_back("detB", jp.detB);
  kv.emplace_back("normalized_detA", jp.normalized_detA);
  kv.emplace_back("normalized_detB", jp.normalized_detB);
  put("J", J ? *J : Mat3::Constant(std::numeric_limits<Real>::quiet_NaN()));
  key_values(os, g, kv);
  return kOk;
}

int cmd_singularity(const ConfigArgs& a, const StructuralParams& params, const Global& g,
                    std::ostream& os) {
  require_format(g, {"text", "csv", "json"}, "singularity");
  ActuatedJoints joints;
  PlatformPose pose;
  std::string label;
  const JacobianPair jp = config_jacobians(a, params, joints, pose, label);
  const SingularityReport rep = classify(jp);
  if (g.format == "text") {
    os << label << "\n";
    os << fmt::format("pose: {} {} {}\n", fmt_real(pose.x, g.precision),
                      fmt_real(pose.y, g.precision), fmt_real(pose.z, g.precision));
    os << format_report(rep);
    return kOk;
  }
  auto join = [](const auto& cases) {
    std::string s;
    for (const auto& c : cases) s += (s.empty() ? "" : ";") + std::string(to_string(c));
    return s;
  };
  key_values(os, g,
             {{"kind", std::string(to_string(rep.kind))},
              {"serial_cases", join(rep.serial_cases)},
              {"parallel_cases", join(rep.parallel_cases)},
              {"abs_detA", rep.abs_detA},
              {"abs_detB", rep.abs_detB},
              {"abs_normalized_detA", rep.abs_normalized_detA},
              {"abs_normalized_detB", rep.abs_normalized_detB}});
  return kOk;
}

struct GridArgs {
  std::vector<std::string> bounds;
  std::string res;
};

struct WorkspaceArgs {
  GridArgs grid{{"x:-150:150", "y:-200:200", "z:380:550"}, "61,81,35"};
  std::string joint_range;
  bool no_angle_limits = false;
  unsigned threads = 1;
  std::string projection_prefix;
  bool all_nodes = false;
};

std::ostream& sink(std::ostream& os, std::ofstream& file, const std::string& path) {
  if (path.empty()) return os;
  file.open(path);
  if (!file) throw Error(ErrorKind::IoFailure, fmt::format("cannot open '{}' for writing", path));
  return file;
}

std::string extension(ExportFormat f) {
  switch (f) {
    case ExportFormat::Csv: return "csv";
    case ExportFormat::JsonLines: return "jsonl";
    case ExportFormat::Ply: return "ply";
  }
  return "txt";
}

int cmd_workspace(const WorkspaceArgs& a, const StructuralParams& params, const Global& g,
                  std::ostream& os, std::ostream& err) {
  require_format(g, {"text", "csv", "json", "ply"}, "workspace");
  const GridSpec grid = parse_grid(a.grid.bounds, a.grid.res, {"x", "y", "z"});
  WorkspaceLimits limits = WorkspaceLimits::defaults(params);
  if (a.joint_range == "none") {
    limits.joint_range.reset();
  } else if (!a.joint_range.empty()) {
    const auto parts = split(a.joint_range, ':');
    if (parts.size() != 2) throw UsageError("--joint-range: expected lo:hi or none");
    limits.joint_range = std::pair{parse_real(parts[0], "--joint-range"),
                                   parse_real(parts[1], "--joint-range")};
    if (!(limits.joint_range->first < limits.joint_range->second)) {
      throw UsageError("--joint-range: need lo < hi");
    }
  }
  if (a.no_angle_limits) limits.positive_sin_alpha = limits.positive_sin_beta = false;
  if (a.threads < 1) throw UsageError("--threads: must be at least 1");

  const auto scan = scan_workspace(params, grid, limits, {a.threads});
  const auto inside = inside_points(scan);

  std::string summary = fmt::format("nodes: {}\ninside: {}\n", scan.size(), inside.size());
  if (!inside.empty()) {
    Vec3 lo = inside.front(), hi = inside.front();
    for (const auto& p : inside) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    summary += fmt::format("extent: x [{}, {}]  y [{}, {}]  z [{}, {}]\n",
                           fmt_real(lo.x(), g.precision), fmt_real(hi.x(), g.precision),
                           fmt_real(lo.y(), g.precision), fmt_real(hi.y(), g.precision),
                           fmt_real(lo.z(), g.precision), fmt_real(hi.z(), g.precision));
  }

  const int decimals = g.precision_given ? g.precision : -1;
  const ExportFormat fmt_out =
      g.format == "text" ? ExportFormat::Csv : parse_export_format(g.format);
  if (g.format == "text") {
    os << summary;
  } else {
    std::vector<WorkspacePoint> chosen;
    for (const auto& p : scan) {
      if (a.all_nodes || p.inside) chosen.push_back(p);
    }
    std::ofstream file;
    write_points(sink(os, file, g.out_path), chosen, fmt_out, decimals);
    err << summary;
  }

  if (!a.projection_prefix.empty()) {
    for (Plane plane : {Plane::YZ, Plane::XZ}) {
      const std::string path =
          fmt::format("{}_{}.{}", a.projection_prefix, to_string(plane), extension(fmt_out));
      std::ofstream file(path);
      if (!file) throw Error(ErrorKind::IoFailure, fmt::format("cannot open '{}'", path));
      write_projection(file, project(inside, plane), plane, fmt_out, decimals);
    }
  }
  return kOk;
}

struct SurfaceArgs {
  std::string kind = "serial";
  std::string space = "jointspace";
  GridArgs grid;
  std::string branch;
};

int cmd_surface(const SurfaceArgs& a, const StructuralParams& params, const Global& g,
                std::ostream& os, std::ostream& err) {
  require_format(g, {"text", "csv", "json", "ply"}, "surface");
  const SurfaceKind kind = a.kind == "serial" ? SurfaceKind::Serial : SurfaceKind::Parallel;
  const SurfaceSpace space =
      a.space == "jointspace" ? SurfaceSpace::Jointspace : SurfaceSpace::Workspace;
  GridArgs grid_args = a.grid;
  if (grid_args.bounds.empty()) {
    grid_args.bounds = space == SurfaceSpace::Jointspace
                           ? std::vector<std::string>{"yA1:-180:180", "yA2:-180:180", "yA3:-180:180"}
                           : std::vector<std::string>{"x:-150:150", "y:-200:200", "z:380:550"};
  }
  if (grid_args.res.empty()) {
    grid_args.res = space == SurfaceSpace::Jointspace ? "25,25,25" : "61,81,35";
  }
  const GridSpec grid = parse_grid(grid_args.bounds, grid_args.res,
                                   space == SurfaceSpace::Jointspace
                                       ? std::array<std::string_view, 3>{"yA1", "yA2", "yA3"}
                                       : std::array<std::string_view, 3>{"x", "y", "z"});
  SurfaceOptions opt;
  if (!a.branch.empty()) {
    if (space == SurfaceSpace::Jointspace) {
      const auto s = parse_signs(a.branch, 2, "--branch");
      opt.m = s[0];
      opt.n = s[1];
    } else {
      const auto s = parse_signs(a.branch, 4, "--branch");
      opt.v = s[0];
      opt.w1 = s[1];
      opt.w2 = s[2];
      opt.w3 = s[3];
    }
  }
  const SurfacePatch patch = singular_surface(params, grid, kind, space, opt);
  const std::string summary =
      fmt::format("kind: {}\nspace: {}\nnodes: {}\nskipped: {}\ncrossings: {}\npoints: {}\nrejected: {}\n",
                  to_string(kind), to_string(space), grid.size(), patch.skipped_nodes,
                  patch.crossings, patch.points.size(), patch.rejected_crossings);
  if (g.format == "text") {
    os << summary;
    return kOk;
  }
  std::ofstream file;
  write_patch(sink(os, file, g.out_path), patch, parse_export_format(g.format),
              g.precision_given ? g.precision : -1);
  err << summary;
  return kOk;
}

int cmd_topology(const Global& g, std::ostream& os) {
  require_format(g, {"text", "csv", "json"}, "topology");
  const topology::TopologyReport r = topology::analyze(topology::tpm_mechanism());
  if (g.format == "text") {
    os << topology::format_report(r);
    return kOk;
  }
  auto ints = [](const std::vector<int>& v) {
    std::string s;
    for (int x : v) s += (s.empty() ? "" : ";") + std::to_string(x);
    return s;
  };
  if (g.format == "json") {
    ordered_json j;
    j["xi"] = r.xi_per_loop;
    j["F"] = r.F;
    j["delta"] = r.delta_per_loop;
    j["kappa"] = r.kappa;
    j["poc_platform"] = topology::describe(r.poc_platform);
    j["poc_limb_a"] = topology::describe(r.poc_limb_a);
    j["poc_limb_b"] = topology::describe(r.poc_limb_b);
    os << j.dump() << "\n";
    return kOk;
  }
  key_values(os, g,
             {{"xi", ints(r.xi_per_loop)},
              {"F", r.F},
              {"delta", ints(r.delta_per_loop)},
              {"kappa", r.kappa},
              {"poc_platform", topology::describe(r.poc_platform)},
              {"poc_limb_a", topology::describe(r.poc_limb_a)},
              {"poc_limb_b", topology::describe(r.poc_limb_b)}});
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kinematics of a 3-DOF translational parallel manipulator", "tpm"};
  app.require_subcommand(1);
  app.fallthrough();

  Global g;
  app.add_option("--params", g.params_path, "JSON file with link lengths (default: prototype)");
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"text", "csv", "json", "ply"}));
  app.add_option("--out", g.out_path, "Write data to this file instead of stdout");
  app.add_flag("--degrees", g.degrees, "Angles in degrees (csv/json)");
  auto* precision = app.add_option("--precision", g.precision, "Decimal places")
                        ->check(CLI::Range(0, 17));

  FkArgs fk;
  auto* fk_cmd = app.add_subcommand("fk", "Forward kinematics");
  fk_cmd->add_option("--joints", fk.joints, "yA1,yA2,yA3")->required();
  auto* fk_branch = fk_cmd->add_option("--branch", fk.branch, "m,n");
  fk_cmd->add_flag("--all", fk.all, "All four branches")->excludes(fk_branch);

  IkArgs ik;
  auto* ik_cmd = app.add_subcommand("ik", "Inverse kinematics (all 16 branches by default)");
  ik_cmd->add_option("--pose", ik.pose, "x,y,z")->required();
  auto* ik_branch = ik_cmd->add_option("--branch", ik.branch, "v,w1,w2,w3");
  ik_cmd->add_flag("--all", ik.all, "All sixteen branches")->excludes(ik_branch);

  ConfigArgs jac;
  auto* jac_cmd = app.add_subcommand("jac", "Jacobians A, B and -A^-1 B");
  jac_cmd->add_option("--joints", jac.joints, "yA1,yA2,yA3")->required();
  jac_cmd->add_option("--pose", jac.pose, "x,y,z (default: from the forward branch)");
  jac_cmd->add_option("--branch", jac.branch, "m,n, or v when --pose is given");

  ConfigArgs sing;
  auto* sing_cmd = app.add_subcommand("singularity", "Classify a configuration");
  sing_cmd->add_option("--joints", sing.joints, "yA1,yA2,yA3")->required();
  sing_cmd->add_option("--pose", sing.pose, "x,y,z (default: from the forward branch)");
  sing_cmd->add_option("--branch", sing.branch, "m,n, or v when --pose is given");

  WorkspaceArgs ws;
  auto* ws_cmd = app.add_subcommand("workspace", "Discrete workspace scan");
  ws_cmd->add_option("--bounds", ws.grid.bounds, "x:min:max y:min:max z:min:max")->expected(3);
  ws_cmd->add_option("--res", ws.grid.res, "Nodes per axis, e.g. 61,81,35");
  ws_cmd->add_option("--joint-range", ws.joint_range, "lo:hi for every rail, or none (default +-a/2)");
  ws_cmd->add_flag("--no-angle-limits", ws.no_angle_limits, "Allow any alpha, beta");
  ws_cmd->add_option("--threads", ws.threads, "Worker threads");
  ws_cmd->add_option("--projection-prefix", ws.projection_prefix,
                     "Also write PREFIX_yz and PREFIX_xz projections");
  ws_cmd->add_flag("--all-nodes", ws.all_nodes, "Export outside nodes too");

  SurfaceArgs sf;
  auto* sf_cmd = app.add_subcommand("surface", "Sample a singular surface");
  sf_cmd->add_option("--kind", sf.kind)->check(CLI::IsMember({"serial", "parallel"}));
  sf_cmd->add_option("--space", sf.space)->check(CLI::IsMember({"workspace", "jointspace"}));
  sf_cmd->add_option("--bounds", sf.grid.bounds, "name:min:max per axis")->expected(3);
  sf_cmd->add_option("--res", sf.grid.res, "Nodes per axis");
  sf_cmd->add_option("--branch", sf.branch, "m,n (jointspace) or v,w1,w2,w3 (workspace)");

  auto* topo_cmd = app.add_subcommand("topology", "Topological characteristics");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* shown = &app;
    for (auto* sub : app.get_subcommands()) shown = sub;
    err << shown->help();
    return kUsage;
  }
  g.precision_given = precision->count() > 0;

  try {
    const StructuralParams params =
        g.params_path.empty() ? StructuralParams{} : load_params_file(g.params_path);

    std::ostringstream buffer;
    int code = kOk;
    // Data-producing commands stream into --out themselves.
    const bool streams_itself =
        (ws_cmd->parsed() || sf_cmd->parsed()) && g.format != "text";
    std::ostream& os = streams_itself ? out : static_cast<std::ostream&>(buffer);
    if (fk_cmd->parsed()) code = cmd_fk(fk, params, g, os, err);
    else if (ik_cmd->parsed()) code = cmd_ik(ik, params, g, os, err);
    else if (jac_cmd->parsed()) code = cmd_jac(jac, params, g, os);
    else if (sing_cmd->parsed()) code = cmd_singularity(sing, params, g, os);
    else if (ws_cmd->parsed()) code = cmd_workspace(ws, params, g, os, err);
    else if (sf_cmd->parsed()) code = cmd_surface(sf, params, g, os, err);
    else if (topo_cmd->parsed()) code = cmd_topology(g, os);

    if (!streams_itself) {
      std::ofstream file;
      std::ostream& dest = sink(out, file, g.out_path);
      dest << buffer.str();
      if (!dest) throw Error(ErrorKind::IoFailure, "write failed");
    }
    return code;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::InvalidParams:
      case ErrorKind::InvalidGrid:
      case ErrorKind::IoFailure: return kUsage;
      default: return kInfeasible;
    }
  }
}

}  // namespace tpm::cli
