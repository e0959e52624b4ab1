#include "tacopt/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "tacopt/geometry.hpp"

namespace tacopt {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void unknown_key(const std::string& path, const std::string& key) {
  throw ParseError("unknown key '" + key + "' in " + (path.empty() ? "scenario" : path),
                   path.empty() ? key : path + "." + key);
}

void expect_keys(const Json& obj, const std::string& path,
                 std::initializer_list<const char*> keys) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : keys)
      if (item.key() == k) { known = true; break; }
    if (!known) unknown_key(path, item.key());
  }
}

[[noreturn]] void bad_value(const std::string& field, const std::string& why) {
  throw ValidationError(field + ": " + why, field);
}

const Json* find(const Json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double as_number(const Json& j, const std::string& field) {
  if (!j.is_number()) bad_value(field, "expected a number");
  return j.get<double>();
}

int as_integer(const Json& j, const std::string& field) {
  if (!j.is_number_integer()) bad_value(field, "expected an integer");
  return j.get<int>();
}

bool as_boolean(const Json& j, const std::string& field) {
  if (!j.is_boolean()) bad_value(field, "expected a boolean");
  return j.get<bool>();
}

std::string as_string(const Json& j, const std::string& field) {
  if (!j.is_string()) bad_value(field, "expected a string");
  return j.get<std::string>();
}

Vec as_vector(const Json& j, const std::string& field) {
  if (!j.is_array()) bad_value(field, "expected an array of numbers");
  Vec out(j.size());
  for (size_t i = 0; i < j.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = as_number(j[i], field);
  return out;
}

Mat as_matrix(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) bad_value(field, "expected an array of rows");
  const size_t rows = j.size();
  Vec first = as_vector(j[0], field);
  Mat out(rows, first.size());
  out.row(0) = first;
  for (size_t i = 1; i < rows; ++i) {
    Vec row = as_vector(j[i], field);
    if (row.size() != first.size()) bad_value(field, "ragged rows");
    out.row(static_cast<Eigen::Index>(i)) = row;
  }
  return out;
}

void check_unit_field(const Vec& v, const std::string& field) {
  if (std::abs(v.norm() - 1.0) > 1e-9) bad_value(field, "must be a unit vector");
}

Json vec_to_json(const Vec& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Json mat_to_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_to_json(m.row(i)));
  return rows;
}

Mat yaw_rotation(int dim, double yaw) {
  if (dim == 2) {
    Mat r(2, 2);
    r << std::cos(yaw), -std::sin(yaw), std::sin(yaw), std::cos(yaw);
    return r;
  }
  return Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
}

void validate_scenario(const Scenario& s) {
  if (s.chain_preset != "planar3" && s.chain_preset != "spatial7" &&
      s.chain_preset != "custom-planar")
    bad_value("chain.preset", "must be planar3, spatial7 or custom-planar");
  if (s.chain_preset == "custom-planar" && s.link_lengths.empty())
    bad_value("chain.link_lengths_m", "custom-planar needs link lengths");
  if (s.chain_preset != "custom-planar" && !s.link_lengths.empty())
    bad_value("chain.link_lengths_m", "only valid with the custom-planar preset");
  for (double l : s.link_lengths)
    if (l <= 0.0) bad_value("chain.link_lengths_m", "lengths must be positive");

  KinematicChain chain = make_chain(s);
  const int d = chain.dof();
  const int w = chain.workspace_dim();

  if (s.horizon < 1) bad_value("horizon_steps", "must be at least 1");
  if (s.dt <= 0.0) bad_value("dt_s", "must be positive");
  if (s.grasp_step < 1 || s.grasp_step > s.horizon)
    bad_value("grasp_step", "must lie in [1, horizon_steps]");
  if (s.q0.size() != d) bad_value("initial_q_rad", "size must match the arm's dof");
  if (!s.q0.allFinite()) bad_value("initial_q_rad", "must be finite");

  if (s.u_lower.size() != d || s.u_upper.size() != d)
    bad_value("control_bounds_rad_per_s", "bounds must match the arm's dof");
  if (!(s.u_lower.array() <= s.u_upper.array()).all())
    bad_value("control_bounds_rad_per_s", "lower must not exceed upper");

  if (s.grip_box) {
    const auto& box = *s.grip_box;
    if (box.center.size() != w || box.half_extents.size() != w ||
        box.rotation.rows() != w || box.rotation.cols() != w)
      bad_value("grip_box", "dimensions must match the workspace");
    if (!(box.half_extents.array() > 0.0).all())
      bad_value("grip_box.half_extents_m", "must be positive");
    Mat err = box.rotation.transpose() * box.rotation - Mat::Identity(w, w);
    if (err.cwiseAbs().maxCoeff() > 1e-9)
      bad_value("grip_box.rotation_rows", "must be orthonormal");
  }
  if (s.tool) {
    if (s.tool->head_position.size() != w)
      bad_value("tool.head_position_m", "size must match the workspace");
    if (s.tool->head_axis.size() != w)
      bad_value("tool.head_axis", "size must match the workspace");
    check_unit_field(s.tool->head_axis, "tool.head_axis");
  }

  auto check_target = [&](const std::optional<Vec>& v, const char* field, bool unit) {
    if (!v) return;
    if (v->size() != w) bad_value(field, "size must match the workspace");
    if (unit) check_unit_field(*v, field);
  };
  check_target(s.final_position, "targets.final_position_m", false);
  check_target(s.hit_direction, "targets.hit_direction", true);
  check_target(s.handle_axis, "targets.handle_axis", true);
  check_target(s.manip_direction, "targets.manip_direction", true);
  check_target(s.ellipsoid_direction, "targets.ellipsoid.direction", true);
  if (s.ellipsoid_major <= 0.0 || s.ellipsoid_minor <= 0.0)
    bad_value("targets.ellipsoid", "axis lengths must be positive");

  for (auto [wgt, nm] : {std::pair<double, const char*>{s.w_position, "weights.position"},
                         {s.w_orientation, "weights.orientation"},
                         {s.w_direction, "weights.direction"},
                         {s.w_manip, "weights.manipulability"},
                         {s.w_joint_limit, "weights.joint_limit"},
                         {s.w_control, "weights.control"}})
    if (wgt < 0.0) bad_value(nm, "must be nonnegative");

  if (s.manip_mode != "none" && s.manip_mode != "directional" &&
      s.manip_mode != "determinant" && s.manip_mode != "tracking")
    bad_value("manip_mode", "must be none, directional, determinant or tracking");
  if (s.manip_mode == "directional" && !s.manip_direction && !s.hit_direction)
    bad_value("manip_mode", "directional mode needs targets.manip_direction or "
                            "targets.hit_direction");
  if (s.manip_mode == "tracking" && !s.ellipsoid_direction)
    bad_value("manip_mode", "tracking mode needs targets.ellipsoid");

  const auto& sp = s.solver;
  if (sp.max_outer < 1) bad_value("solver.max_outer", "must be at least 1");
  if (sp.max_inner < 1) bad_value("solver.max_inner", "must be at least 1");
  if (sp.c_max <= 0.0) bad_value("solver.c_max", "must be positive");
  if (sp.primal_tol <= 0.0) bad_value("solver.primal_tol", "must be positive");
  if (sp.dual_tol <= 0.0) bad_value("solver.dual_tol", "must be positive");
  if (sp.alpha_min <= 0.0 || sp.alpha_min >= 1.0)
    bad_value("solver.alpha_min", "must lie in (0, 1)");
  if (sp.ilqr.q_r <= 0.0) bad_value("solver.q_r", "must be positive");
  if (sp.ilqr.r_r < 0.0) bad_value("solver.r_r", "must be nonnegative");

  if (s.randomize) {
    const auto& rz = *s.randomize;
    if (!s.grip_box) bad_value("randomize", "requires grip_box");
    if (!s.final_position) bad_value("randomize", "requires targets.final_position_m");
    if (rz.scene_angle_low > rz.scene_angle_high)
      bad_value("randomize.scene_angle_low_rad", "low must not exceed high");
    if (rz.box_slide_low > rz.box_slide_high)
      bad_value("randomize.box_slide_low_m", "low must not exceed high");
    if (rz.target_radius_low > rz.target_radius_high)
      bad_value("randomize.target_radius_low_m", "low must not exceed high");
    if (rz.target_radius_low <= 0.0)
      bad_value("randomize.target_radius_low_m", "radius must be positive");
    if (rz.target_angle_jitter < 0.0)
      bad_value("randomize.target_angle_jitter_rad", "jitter must be nonnegative");
    if (rz.min_base_distance < 0.0 || rz.reach_margin < 0.0 || rz.min_separation < 0.0)
      bad_value("randomize.min_base_distance_m", "distances must be nonnegative");
  }
}

Scenario scenario_from_json(const Json& root) {
  if (!root.is_object()) throw ParseError("scenario root must be an object", "");
  expect_keys(root, "", {"name", "chain", "horizon_steps", "dt_s", "grasp_step",
                         "initial_q_rad", "control_bounds_rad_per_s", "grip_box", "tool",
                         "targets", "weights", "manip_mode", "solver", "randomize"});
  Scenario s;
  if (const Json* j = find(root, "name")) s.name = as_string(*j, "name");

  if (const Json* j = find(root, "chain")) {
    expect_keys(*j, "chain", {"preset", "link_lengths_m"});
    if (const Json* p = find(*j, "preset")) s.chain_preset = as_string(*p, "chain.preset");
    if (const Json* p = find(*j, "link_lengths_m")) {
      Vec lengths = as_vector(*p, "chain.link_lengths_m");
      s.link_lengths.assign(lengths.begin(), lengths.end());
    }
  }

  if (const Json* j = find(root, "horizon_steps")) s.horizon = as_integer(*j, "horizon_steps");
  if (const Json* j = find(root, "dt_s")) s.dt = as_number(*j, "dt_s");
  if (const Json* j = find(root, "grasp_step")) s.grasp_step = as_integer(*j, "grasp_step");
  if (const Json* j = find(root, "initial_q_rad")) s.q0 = as_vector(*j, "initial_q_rad");

  if (const Json* j = find(root, "control_bounds_rad_per_s")) {
    expect_keys(*j, "control_bounds_rad_per_s", {"lower", "upper"});
    if (const Json* p = find(*j, "lower"))
      s.u_lower = as_vector(*p, "control_bounds_rad_per_s.lower");
    if (const Json* p = find(*j, "upper"))
      s.u_upper = as_vector(*p, "control_bounds_rad_per_s.upper");
  }

  if (const Json* j = find(root, "grip_box")) {
    expect_keys(*j, "grip_box", {"center_m", "yaw_rad", "rotation_rows", "half_extents_m"});
    OrientedBox box;
    if (const Json* p = find(*j, "center_m")) box.center = as_vector(*p, "grip_box.center_m");
    if (const Json* p = find(*j, "half_extents_m"))
      box.half_extents = as_vector(*p, "grip_box.half_extents_m");
    const Json* yaw = find(*j, "yaw_rad");
    const Json* rows = find(*j, "rotation_rows");
    if (yaw && rows)
      throw ParseError("grip_box: yaw_rad and rotation_rows are mutually exclusive",
                       "grip_box.yaw_rad");
    if (rows) box.rotation = as_matrix(*rows, "grip_box.rotation_rows");
    else if (yaw)
      box.rotation = yaw_rotation(static_cast<int>(box.center.size()),
                                  as_number(*yaw, "grip_box.yaw_rad"));
    else
      box.rotation = Mat::Identity(box.center.size(), box.center.size());
    s.grip_box = std::move(box);
  }

  if (const Json* j = find(root, "tool")) {
    expect_keys(*j, "tool", {"head_position_m", "head_axis"});
    ToolSpec tool;
    if (const Json* p = find(*j, "head_position_m"))
      tool.head_position = as_vector(*p, "tool.head_position_m");
    if (const Json* p = find(*j, "head_axis")) tool.head_axis = as_vector(*p, "tool.head_axis");
    s.tool = std::move(tool);
  }

  if (const Json* j = find(root, "targets")) {
    expect_keys(*j, "targets", {"final_position_m", "hit_direction", "handle_axis",
                                "manip_direction", "ellipsoid"});
    if (const Json* p = find(*j, "final_position_m"))
      s.final_position = as_vector(*p, "targets.final_position_m");
    if (const Json* p = find(*j, "hit_direction"))
      s.hit_direction = as_vector(*p, "targets.hit_direction");
    if (const Json* p = find(*j, "handle_axis"))
      s.handle_axis = as_vector(*p, "targets.handle_axis");
    if (const Json* p = find(*j, "manip_direction"))
      s.manip_direction = as_vector(*p, "targets.manip_direction");
    if (const Json* p = find(*j, "ellipsoid")) {
      expect_keys(*p, "targets.ellipsoid", {"direction", "major_m_per_s", "minor_m_per_s"});
      if (const Json* q = find(*p, "direction"))
        s.ellipsoid_direction = as_vector(*q, "targets.ellipsoid.direction");
      if (const Json* q = find(*p, "major_m_per_s"))
        s.ellipsoid_major = as_number(*q, "targets.ellipsoid.major_m_per_s");
      if (const Json* q = find(*p, "minor_m_per_s"))
        s.ellipsoid_minor = as_number(*q, "targets.ellipsoid.minor_m_per_s");
    }
  }

  if (const Json* j = find(root, "weights")) {
    expect_keys(*j, "weights", {"position", "orientation", "direction", "manipulability",
                                "joint_limit", "control"});
    if (const Json* p = find(*j, "position")) s.w_position = as_number(*p, "weights.position");
    if (const Json* p = find(*j, "orientation"))
      s.w_orientation = as_number(*p, "weights.orientation");
    if (const Json* p = find(*j, "direction")) s.w_direction = as_number(*p, "weights.direction");
    if (const Json* p = find(*j, "manipulability"))
      s.w_manip = as_number(*p, "weights.manipulability");
    if (const Json* p = find(*j, "joint_limit"))
      s.w_joint_limit = as_number(*p, "weights.joint_limit");
    if (const Json* p = find(*j, "control")) s.w_control = as_number(*p, "weights.control");
  }

  if (const Json* j = find(root, "manip_mode")) s.manip_mode = as_string(*j, "manip_mode");

  if (const Json* j = find(root, "solver")) {
    expect_keys(*j, "solver", {"max_outer", "max_inner", "c_max", "primal_tol", "dual_tol",
                               "alpha_min", "q_r", "r_r", "exact_control_offset"});
    if (const Json* p = find(*j, "max_outer")) s.solver.max_outer = as_integer(*p, "solver.max_outer");
    if (const Json* p = find(*j, "max_inner")) s.solver.max_inner = as_integer(*p, "solver.max_inner");
    if (const Json* p = find(*j, "c_max")) s.solver.c_max = as_number(*p, "solver.c_max");
    if (const Json* p = find(*j, "primal_tol")) s.solver.primal_tol = as_number(*p, "solver.primal_tol");
    if (const Json* p = find(*j, "dual_tol")) s.solver.dual_tol = as_number(*p, "solver.dual_tol");
    if (const Json* p = find(*j, "alpha_min")) s.solver.alpha_min = as_number(*p, "solver.alpha_min");
    if (const Json* p = find(*j, "q_r")) s.solver.ilqr.q_r = as_number(*p, "solver.q_r");
    if (const Json* p = find(*j, "r_r")) s.solver.ilqr.r_r = as_number(*p, "solver.r_r");
    if (const Json* p = find(*j, "exact_control_offset"))
      s.solver.ilqr.exact_control_offset = as_boolean(*p, "solver.exact_control_offset");
  }

  if (const Json* j = find(root, "randomize")) {
    expect_keys(*j, "randomize",
                {"scene_angle_low_rad", "scene_angle_high_rad", "box_slide_low_m",
                 "box_slide_high_m", "target_radius_low_m", "target_radius_high_m",
                 "target_angle_jitter_rad", "min_base_distance_m", "reach_margin_m",
                 "min_separation_m"});
    RandomizeSpec rz;
    if (const Json* p = find(*j, "scene_angle_low_rad"))
      rz.scene_angle_low = as_number(*p, "randomize.scene_angle_low_rad");
    if (const Json* p = find(*j, "scene_angle_high_rad"))
      rz.scene_angle_high = as_number(*p, "randomize.scene_angle_high_rad");
    if (const Json* p = find(*j, "box_slide_low_m"))
      rz.box_slide_low = as_number(*p, "randomize.box_slide_low_m");
    if (const Json* p = find(*j, "box_slide_high_m"))
      rz.box_slide_high = as_number(*p, "randomize.box_slide_high_m");
    if (const Json* p = find(*j, "target_radius_low_m"))
      rz.target_radius_low = as_number(*p, "randomize.target_radius_low_m");
    if (const Json* p = find(*j, "target_radius_high_m"))
      rz.target_radius_high = as_number(*p, "randomize.target_radius_high_m");
    if (const Json* p = find(*j, "target_angle_jitter_rad"))
      rz.target_angle_jitter = as_number(*p, "randomize.target_angle_jitter_rad");
    if (const Json* p = find(*j, "min_base_distance_m"))
      rz.min_base_distance = as_number(*p, "randomize.min_base_distance_m");
    if (const Json* p = find(*j, "reach_margin_m"))
      rz.reach_margin = as_number(*p, "randomize.reach_margin_m");
    if (const Json* p = find(*j, "min_separation_m"))
      rz.min_separation = as_number(*p, "randomize.min_separation_m");
    s.randomize = std::move(rz);
  }

  validate_scenario(s);
  return s;
}

}  // namespace

KinematicChain make_chain(const Scenario& scenario) {
  if (scenario.chain_preset == "planar3")
    return KinematicChain::planar({1.0, 1.0, 1.0});
  if (scenario.chain_preset == "spatial7") return KinematicChain::panda();
  if (scenario.chain_preset == "custom-planar")
    return KinematicChain::planar(scenario.link_lengths);
  bad_value("chain.preset", "must be planar3, spatial7 or custom-planar");
}

Problem to_problem(const Scenario& s) {
  validate_scenario(s);
  Problem pb(make_chain(s));
  const int w = pb.arm.workspace_dim();
  pb.tool = s.tool;
  pb.q0 = s.q0;
  pb.dt = s.dt;
  pb.horizon = s.horizon;
  pb.grasp_step = s.grasp_step;
  pb.params = s.solver;
  pb.params.ilqr.r_control = s.w_control;

  pb.constraints.u_lower = s.u_lower;
  pb.constraints.u_upper = s.u_upper;
  if (s.grip_box) {
    pb.constraints.grip_box = s.grip_box;
    pb.constraints.grip_box_steps = {s.grasp_step};
  }

  Vec pointing = Vec::Zero(w);
  pointing[0] = 1.0;  // the tool head frame carries its axis as local x

  if (s.final_position && s.w_position > 0.0) {
    CostTerm term;
    term.kind = CostKind::Position;
    term.weight = s.w_position;
    term.schedule = Schedule::at(s.horizon);
    term.use_tool = true;
    term.target = *s.final_position;
    pb.terms.push_back(std::move(term));
  }
  if (s.handle_axis && s.w_orientation > 0.0) {
    CostTerm term;
    term.kind = CostKind::Orientation;
    term.weight = s.w_orientation;
    term.schedule = Schedule::at(s.grasp_step);
    term.axis = *s.handle_axis;
    pb.terms.push_back(std::move(term));
  }
  if (s.hit_direction && s.w_direction > 0.0) {
    CostTerm term;
    term.kind = CostKind::Direction;
    term.weight = s.w_direction;
    term.schedule = Schedule::at(s.horizon);
    term.use_tool = true;
    term.axis = *s.hit_direction;
    term.local_axis = pointing;
    pb.terms.push_back(std::move(term));
  }
  if (s.w_joint_limit > 0.0) {
    CostTerm term;
    term.kind = CostKind::JointLimit;
    term.weight = s.w_joint_limit;
    term.schedule = Schedule::always();
    pb.terms.push_back(std::move(term));
  }

  std::optional<Vec> probe = s.manip_direction ? s.manip_direction : s.hit_direction;
  if (s.manip_mode == "directional" && s.w_manip > 0.0) {
    CostTerm term;
    term.kind = CostKind::ManipDirectional;
    term.weight = s.w_manip;
    term.schedule = Schedule::at(s.horizon);
    term.use_tool = true;
    term.axis = *probe;
    pb.terms.push_back(std::move(term));
  } else if (s.manip_mode == "determinant" && s.w_manip > 0.0) {
    CostTerm term;
    term.kind = CostKind::ManipDeterminant;
    term.weight = s.w_manip;
    term.schedule = Schedule::at(s.horizon);
    term.use_tool = true;
    pb.terms.push_back(std::move(term));
  } else if (s.manip_mode == "tracking" && s.w_manip > 0.0) {
    CostTerm term;
    term.kind = CostKind::ManipTracking;
    term.weight = s.w_manip;
    term.schedule = Schedule::at(s.horizon);
    term.use_tool = true;
    term.desired =
        make_desired_ellipsoid(*s.ellipsoid_direction, s.ellipsoid_major, s.ellipsoid_minor);
    pb.terms.push_back(std::move(term));
  }
  pb.manip_direction = probe;
  return pb;
}

Scenario parse_scenario(const std::string& json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    size_t line = 1;
    for (size_t i = 0; i + 1 < e.byte && i < json_text.size(); ++i)
      if (json_text[i] == '\n') ++line;
    throw ParseError("scenario JSON malformed at line " + std::to_string(line) + ": " +
                         e.what(),
                     "");
  }
  return scenario_from_json(root);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open scenario file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string serialize_scenario(const Scenario& s) {
  Json root;
  root["name"] = s.name;
  Json chain;
  chain["preset"] = s.chain_preset;
  if (!s.link_lengths.empty()) chain["link_lengths_m"] = s.link_lengths;
  root["chain"] = std::move(chain);
  root["horizon_steps"] = s.horizon;
  root["dt_s"] = s.dt;
  root["grasp_step"] = s.grasp_step;
  root["initial_q_rad"] = vec_to_json(s.q0);
  root["control_bounds_rad_per_s"] = Json{{"lower", vec_to_json(s.u_lower)},
                                          {"upper", vec_to_json(s.u_upper)}};
  if (s.grip_box) {
    Json box;
    box["center_m"] = vec_to_json(s.grip_box->center);
    box["rotation_rows"] = mat_to_json(s.grip_box->rotation);
    box["half_extents_m"] = vec_to_json(s.grip_box->half_extents);
    root["grip_box"] = std::move(box);
  }
  if (s.tool) {
    Json tool;
    tool["head_position_m"] = vec_to_json(s.tool->head_position);
    tool["head_axis"] = vec_to_json(s.tool->head_axis);
    root["tool"] = std::move(tool);
  }
  Json targets = Json::object();
  if (s.final_position) targets["final_position_m"] = vec_to_json(*s.final_position);
  if (s.hit_direction) targets["hit_direction"] = vec_to_json(*s.hit_direction);
  if (s.handle_axis) targets["handle_axis"] = vec_to_json(*s.handle_axis);
  if (s.manip_direction) targets["manip_direction"] = vec_to_json(*s.manip_direction);
  if (s.ellipsoid_direction) {
    targets["ellipsoid"] = Json{{"direction", vec_to_json(*s.ellipsoid_direction)},
                                {"major_m_per_s", s.ellipsoid_major},
                                {"minor_m_per_s", s.ellipsoid_minor}};
  }
  if (!targets.empty()) root["targets"] = std::move(targets);
  root["weights"] = Json{{"position", s.w_position},
                         {"orientation", s.w_orientation},
                         {"direction", s.w_direction},
                         {"manipulability", s.w_manip},
                         {"joint_limit", s.w_joint_limit},
                         {"control", s.w_control}};
  root["manip_mode"] = s.manip_mode;
  root["solver"] = Json{{"max_outer", s.solver.max_outer},
                        {"max_inner", s.solver.max_inner},
                        {"c_max", s.solver.c_max},
                        {"primal_tol", s.solver.primal_tol},
                        {"dual_tol", s.solver.dual_tol},
                        {"alpha_min", s.solver.alpha_min},
                        {"q_r", s.solver.ilqr.q_r},
                        {"r_r", s.solver.ilqr.r_r},
                        {"exact_control_offset", s.solver.ilqr.exact_control_offset}};
  if (s.randomize) {
    const auto& rz = *s.randomize;
    root["randomize"] = Json{{"scene_angle_low_rad", rz.scene_angle_low},
                             {"scene_angle_high_rad", rz.scene_angle_high},
                             {"box_slide_low_m", rz.box_slide_low},
                             {"box_slide_high_m", rz.box_slide_high},
                             {"target_radius_low_m", rz.target_radius_low},
                             {"target_radius_high_m", rz.target_radius_high},
                             {"target_angle_jitter_rad", rz.target_angle_jitter},
                             {"min_base_distance_m", rz.min_base_distance},
                             {"reach_margin_m", rz.reach_margin},
                             {"min_separation_m", rz.min_separation}};
  }
  return root.dump(2) + "\n";
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write scenario file: " + path);
    out << serialize_scenario(scenario);
  }
  std::filesystem::rename(tmp, path);
}

bool operator==(const Scenario& a, const Scenario& b) {
  return serialize_scenario(a) == serialize_scenario(b);
}

Scenario randomize_targets(const Scenario& scenario, std::uint64_t seed) {
  if (!scenario.randomize) return scenario;
  const auto& rz = *scenario.randomize;
  Scenario out = scenario;
  KinematicChain chain = make_chain(scenario);
  const int w = chain.workspace_dim();
  const double reach = chain.reach();

  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  const OrientedBox& box0 = *scenario.grip_box;
  const Vec axis0 = box0.rotation.col(0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double phi = uniform(rz.scene_angle_low, rz.scene_angle_high);
    const double slide = uniform(rz.box_slide_low, rz.box_slide_high);
    const double radius = uniform(rz.target_radius_low, rz.target_radius_high);
    const double jitter = uniform(-rz.target_angle_jitter, rz.target_angle_jitter);

    const Mat rot = yaw_rotation(w, phi);
    const Vec center = rot * (box0.center + slide * axis0);
    const Vec target =
        radius * (yaw_rotation(w, phi + jitter) * scenario.final_position->normalized());
    const Vec head = out.tool ? Vec(rot * (scenario.tool->head_position + slide * axis0))
                              : Vec(Vec::Zero(w));

    if (center.norm() + box0.half_extents.norm() > reach - rz.reach_margin) continue;
    if (center.norm() - box0.half_extents.norm() < rz.min_base_distance) continue;
    if (target.norm() < rz.min_base_distance) continue;
    if (target.norm() > reach - rz.reach_margin) continue;
    if (out.tool && (target - head).norm() < rz.min_separation) continue;

    out.grip_box->center = center;
    out.grip_box->rotation = rot * box0.rotation;
    if (out.handle_axis) out.handle_axis = rot * (*scenario.handle_axis);
    if (out.hit_direction) out.hit_direction = rot * (*scenario.hit_direction);
    if (out.manip_direction) out.manip_direction = rot * (*scenario.manip_direction);
    if (out.ellipsoid_direction) out.ellipsoid_direction = rot * (*scenario.ellipsoid_direction);
    if (out.tool) {
      out.tool->head_position = head;
      out.tool->head_axis = rot * scenario.tool->head_axis;
    }
    out.final_position = target;
    out.q0[0] += phi;  // joint 0 spins about z, so the start posture tracks the scene
    return out;
  }
  throw ValidationError("randomize: no reachable placement found in 1000 attempts",
                        "randomize");
}

namespace {

Scenario base_planar_tool_scenario() {
  Scenario s;
  s.chain_preset = "planar3";
  s.horizon = 100;
  s.dt = 0.01;
  s.grasp_step = 50;
  s.q0 = Vec(3);
  s.q0 << 2.42, -1.866, -1.925;  // arched over the handle, backed off the grasp pose
  s.u_lower = Vec::Constant(3, -4.0);
  s.u_upper = Vec::Constant(3, 4.0);

  // Handle range lies radially: long axis points away from the base, so the
  // near face is the natural grasp entry.
  OrientedBox box;
  box.rotation = yaw_rotation(2, 0.55);
  box.center = 1.6 * box.rotation.col(0);
  box.half_extents = Vec(2);
  box.half_extents << 0.7, 0.1;
  s.grip_box = std::move(box);

  // Head sits at the base-side end of the handle, so a grasp at the near face
  // keeps the head lever short and the per-iteration tool rebinding stable.
  ToolSpec tool;
  tool.head_position = s.grip_box->center - s.grip_box->rotation * (Vec(2) << 1.0, 0.0).finished();
  tool.head_axis = s.grip_box->rotation.col(0);
  s.tool = std::move(tool);

  // Side grasp: gripper presses down across the handle, not along it.
  s.handle_axis = -s.grip_box->rotation.col(1);
  s.final_position = 2.0 * (Vec(2) << std::cos(0.23), std::sin(0.23)).finished();
  s.hit_direction = (Vec(2) << std::cos(1.1), std::sin(1.1)).finished();
  s.manip_direction = s.hit_direction;

  s.w_position = 1e2;
  s.w_control = 1e-5;
  s.solver = SolverParams{};
  return s;
}

Scenario preset_fig3a(int variant) {
  Scenario s = base_planar_tool_scenario();
  s.name = "fig3a-" + std::to_string(variant);
  if (variant >= 2) s.w_orientation = 1e2;
  if (variant >= 3) s.w_direction = 1e2;
  if (variant >= 4) {
    s.w_manip = 1e0;
    s.manip_mode = "directional";
  }
  return s;
}

Scenario preset_fig4_pickplace() {
  Scenario s = base_planar_tool_scenario();
  s.name = "fig4-pickplace";
  s.w_orientation = 1e2;
  s.w_manip = 1e0;
  s.manip_mode = "none";  // compare overrides the mode per cell
  // Place task, not a strike: no final direction term, so one postural degree
  // of freedom stays free at T for the manipulability term to shape. The
  // probe runs along the carried object's long axis.
  s.hit_direction.reset();
  s.manip_direction = s.grip_box->rotation.col(0);
  // Start posture and place bearing tuned together: unshaped solutions settle
  // mid-handle, while the directional term pulls the pick toward the head end
  // and re-postures the arm, raising transmission along the object axis.
  s.q0 << 2.17, -1.616, -2.175;
  s.final_position = 2.0 * (Vec(2) << std::cos(-0.05), std::sin(-0.05)).finished();
  s.solver.ilqr.q_r = 1e-1;
  s.solver.ilqr.r_r = 1e-2;

  RandomizeSpec rz;
  rz.scene_angle_low = -0.75;
  rz.scene_angle_high = 0.55;
  rz.box_slide_low = -0.1;
  rz.box_slide_high = 0.3;
  rz.target_radius_low = 1.6;
  rz.target_radius_high = 2.0;
  rz.target_angle_jitter = 0.12;
  rz.min_base_distance = 0.4;
  rz.reach_margin = 0.4;
  rz.min_separation = 0.6;
  s.randomize = std::move(rz);
  return s;
}

Scenario preset_spatial7_range() {
  Scenario s;
  s.name = "spatial7-range";
  s.chain_preset = "spatial7";
  s.horizon = 100;
  s.dt = 0.06;
  s.grasp_step = 50;
  s.q0 = Vec(7);
  s.q0 << 0.0, -0.6, 0.0, -2.2, 0.0, 1.8, 0.8;
  s.u_lower = Vec::Constant(7, -3.0);
  s.u_upper = Vec::Constant(7, 3.0);

  // Bare-chain viapoint task: pass through a unit cube range at t', then
  // reach a final pose (position + pointing axis). No tool, no manip term.
  OrientedBox box;
  box.center = (Vec(3) << 0.45, 0.0, 0.45).finished();
  box.rotation = yaw_rotation(3, 0.4);
  box.half_extents = Vec::Constant(3, 0.5);
  s.grip_box = std::move(box);

  s.final_position = (Vec(3) << 0.35, -0.35, 0.45).finished();
  s.hit_direction = (Vec(3) << 0.0, -0.6, 0.8).finished();

  s.w_position = 1e1;
  s.w_direction = 1e0;  // final pointing axis: the orientation half of the pose
  s.manip_mode = "none";
  s.solver.ilqr.q_r = 1e0;
  s.solver.ilqr.r_r = 1e-3;
  return s;
}

Scenario preset_hammer_sim() {
  Scenario s = preset_spatial7_range();
  s.name = "hammer-sim";
  // Strike task: velocity limits per the arm's rating become the control
  // bounds, the strike direction points down, manipulability is shaped along it.
  KinematicChain arm = KinematicChain::panda();
  s.u_lower = -arm.qdot_limit();
  s.u_upper = arm.qdot_limit();
  s.final_position = (Vec(3) << 0.35, -0.4, 0.15).finished();
  s.hit_direction = (Vec(3) << 0.0, 0.0, -1.0).finished();
  s.manip_direction = s.hit_direction;
  s.w_position = 1e2;
  s.w_orientation = 1e1;
  s.w_direction = 1e1;
  s.w_manip = 1e-1;
  s.manip_mode = "directional";
  s.solver.ilqr.q_r = 1e-1;
  s.solver.ilqr.r_r = 1e-3;
  return s;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig3a-1", "fig3a-2", "fig3a-3", "fig3a-4",
          "fig4-pickplace", "spatial7-range", "hammer-sim"};
}

Scenario make_preset(const std::string& name) {
  if (name == "fig3a-1") return preset_fig3a(1);
  if (name == "fig3a-2") return preset_fig3a(2);
  if (name == "fig3a-3") return preset_fig3a(3);
  if (name == "fig3a-4") return preset_fig3a(4);
  if (name == "fig4-pickplace") return preset_fig4_pickplace();
  if (name == "spatial7-range") return preset_spatial7_range();
  if (name == "hammer-sim") return preset_hammer_sim();
  throw Error("unknown preset: " + name);
}

Scenario resolve_scenario(const std::string& path_or_name) {
  std::error_code ec;
  if (std::filesystem::exists(path_or_name, ec)) return load_scenario(path_or_name);
  for (const auto& n : preset_names())
    if (n == path_or_name) return make_preset(path_or_name);
  throw Error("scenario '" + path_or_name + "' is neither a file nor a preset name");
}

}  // namespace tacopt
