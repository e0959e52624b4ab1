#include "tacopt/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tacopt/geometry.hpp"

namespace tacopt {

namespace {

std::string format_g(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

const char* bool_text(bool b) { return b ? "true" : "false"; }

// Tool-extended chain re-anchored from the solved trajectory, matching the
// binding the solver used for its final diagnostics.
KinematicChain effective_chain(const Scenario& scenario, const SolveReport& report,
                               const KinematicChain& arm) {
  if (!scenario.tool) return arm;
  const Vec q_grasp = report.trajectory.q.col(scenario.grasp_step);
  return attach_tool(arm, arm.gripper_pose(q_grasp), tool_head_pose(*scenario.tool));
}

}  // namespace

std::string format_sig17(double v) { return format_g(v, 17); }

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), "cannot open '" + tmp + "' for writing");
    out << content;
    out.flush();
    require(out.good(), "write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("rename of '" + tmp + "' to '" + path + "' failed: " + ec.message());
}

std::string trajectory_csv(const Trajectory& traj) {
  const int dof = traj.dof();
  const int wdim = traj.workspace_dim();
  const int horizon = traj.horizon();
  std::ostringstream out;
  out << "t";
  for (int i = 0; i < dof; ++i) out << ",q_" << i;
  out << ",p_x,p_y";
  if (wdim == 3) out << ",p_z";
  for (int i = 0; i < dof; ++i) out << ",u_" << i;
  out << "\n";
  for (int t = 0; t <= horizon; ++t) {
    out << t;
    for (int i = 0; i < dof; ++i) out << "," << format_sig17(traj.q(i, t));
    for (int i = 0; i < wdim; ++i) out << "," << format_sig17(traj.p(i, t));
    for (int i = 0; i < dof; ++i)
      out << "," << format_sig17(t < horizon ? traj.u(i, t) : 0.0);
    out << "\n";
  }
  return out.str();
}

std::string history_csv(const SolveReport& report) {
  std::ostringstream out;
  out << "outer,inner,cost,alpha,no_progress\n";
  for (const IterationRecord& rec : report.inner_history) {
    out << rec.outer << "," << rec.inner << "," << format_sig17(rec.cost) << ","
        << format_sig17(rec.alpha) << "," << (rec.no_progress ? 1 : 0) << "\n";
  }
  return out.str();
}

std::string residuals_csv(const SolveReport& report) {
  std::ostringstream out;
  out << "outer,primal,dual\n";
  for (const ResidualRecord& rec : report.residual_history) {
    out << rec.outer << "," << format_sig17(rec.primal) << ","
        << format_sig17(rec.dual) << "\n";
  }
  return out.str();
}

std::string report_csv(const Scenario& scenario, const SolveReport& report) {
  const KinematicChain arm = make_chain(scenario);
  const KinematicChain effective = effective_chain(scenario, report, arm);
  const Vec q_final = report.trajectory.q.col(report.trajectory.horizon());
  const Pose tip = effective.forward_kinematics(q_final);

  std::ostringstream out;
  out << "key,value\n";
  auto row = [&out](const std::string& key, const std::string& value) {
    out << key << "," << value << "\n";
  };
  row("name", scenario.name);
  row("chain_preset", scenario.chain_preset);
  row("manip_mode", scenario.manip_mode);
  row("horizon", std::to_string(scenario.horizon));
  row("dt", format_sig17(scenario.dt));
  row("grasp_step", std::to_string(scenario.grasp_step));
  row("converged", bool_text(report.converged));
  row("outer_iterations", std::to_string(report.outer_iterations));
  row("primal_residual", format_sig17(report.primal_residual));
  row("dual_residual", format_sig17(report.dual_residual));
  row("task_cost", format_sig17(report.task_cost));
  row("augmented_cost", format_sig17(report.augmented_cost));
  for (const auto& [kind, value] : report.cost_breakdown)
    row("cost_" + kind, format_sig17(value));
  row("grip_box_feasible_consensus", bool_text(report.grip_box_feasible_consensus));
  row("grip_box_violation_nominal", format_sig17(report.grip_box_violation_nominal));
  row("controls_within_bounds", bool_text(report.controls_within_bounds));
  row("control_violation", format_sig17(report.control_violation));
  if (scenario.final_position)
    row("final_tip_error",
        format_sig17((tip.position - *scenario.final_position).norm()));
  if (scenario.hit_direction && scenario.tool) {
    const Vec axis_world = tip.rotation.col(0);
    const Vec target = scenario.hit_direction->normalized();
    row("direction_error_rad", format_sig17(sphere_distance(axis_world, target)));
  }
  if (report.manip) {
    row("manip_transmission", format_sig17(report.manip->transmission));
    row("manip_index", format_sig17(report.manip->index));
    row("impact_proxy", format_sig17(report.manip->impact_proxy));
    row("impact_used_bare_chain", bool_text(report.manip->proxy_used_bare_chain));
  }
  row("singular_cap_events", std::to_string(report.singular_cap_events));
  row("spd_regularize_events", std::to_string(report.spd_regularize_events));
  return out.str();
}

namespace {

using Eigen::Vector2d;

std::string px(double v) { return format_g(v, 8); }

// Collects primitives in world coordinates for one 2D projection, then emits
// them scaled into one SVG group. Line widths and dot radii are pixel units.
struct PanelPainter {
  struct Poly {
    std::vector<Vector2d> pts;
    std::string stroke;
    double width = 1.0;
    std::string dash;
    std::string fill = "none";
    double fill_opacity = 1.0;
    bool closed = false;
  };
  struct Dot {
    Vector2d center;
    double radius = 2.0;
    std::string fill;
  };
  struct Label {
    Vector2d at;
    std::string text;
  };

  std::vector<Poly> polys;
  std::vector<Dot> dots;
  std::vector<Label> labels;
  double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;

  void include(const Vector2d& p) {
    min_x = std::min(min_x, p.x());
    max_x = std::max(max_x, p.x());
    min_y = std::min(min_y, p.y());
    max_y = std::max(max_y, p.y());
  }

  void polyline(std::vector<Vector2d> pts, std::string stroke, double width,
                std::string dash = "") {
    for (const Vector2d& p : pts) include(p);
    polys.push_back({std::move(pts), std::move(stroke), width, std::move(dash),
                     "none", 1.0, false});
  }

  void polygon(std::vector<Vector2d> pts, std::string stroke, double width,
               std::string fill, double fill_opacity) {
    for (const Vector2d& p : pts) include(p);
    polys.push_back({std::move(pts), std::move(stroke), width, "", std::move(fill),
                     fill_opacity, true});
  }

  void segment(const Vector2d& a, const Vector2d& b, std::string stroke, double width,
               std::string dash = "") {
    polyline({a, b}, std::move(stroke), width, std::move(dash));
  }

  void dot(const Vector2d& center, double radius, std::string fill) {
    include(center);
    dots.push_back({center, radius, std::move(fill)});
  }

  void cross(const Vector2d& center, double half, const std::string& stroke,
             double width) {
    segment(center + Vector2d(-half, -half), center + Vector2d(half, half), stroke,
            width);
    segment(center + Vector2d(-half, half), center + Vector2d(half, -half), stroke,
            width);
  }

  void arrow(const Vector2d& from, const Vector2d& to, const std::string& stroke,
             double width) {
    segment(from, to, stroke, width);
    const Vector2d dir = to - from;
    const double len = dir.norm();
    if (len < 1e-12) return;
    const Vector2d u = dir / len;
    const Vector2d n(-u.y(), u.x());
    const double head = 0.22 * len;
    polyline({to - head * u + 0.5 * head * n, to, to - head * u - 0.5 * head * n},
             stroke, width);
  }

  void label(const Vector2d& at, std::string text) {
    include(at);
    labels.push_back({at, std::move(text)});
  }

  std::string emit(double width_px, double height_px, double pad_px) const {
    const double span_x = std::max(max_x - min_x, 1e-9);
    const double span_y = std::max(max_y - min_y, 1e-9);
    const double scale = std::min((width_px - 2.0 * pad_px) / span_x,
                                  (height_px - 2.0 * pad_px) / span_y);
    const double off_x = 0.5 * (width_px - span_x * scale);
    const double off_y = 0.5 * (height_px - span_y * scale);
    auto map = [&](const Vector2d& p) {
      return Vector2d(off_x + (p.x() - min_x) * scale,
                      off_y + (max_y - p.y()) * scale);
    };
    std::ostringstream out;
    for (const Poly& poly : polys) {
      out << (poly.closed ? "<polygon" : "<polyline") << " points=\"";
      for (size_t i = 0; i < poly.pts.size(); ++i) {
        const Vector2d p = map(poly.pts[i]);
        out << (i ? " " : "") << px(p.x()) << "," << px(p.y());
      }
      out << "\" fill=\"" << poly.fill << "\"";
      if (poly.fill != "none")
        out << " fill-opacity=\"" << px(poly.fill_opacity) << "\"";
      out << " stroke=\"" << poly.stroke << "\" stroke-width=\"" << px(poly.width)
          << "\" stroke-linecap=\"round\" stroke-linejoin=\"round\"";
      if (!poly.dash.empty()) out << " stroke-dasharray=\"" << poly.dash << "\"";
      out << "/>\n";
    }
    for (const Dot& d : dots) {
      const Vector2d p = map(d.center);
      out << "<circle cx=\"" << px(p.x()) << "\" cy=\"" << px(p.y()) << "\" r=\""
          << px(d.radius) << "\" fill=\"" << d.fill << "\"/>\n";
    }
    for (const Label& l : labels) {
      const Vector2d p = map(l.at);
      out << "<text x=\"" << px(p.x() + 6.0) << "\" y=\"" << px(p.y() - 6.0)
          << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#444\">" << l.text
          << "</text>\n";
    }
    return out.str();
  }
};

// Wireframe of an oriented box projected onto coordinates (ix, iy): every edge
// connects two corners whose sign patterns differ in exactly one bit.
void paint_box(PanelPainter& panel, const OrientedBox& box, int ix, int iy) {
  const int n = box.dim();
  const int corners = 1 << n;
  std::vector<Vector2d> pts(static_cast<size_t>(corners));
  for (int c = 0; c < corners; ++c) {
    Vec offset(n);
    for (int i = 0; i < n; ++i) offset(i) = (c >> i & 1) ? box.half_extents(i) : -box.half_extents(i);
    const Vec world = box.center + box.rotation * offset;
    pts[static_cast<size_t>(c)] = Vector2d(world(ix), world(iy));
  }
  for (int c = 0; c < corners; ++c)
    for (int i = 0; i < n; ++i)
      if (!(c >> i & 1))
        panel.segment(pts[static_cast<size_t>(c)], pts[static_cast<size_t>(c | (1 << i))],
                      "#7a4cc4", 1.5);
}

void paint_scene(PanelPainter& panel, const Scenario& scenario, const SolveReport& report,
                 const KinematicChain& arm, const KinematicChain& effective, int ix,
                 int iy) {
  const Trajectory& traj = report.trajectory;
  const int horizon = traj.horizon();
  const int grasp = scenario.grasp_step;
  auto pick = [&](const Vec& v) { return Vector2d(v(ix), v(iy)); };

  if (scenario.grip_box) paint_box(panel, *scenario.grip_box, ix, iy);

  // Gripper path over the full horizon; tool-tip path once the tool is bound.
  {
    std::vector<Vector2d> path;
    path.reserve(static_cast<size_t>(horizon) + 1);
    for (int t = 0; t <= horizon; ++t) path.push_back(pick(traj.p.col(t)));
    panel.polyline(std::move(path), "#e8a13a", 1.5, "4 3");
  }
  if (effective.has_tool()) {
    std::vector<Vector2d> path;
    for (int t = grasp; t <= horizon; ++t)
      path.push_back(pick(effective.forward_kinematics(traj.q.col(t)).position));
    panel.polyline(std::move(path), "#b45309", 1.5);
  }

  struct Snapshot {
    int t;
    std::string stroke;
    double width;
    const char* tag;
  };
  const Snapshot snaps[] = {{0, "#9aa0a6", 3.0, "start"},
                            {grasp, "#4a7bd0", 3.0, "grasp"},
                            {horizon, "#1a1a1a", 3.5, "final"}};
  for (const Snapshot& snap : snaps) {
    const KinematicChain& chain = snap.t >= grasp ? effective : arm;
    const std::vector<Vec> points = chain.link_points(traj.q.col(snap.t));
    std::vector<Vector2d> line;
    line.reserve(points.size());
    for (const Vec& p : points) line.push_back(pick(p));
    if (chain.has_tool() && line.size() >= 2) {
      panel.segment(line[line.size() - 2], line.back(), "#d97706", 4.5);
      panel.dot(line.back(), 3.0, "#d97706");
    }
    const Vector2d tip = line.back();
    std::vector<Vector2d> body(line.begin(),
                               line.end() - (chain.has_tool() ? 1 : 0));
    panel.polyline(body, snap.stroke, snap.width);
    for (const Vector2d& joint : body) panel.dot(joint, 2.5, snap.stroke);
    panel.label(tip, snap.tag);
  }
  panel.dot(Vector2d::Zero(), 4.0, "#1a1a1a");

  if (scenario.tool) panel.dot(pick(scenario.tool->head_position), 3.5, "#d97706");
  if (scenario.final_position) {
    const Vector2d target = pick(*scenario.final_position);
    panel.cross(target, 0.035 * arm.reach(), "#d23b3b", 2.5);
    if (scenario.hit_direction) {
      Vec dir = scenario.hit_direction->normalized();
      panel.arrow(target, target + 0.18 * arm.reach() * pick(dir), "#d23b3b", 2.0);
    }
  }
}

}  // namespace

std::string scene_svg(const Scenario& scenario, const SolveReport& report) {
  const KinematicChain arm = make_chain(scenario);
  const KinematicChain effective = effective_chain(scenario, report, arm);
  const bool planar = arm.is_planar();

  struct PanelSpec {
    int ix, iy;
    const char* caption;
  };
  const std::vector<PanelSpec> specs =
      planar ? std::vector<PanelSpec>{{0, 1, ""}}
             : std::vector<PanelSpec>{{0, 1, "top view (x-y)"}, {0, 2, "side view (x-z)"}};
  const double panel_w = planar ? 640.0 : 470.0;
  const double panel_h = planar ? 640.0 : 470.0;
  const double header = 36.0;
  const double total_w = panel_w * static_cast<double>(specs.size());
  const double total_h = panel_h + header;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(total_w)
      << "\" height=\"" << px(total_h) << "\" viewBox=\"0 0 " << px(total_w) << " "
      << px(total_h) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  out << "<text x=\"12\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" "
         "fill=\"#1a1a1a\">"
      << scenario.name << " (mode " << scenario.manip_mode << ")</text>\n";
  for (size_t k = 0; k < specs.size(); ++k) {
    PanelPainter panel;
    paint_scene(panel, scenario, report, arm, effective, specs[k].ix, specs[k].iy);
    out << "<g transform=\"translate(" << px(static_cast<double>(k) * panel_w) << ","
        << px(header) << ")\">\n";
    out << panel.emit(panel_w, panel_h, 34.0);
    if (*specs[k].caption)
      out << "<text x=\"12\" y=\"" << px(panel_h - 10.0)
          << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#666\">"
          << specs[k].caption << "</text>\n";
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string compare_csv(const std::vector<CompareCell>& cells) {
  std::ostringstream out;
  out << "mode,seed,transmission,manip_index,task_cost,outer_iterations,converged\n";
  for (const CompareCell& cell : cells) {
    out << cell.mode << "," << cell.seed << "," << format_sig17(cell.transmission)
        << "," << format_sig17(cell.manip_index) << ","
        << format_sig17(cell.task_cost) << "," << cell.outer_iterations << ","
        << (cell.converged ? 1 : 0) << "\n";
  }
  return out.str();
}

double median(std::vector<double> values) {
  require(!values.empty(), "median of an empty set");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

std::vector<std::string> mode_order(const std::vector<CompareCell>& cells) {
  std::vector<std::string> modes;
  for (const CompareCell& cell : cells)
    if (std::find(modes.begin(), modes.end(), cell.mode) == modes.end())
      modes.push_back(cell.mode);
  return modes;
}

}  // namespace

std::string compare_text_table(const std::vector<CompareCell>& cells) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-14s %6s %14s %12s %12s %7s %10s\n", "mode", "seed",
                "transmission", "manip_index", "task_cost", "outer", "converged");
  out << line;
  for (const CompareCell& cell : cells) {
    std::snprintf(line, sizeof line, "%-14s %6llu %14.6g %12.6g %12.6g %7d %10s\n",
                  cell.mode.c_str(), static_cast<unsigned long long>(cell.seed),
                  cell.transmission, cell.manip_index, cell.task_cost,
                  cell.outer_iterations, cell.converged ? "yes" : "no");
    out << line;
  }
  out << "\n";
  for (const std::string& mode : mode_order(cells)) {
    std::vector<double> transmissions;
    int converged = 0, total = 0;
    for (const CompareCell& cell : cells)
      if (cell.mode == mode) {
        transmissions.push_back(cell.transmission);
        converged += cell.converged ? 1 : 0;
        ++total;
      }
    std::snprintf(line, sizeof line,
                  "%-14s median_transmission=%.6g converged=%d/%d\n", mode.c_str(),
                  median(transmissions), converged, total);
    out << line;
  }
  return out.str();
}

std::string compare_svg(const std::vector<CompareCell>& cells) {
  const std::vector<std::string> modes = mode_order(cells);
  const double lane_h = 72.0, pad = 150.0, width = 760.0, header = 48.0;
  const double height = header + lane_h * static_cast<double>(modes.size()) + 16.0;
  double max_v = 1e-9;
  for (const CompareCell& cell : cells) max_v = std::max(max_v, cell.transmission);

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(width)
      << "\" height=\"" << px(height) << "\" viewBox=\"0 0 " << px(width) << " "
      << px(height) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  out << "<text x=\"12\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\" "
         "fill=\"#1a1a1a\">velocity transmission along the probe direction "
         "(per seed, red tick = median)</text>\n";
  auto sx = [&](double v) { return pad + (v / max_v) * (width - pad - 30.0); };
  for (size_t m = 0; m < modes.size(); ++m) {
    const double y = header + lane_h * (static_cast<double>(m) + 0.55);
    out << "<line x1=\"" << px(pad) << "\" y1=\"" << px(y) << "\" x2=\""
        << px(width - 30.0) << "\" y2=\"" << px(y)
        << "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
    out << "<text x=\"12\" y=\"" << px(y + 4.0)
        << "\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#1a1a1a\">"
        << modes[m] << "</text>\n";
    std::vector<double> transmissions;
    for (const CompareCell& cell : cells) {
      if (cell.mode != modes[m]) continue;
      transmissions.push_back(cell.transmission);
      out << "<circle cx=\"" << px(sx(cell.transmission)) << "\" cy=\"" << px(y)
          << "\" r=\"5\" fill=\"#4a7bd0\" fill-opacity=\"0.55\"/>\n";
    }
    if (!transmissions.empty()) {
      const double med = sx(median(transmissions));
      out << "<line x1=\"" << px(med) << "\" y1=\"" << px(y - 14.0) << "\" x2=\""
          << px(med) << "\" y2=\"" << px(y + 14.0)
          << "\" stroke=\"#d23b3b\" stroke-width=\"2.5\"/>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace tacopt
