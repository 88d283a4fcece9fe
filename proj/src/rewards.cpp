#include "loco/rewards.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace loco {

namespace {

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace

void RobotSnapshot::validate() const {
  if (std::abs(gravity_dir.norm() - 1.0) > 1e-6)
    throw std::invalid_argument("snapshot: gravity direction must be unit");
  const auto n = joint_pos.size();
  if (joint_vel.size() != n || nominal_pos.size() != n ||
      joint_pos_min.size() != n || joint_pos_max.size() != n ||
      joint_vel_max.size() != n)
    throw std::invalid_argument("snapshot: inconsistent joint array lengths");
  if (action_prev.size() != action.size() ||
      action_prev2.size() != action.size())
    throw std::invalid_argument("snapshot: inconsistent action lengths");
}

double track_lin_vel(const RobotSnapshot& s, const RewardParams& p) {
  const Eigen::Vector2d err = s.command.head<2>() - s.planar_velocity;
  const bool low_speed = s.command.head<2>().norm() < p.low_speed_threshold;
  const double cost = low_speed ? err.lpNorm<1>() : err.squaredNorm();
  return std::exp(-cost / p.sigma_v);
}

double track_ang_vel(const RobotSnapshot& s, const RewardParams& p) {
  const double err = s.angular_velocity.z() - s.command.z();
  return std::exp(-err * err / p.sigma_w);
}

double orientation(const RobotSnapshot& s, const RewardParams&) {
  return std::exp(-10.0 * s.gravity_dir.head<2>().norm());
}

double feet_contact(const RobotSnapshot& s, const RewardParams& p) {
  const bool standing = s.command.norm() < p.stand_threshold;
  if (standing) return 1.0;
  return s.single_contact_recent ? 1.0 : 0.0;
}

double feet_y_distance(const RobotSnapshot& s, const RewardParams& p) {
  return std::exp(-10.0 * std::abs(s.feet_y_distance - p.feet_y_target));
}

double base_height(const RobotSnapshot& s, const RewardParams& p) {
  double sum = 0.0;
  int n = 0;
  for (const FootSnapshot& f : s.feet) {
    if (f.contact_force.z() > p.support_force_min) {
      sum += f.height;
      ++n;
    }
  }
  if (n == 0) return 0.0;  // flight phase: no height reference
  const double supp = sum / n;
  return std::exp(-10.0 * std::abs((s.base_height - supp) - p.base_height_target));
}

void penalties(const RobotSnapshot& s, const RewardParams& p,
               std::vector<RewardTerm>& out) {
  auto add = [&out](const std::string& name, double raw, double w) {
    out.push_back({name, raw, w, raw * w});
  };

  add("lin_vel_z", s.vertical_velocity * s.vertical_velocity, p.w_lin_vel_z);
  add("ang_vel_xy", s.angular_velocity.head<2>().squaredNorm(), p.w_ang_vel_xy);
  add("joint_vel", s.joint_vel.squaredNorm(), p.w_joint_vel);
  add("action_rate", (s.action - s.action_prev).squaredNorm(), p.w_action_rate);
  add("action_smoothness",
      (s.action - 2.0 * s.action_prev + s.action_prev2).squaredNorm(),
      p.w_action_smoothness);

  double air_time = 0.0;
  for (const FootSnapshot& f : s.feet)
    if (f.first_contact) air_time += p.air_time_nominal - f.air_time;
  add("feet_air_time", air_time, p.w_feet_air_time);

  double slip = 0.0;
  for (const FootSnapshot& f : s.feet)
    if (f.contact_force.norm() > p.contact_force_gate)
      slip += f.velocity.norm();
  add("foot_slip", slip, p.w_foot_slip);

  double impact_acc = 0.0;
  for (const FootSnapshot& f : s.feet)
    impact_acc += positive_part(std::abs(f.vertical_accel) - p.impact_accel_max);
  add("impact_accel", impact_acc, p.w_impact_accel);

  double impact_vel = 0.0;
  for (const FootSnapshot& f : s.feet)
    impact_vel += positive_part(std::abs(f.velocity.z()) - p.impact_vel_max);
  add("impact_vel", impact_vel, p.w_impact_vel);

  double pos_limits = 0.0;
  for (Eigen::Index j = 0; j < s.joint_pos.size(); ++j)
    pos_limits += positive_part(s.joint_pos_min[j] - s.joint_pos[j]) +
                  positive_part(s.joint_pos[j] - s.joint_pos_max[j]);
  add("dof_pos_limits", pos_limits, p.w_dof_pos_limits);

  double vel_limits = 0.0;
  for (Eigen::Index j = 0; j < s.joint_vel.size(); ++j)
    vel_limits += positive_part(std::abs(s.joint_vel[j]) - s.joint_vel_max[j]);
  add("dof_vel_limits", vel_limits, p.w_dof_vel_limits);

  double hip = 0.0;
  for (int j : p.hip_joints) {
    const double d = s.joint_pos[j] - s.nominal_pos[j];
    hip += d * d;
  }
  add("hip_pos", hip, p.w_hip_pos);

  double ankle = 0.0;
  for (int j : p.ankle_joints) {
    const double d = s.joint_pos[j] - s.nominal_pos[j];
    ankle += d * d;
  }
  add("ankle_pos", ankle, p.w_ankle_pos);

  bool stumble = false;
  for (const FootSnapshot& f : s.feet)
    if (f.contact_force.head<2>().norm() >
        p.stumble_ratio * std::abs(f.contact_force.z()))
      stumble = true;
  add("stumble", stumble ? 1.0 : 0.0, p.w_stumble);
}

RewardBreakdown evaluate_all(const RobotSnapshot& s, double foothold_r,
                             const RewardParams& p) {
  s.validate();
  RewardBreakdown bd;
  auto add = [&bd](const std::string& name, double raw, double w) {
    bd.terms.push_back({name, raw, w, raw * w});
  };

  add("track_lin_vel", track_lin_vel(s, p), p.w_track_lin_vel);
  add("track_ang_vel", track_ang_vel(s, p), p.w_track_ang_vel);
  add("orientation", orientation(s, p), p.w_orientation);
  add("feet_contact", feet_contact(s, p), p.w_feet_contact);
  add("feet_y_distance", feet_y_distance(s, p), p.w_feet_y_distance);
  add("foothold", foothold_r, p.w_foothold);
  add("base_height", base_height(s, p), p.w_base_height);
  penalties(s, p, bd.terms);

  bd.total = 0.0;
  for (const RewardTerm& t : bd.terms) bd.total += t.weighted;
  return bd;
}

const RewardTerm& RewardBreakdown::term(const std::string& name) const {
  for (const RewardTerm& t : terms)
    if (t.name == name) return t;
  throw std::invalid_argument("no reward term named '" + name + "'");
}

namespace {

void write_vec(std::ostream& os, const std::string& key,
               const Eigen::VectorXd& v) {
  os << key;
  for (Eigen::Index i = 0; i < v.size(); ++i) os << " " << fmt_double(v[i]);
  os << "\n";
}

}  // namespace

void save_snapshot(const RobotSnapshot& s, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  os << "snapshot v1\n";
  os << "omega " << fmt_double(s.angular_velocity.x()) << " "
     << fmt_double(s.angular_velocity.y()) << " "
     << fmt_double(s.angular_velocity.z()) << "\n";
  os << "vel_xy " << fmt_double(s.planar_velocity.x()) << " "
     << fmt_double(s.planar_velocity.y()) << "\n";
  os << "vel_z " << fmt_double(s.vertical_velocity) << "\n";
  os << "gravity " << fmt_double(s.gravity_dir.x()) << " "
     << fmt_double(s.gravity_dir.y()) << " " << fmt_double(s.gravity_dir.z())
     << "\n";
  os << "command " << fmt_double(s.command.x()) << " "
     << fmt_double(s.command.y()) << " " << fmt_double(s.command.z()) << "\n";
  write_vec(os, "q", s.joint_pos);
  write_vec(os, "qd", s.joint_vel);
  write_vec(os, "q0", s.nominal_pos);
  write_vec(os, "action", s.action);
  write_vec(os, "action_prev", s.action_prev);
  write_vec(os, "action_prev2", s.action_prev2);
  write_vec(os, "q_min", s.joint_pos_min);
  write_vec(os, "q_max", s.joint_pos_max);
  write_vec(os, "qd_max", s.joint_vel_max);
  os << "base_height " << fmt_double(s.base_height) << "\n";
  os << "feet_y_distance " << fmt_double(s.feet_y_distance) << "\n";
  os << "single_contact_recent " << (s.single_contact_recent ? 1 : 0) << "\n";
  os << "feet " << s.feet.size() << "\n";
  for (const FootSnapshot& f : s.feet) {
    os << "foot";
    for (int i = 0; i < 3; ++i) os << " " << fmt_double(f.contact_force[i]);
    for (int i = 0; i < 3; ++i) os << " " << fmt_double(f.velocity[i]);
    os << " " << fmt_double(f.height) << " " << fmt_double(f.air_time) << " "
       << (f.first_contact ? 1 : 0) << " " << fmt_double(f.vertical_accel)
       << "\n";
  }
}

RobotSnapshot load_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(is, line) || line != "snapshot v1")
    throw FormatError("snapshot: bad header");

  RobotSnapshot s;
  auto read_vec = [](std::istringstream& ls) {
    std::vector<double> vals;
    double v;
    while (ls >> v) vals.push_back(v);
    Eigen::VectorXd out(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i)
      out[static_cast<Eigen::Index>(i)] = vals[i];
    return out;
  };

  std::size_t feet_expected = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "omega") {
      ls >> s.angular_velocity.x() >> s.angular_velocity.y() >>
          s.angular_velocity.z();
    } else if (key == "vel_xy") {
      ls >> s.planar_velocity.x() >> s.planar_velocity.y();
    } else if (key == "vel_z") {
      ls >> s.vertical_velocity;
    } else if (key == "gravity") {
      ls >> s.gravity_dir.x() >> s.gravity_dir.y() >> s.gravity_dir.z();
    } else if (key == "command") {
      ls >> s.command.x() >> s.command.y() >> s.command.z();
    } else if (key == "q") {
      s.joint_pos = read_vec(ls);
    } else if (key == "qd") {
      s.joint_vel = read_vec(ls);
    } else if (key == "q0") {
      s.nominal_pos = read_vec(ls);
    } else if (key == "action") {
      s.action = read_vec(ls);
    } else if (key == "action_prev") {
      s.action_prev = read_vec(ls);
    } else if (key == "action_prev2") {
      s.action_prev2 = read_vec(ls);
    } else if (key == "q_min") {
      s.joint_pos_min = read_vec(ls);
    } else if (key == "q_max") {
      s.joint_pos_max = read_vec(ls);
    } else if (key == "qd_max") {
      s.joint_vel_max = read_vec(ls);
    } else if (key == "base_height") {
      ls >> s.base_height;
    } else if (key == "feet_y_distance") {
      ls >> s.feet_y_distance;
    } else if (key == "single_contact_recent") {
      int v = 0;
      ls >> v;
      s.single_contact_recent = v != 0;
    } else if (key == "feet") {
      ls >> feet_expected;
    } else if (key == "foot") {
      FootSnapshot f;
      int first = 0;
      for (int i = 0; i < 3; ++i) ls >> f.contact_force[i];
      for (int i = 0; i < 3; ++i) ls >> f.velocity[i];
      ls >> f.height >> f.air_time >> first >> f.vertical_accel;
      if (!ls) throw FormatError("snapshot: bad foot line");
      f.first_contact = first != 0;
      s.feet.push_back(f);
    } else {
      throw FormatError("snapshot: unknown key '" + key + "'");
    }
  }
  if (s.feet.size() != feet_expected)
    throw FormatError("snapshot: foot count mismatch");
  return s;
}

}  // namespace loco
