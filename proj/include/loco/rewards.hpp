#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "loco/common.hpp"

namespace loco {

using Vec3 = Eigen::Vector3d;

/// Per-foot slice of a control-step snapshot.
struct FootSnapshot {
  Vec3 contact_force = Vec3::Zero();  // N
  Vec3 velocity = Vec3::Zero();       // m/s
  double height = 0.0;                // world z of the foot point [m]
  double air_time = 0.0;              // time since liftoff at first contact [s]
  bool first_contact = false;         // first touch after an aerial phase
  double vertical_accel = 0.0;        // dv_z/dt [m/s^2]
};

// Everything the reward suite reads at one control step. Filled by the
// rollout harness (or loaded from file); evaluation itself is stateless.
struct RobotSnapshot {
  Vec3 angular_velocity = Vec3::Zero();        // rad/s, body frame
  Eigen::Vector2d planar_velocity = Eigen::Vector2d::Zero();  // m/s
  double vertical_velocity = 0.0;              // m/s
  Vec3 gravity_dir = Vec3(0, 0, -1);           // unit, body frame
  Vec3 command = Vec3::Zero();                 // v_x, v_y, omega_z
  Eigen::VectorXd joint_pos;
  Eigen::VectorXd joint_vel;
  Eigen::VectorXd nominal_pos;
  Eigen::VectorXd action;
  Eigen::VectorXd action_prev;
  Eigen::VectorXd action_prev2;
  Eigen::VectorXd joint_pos_min;
  Eigen::VectorXd joint_pos_max;
  Eigen::VectorXd joint_vel_max;
  std::vector<FootSnapshot> feet;
  double base_height = 0.0;       // world z [m]
  double feet_y_distance = 0.0;   // lateral separation [m]
  bool single_contact_recent = false;  // single-foot contact in last 0.2 s

  void validate() const;  // gravity unit norm, consistent joint dims
};

struct RewardParams {
  // tracking shape and switching thresholds
  double sigma_v = 0.25;
  double sigma_w = 0.25;
  double low_speed_threshold = 0.1;  // v_s, planar command norm [m/s]
  double stand_threshold = 0.1;      // u_s, full command norm
  // targets
  double feet_y_target = 0.27;
  double base_height_target = 0.55;
  double air_time_nominal = 0.5;
  // gates
  double contact_force_gate = 5.0;   // N, slip gate
  double support_force_min = 1.0;    // N, supporting-foot indicator
  double stumble_ratio = 5.0;
  double impact_accel_max = 50.0;    // a_0 [m/s^2]
  double impact_vel_max = 0.6;       // v_0 [m/s]
  // joint groups for posture penalties (robot-description config)
  std::vector<int> hip_joints;    // hip x/z indices
  std::vector<int> ankle_joints;  // ankle x indices

  // weights, one per term, defaults from the training reward table
  double w_track_lin_vel = 2.5;
  double w_track_ang_vel = 1.5;
  double w_orientation = 1.0;
  double w_feet_contact = 1.5;
  double w_feet_y_distance = 0.1;
  double w_foothold = 2.0;
  double w_base_height = 0.8;
  double w_lin_vel_z = -1.0;
  double w_ang_vel_xy = -0.05;
  double w_joint_vel = -1e-3;
  double w_action_rate = -0.01;
  double w_action_smoothness = -0.01;
  double w_feet_air_time = -2.5;
  double w_foot_slip = -0.2;
  double w_impact_accel = -0.5;
  double w_impact_vel = -1.5;
  double w_dof_pos_limits = -10.0;
  double w_dof_vel_limits = -0.6;
  double w_hip_pos = -7.0;
  double w_ankle_pos = -10.0;
  double w_stumble = -10.0;
};

struct RewardTerm {
  std::string name;
  double raw = 0.0;
  double weight = 0.0;
  double weighted = 0.0;
};

struct RewardBreakdown {
  std::vector<RewardTerm> terms;  // fixed table order
  double total = 0.0;

  const RewardTerm& term(const std::string& name) const;
};

// individual terms
double track_lin_vel(const RobotSnapshot& s, const RewardParams& p);
double track_ang_vel(const RobotSnapshot& s, const RewardParams& p);
double orientation(const RobotSnapshot& s, const RewardParams& p);
double feet_contact(const RobotSnapshot& s, const RewardParams& p);
double feet_y_distance(const RobotSnapshot& s, const RewardParams& p);
double base_height(const RobotSnapshot& s, const RewardParams& p);

/// All penalty rows appended to `out` in table order.
void penalties(const RobotSnapshot& s, const RewardParams& p,
               std::vector<RewardTerm>& out);

/// The full table: 20 terms, raw/weight/weighted each, plus the total.
/// `foothold_r` comes from the foothold module.
RewardBreakdown evaluate_all(const RobotSnapshot& s, double foothold_r,
                             const RewardParams& p);

void save_snapshot(const RobotSnapshot& s, const std::string& path);
RobotSnapshot load_snapshot(const std::string& path);

}  // namespace loco
