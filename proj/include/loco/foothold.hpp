#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "loco/common.hpp"
#include "loco/eig3.hpp"

namespace loco {

using Vec3 = Eigen::Vector3d;

struct FootholdConfig {
  double window_x = 0.24;     // candidate window size, forward [m]
  double window_y = 0.10;     // candidate window size, lateral [m]
  double stride = 0.04;       // window tiling stride [m]
  double gate_time = 0.5;     // forward gate = gate_time * forward command [s]
  double roughness_max = 0.01;  // r_th [m]
  double normal_z_min = 0.95;   // eta_th, |v1_z| lower bound
  double recess_min = -0.30;    // h_min, foot-frame window mean z floor [m]
  double tolerance_xz = 0.05;   // s_xz, touchdown reward scale [m]
  bool distance_in_xy = false;  // measure touchdown distance in x-y instead
                                // of the default forward/vertical plane
  std::size_t buffer_cap = 512;

  void validate() const;
};

/// Mean/covariance summary of one candidate window.
struct WindowStats {
  Vec3 mean = Vec3::Zero();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  Eigen::Vector3d eigenvalues = Eigen::Vector3d::Zero();   // ascending
  Eigen::Matrix3d eigenvectors = Eigen::Matrix3d::Identity();  // columns
  double roughness = 0.0;  // sqrt(max(lambda_1, 0))
  std::size_t count = 0;
};

struct Window {
  double x0 = 0.0;  // footprint min corner
  double y0 = 0.0;
  std::vector<Vec3> points;
};

enum class ContactPhase { Stance, Swing };

// Per-foot pipeline state. Candidates are latched at liftoff and stay fixed
// until the next touchdown no matter how the buffer changes in between.
struct FootholdState {
  std::vector<Vec3> buffer;       // most recent points, foot frame
  std::vector<Vec3> candidates;   // latched at liftoff
  ContactPhase phase = ContactPhase::Stance;
  double last_liftoff_time = 0.0;
  double last_touchdown_time = 0.0;

  void push_points(const std::vector<Vec3>& pts, std::size_t cap);
};

/// Command-conditioned forward gate: drops points closer than the distance
/// covered in gate_time at the commanded forward speed. Non-positive
/// commands leave the set unchanged.
std::vector<Vec3> forward_gate(const std::vector<Vec3>& points,
                               double forward_cmd, const FootholdConfig& cfg);

/// Overlapping windows tiling the x-y extent of the points, anchored at the
/// minimum x-y corner. A point belongs to every window whose closed
/// footprint contains its x-y.
std::vector<Window> partition_windows(const std::vector<Vec3>& points,
                                      const FootholdConfig& cfg);

/// Mean, unbiased covariance (divisor max(n-1, 1)) and eigen summary.
/// Throws EmptyError for an empty window.
WindowStats window_stats(const std::vector<Vec3>& points);

/// Planar, approximately horizontal, and not recessed.
bool accept_window(const WindowStats& stats, const FootholdConfig& cfg);

/// Latch candidates from the current buffer at a stance->swing transition.
void on_liftoff(FootholdState& state, double time, double forward_cmd,
                const FootholdConfig& cfg);

struct TouchdownResult {
  double reward = 0.0;
  double distance = std::numeric_limits<double>::infinity();
  int nearest = -1;  // candidate index, -1 when the set is empty
};

/// exp(-d/s_xz) against the latched candidate set at a swing->stance
/// transition; d is the nearest planar distance (x-z by default).
TouchdownResult touchdown_reward(FootholdState& state, double time,
                                 const Vec3& contact_pos,
                                 const FootholdConfig& cfg);

/// Distance-only helper shared by touchdown_reward and offline replay.
TouchdownResult score_contact(const std::vector<Vec3>& candidates,
                              const Vec3& contact_pos,
                              const FootholdConfig& cfg);

}  // namespace loco
