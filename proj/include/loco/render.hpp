#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "loco/terrain.hpp"

namespace loco {

using Vec3 = Eigen::Vector3d;

/// Robot link approximated as a segment plus radius, for self-occlusion.
struct Capsule {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.05;
};

struct CapsuleScene {
  std::vector<Capsule> capsules;
};

// Pinhole depth camera. Optical axis starts level with world +x, then the
// mount pose (yaw/pitch/roll) and pitch_down are applied. Image x grows to
// the camera's right, image y grows downward.
struct CameraModel {
  int width = 64;
  int height = 48;
  double vertical_fov = 1.0122909661567112;  // 58 deg
  Vec3 position = Vec3(0.0, 0.0, 1.0);
  double yaw = 0.0;
  double pitch = 0.0;  // mount pitch, positive = down
  double roll = 0.0;
  double pitch_down = 0.8726646259971648;  // 50 deg
  double d_max = 2.0;

  void validate() const;
  Eigen::Matrix3d rotation() const;        // camera axes in world coords
  Vec3 pixel_ray(int row, int col) const;  // unit direction, world frame
};

struct DepthImage {
  int width = 0;
  int height = 0;
  double d_max = 0.0;
  Eigen::MatrixXd raw;         // height x width, meters, d_max where no hit
  Eigen::MatrixXd normalized;  // raw / d_max - 0.5
};

/// First hit of a unit-direction ray against the bilinear terrain surface,
/// by 2-D grid traversal with per-cell quadratic patch intersection.
/// Empty if the ray leaves the field or exceeds t_max.
std::optional<double> ray_heightfield(const Vec3& origin, const Vec3& dir,
                                      const Heightfield& hf, double t_max);

/// Smallest non-negative hit distance of a ray against a capsule
/// (cylinder body plus two sphere caps). Empty on miss.
std::optional<double> ray_capsule(const Vec3& origin, const Vec3& dir,
                                  const Capsule& c);

/// Per-pixel depth: min over the terrain hit and all capsule hits, clamped
/// to d_max. Parallel over pixel rows; output independent of thread count.
DepthImage render_depth(const CameraModel& cam, const Heightfield& hf,
                        const CapsuleScene& scene, int threads = 1);

/// Rectangular sector of terrain samples ahead of a foot, expressed in the
/// foot frame (x forward along foot yaw, z up, origin at the foot point).
struct FootScanConfig {
  double forward_min = 0.0;
  double forward_max = 1.2;
  double lateral_half = 0.15;
  double spacing = 0.02;
};

std::vector<Vec3> foot_pointcloud(const Heightfield& hf, const Vec3& foot_pos,
                                  double foot_yaw, const FootScanConfig& cfg);

/// Back-projection of a depth image to camera-frame points (alternative
/// point source to terrain sampling).
std::vector<Vec3> depth_to_points(const CameraModel& cam,
                                  const DepthImage& img);

// 16-bit big-endian P5 plus a text sidecar ('<path>.meta') with d_max and
// the camera pose; raw depth scaled by 65535 / d_max.
void save_depth_pgm(const DepthImage& img, const CameraModel& cam,
                    const std::string& path);
DepthImage load_depth_pgm(const std::string& path);

}  // namespace loco
