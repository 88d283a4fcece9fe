#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "loco/common.hpp"

namespace loco {

enum class TerrainFamily { Flat, StairsUp, StairsDown, Gap, Platform };

std::string family_name(TerrainFamily f);
TerrainFamily family_from_name(const std::string& name);

/// Parameters of one generated terrain block. Only the parameters of the
/// selected family are used; the rest are ignored.
struct TerrainSpec {
  TerrainFamily family = TerrainFamily::Flat;
  double rise = 0.15;             // stair riser height [m]
  double tread = 0.30;            // stair tread depth [m]
  double gap_width = 0.50;        // gap opening along x [m]
  double platform_height = 0.30;  // plateau height [m]
  double extent = 3.0;            // feature length along x [m]
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

// Regular-grid elevation map. Heights live at cell centers spaced
// `resolution` apart; the surface between centers is the bilinear patch, so
// risers and walls appear as one-cell-wide steep ramps. Immutable after
// generation; safe to share across threads.
struct Heightfield {
  double resolution = 0.02;  // meters per cell
  int cells_x = 0;           // along forward axis
  int cells_y = 0;           // along lateral axis
  double origin_x = 0.0;     // world position of cell (0,0)
  double origin_y = 0.0;
  std::vector<double> elevation;  // row-major, index = iy * cells_x + ix

  double at(int ix, int iy) const {
    return elevation[static_cast<std::size_t>(iy) * cells_x + ix];
  }
  double& at(int ix, int iy) {
    return elevation[static_cast<std::size_t>(iy) * cells_x + ix];
  }

  double min_x() const { return origin_x; }
  double min_y() const { return origin_y; }
  double max_x() const { return origin_x + resolution * (cells_x - 1); }
  double max_y() const { return origin_y + resolution * (cells_y - 1); }

  bool contains(double x, double y) const {
    return x >= min_x() && x <= max_x() && y >= min_y() && y <= max_y();
  }

  double max_elevation() const;
  double min_elevation() const;
};

/// Deterministically generate a heightfield for the given spec.
Heightfield generate(const TerrainSpec& spec);

/// Bilinear elevation query. Exact at cell centers. Throws std::out_of_range
/// outside the field.
double sample_height(const Heightfield& hf, double x, double y);

/// Robot-centric elevation samples on a yaw-aligned grid centered at the
/// base, relative to the terrain height under the base.
Eigen::MatrixXd height_scan(const Heightfield& hf, double base_x, double base_y,
                            double yaw, int rows, int cols, double spacing);

void save_heightfield(const Heightfield& hf, const std::string& path);
Heightfield load_heightfield(const std::string& path);
void write_heightfield(const Heightfield& hf, std::ostream& os);
Heightfield read_heightfield(std::istream& is);

}  // namespace loco
