#include "loco/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace loco {

namespace {

constexpr double kApron = 1.0;      // flat approach/exit before and after the feature
constexpr double kGapDepth = 1.0;   // gaps read as unsupportable at this depth
constexpr double kFieldWidth = 4.0; // lateral extent, centered on y = 0

}  // namespace

std::string family_name(TerrainFamily f) {
  switch (f) {
    case TerrainFamily::Flat: return "flat";
    case TerrainFamily::StairsUp: return "stairs_up";
    case TerrainFamily::StairsDown: return "stairs_down";
    case TerrainFamily::Gap: return "gap";
    case TerrainFamily::Platform: return "platform";
  }
  throw std::invalid_argument("unknown terrain family");
}

TerrainFamily family_from_name(const std::string& name) {
  if (name == "flat") return TerrainFamily::Flat;
  if (name == "stairs_up") return TerrainFamily::StairsUp;
  if (name == "stairs_down") return TerrainFamily::StairsDown;
  if (name == "gap") return TerrainFamily::Gap;
  if (name == "platform") return TerrainFamily::Platform;
  throw std::invalid_argument("unknown terrain family: '" + name + "'");
}

void TerrainSpec::validate() const {
  if (extent <= 0.0) throw std::invalid_argument("terrain extent must be > 0");
  switch (family) {
    case TerrainFamily::Flat:
      break;
    case TerrainFamily::StairsUp:
    case TerrainFamily::StairsDown:
      if (rise <= 0.0) throw std::invalid_argument("stair rise must be > 0");
      if (tread <= 0.0) throw std::invalid_argument("stair tread must be > 0");
      break;
    case TerrainFamily::Gap:
      if (gap_width <= 0.0)
        throw std::invalid_argument("gap width must be > 0");
      break;
    case TerrainFamily::Platform:
      if (platform_height <= 0.0)
        throw std::invalid_argument("platform height must be > 0");
      break;
  }
}

double Heightfield::max_elevation() const {
  return *std::max_element(elevation.begin(), elevation.end());
}

double Heightfield::min_elevation() const {
  return *std::min_element(elevation.begin(), elevation.end());
}

namespace {

// Elevation of the ideal (continuous) terrain at forward coordinate x.
// The feature occupies x in [0, span]; aprons on both sides are flat.
double profile(const TerrainSpec& spec, double x, double span) {
  switch (spec.family) {
    case TerrainFamily::Flat:
      return 0.0;
    case TerrainFamily::StairsUp: {
      if (x < 0.0) return 0.0;
      // nudge keeps cells that land exactly on a riser on the upper tread
      double k = std::floor((x + 1e-9) / spec.tread);
      double kmax = std::floor((span + 1e-9) / spec.tread);
      return spec.rise * std::min(k, kmax);
    }
    case TerrainFamily::StairsDown: {
      if (x < 0.0) return 0.0;
      double k = std::floor((x + 1e-9) / spec.tread);
      double kmax = std::floor((span + 1e-9) / spec.tread);
      return -spec.rise * std::min(k, kmax);
    }
    case TerrainFamily::Gap:
      return (x >= 0.0 && x < spec.gap_width) ? -kGapDepth : 0.0;
    case TerrainFamily::Platform:
      return (x >= 0.0 && x < span) ? spec.platform_height : 0.0;
  }
  return 0.0;
}

}  // namespace

Heightfield generate(const TerrainSpec& spec) {
  spec.validate();

  double span = spec.extent;
  if (spec.family == TerrainFamily::Gap) span = std::max(span, spec.gap_width);

  Heightfield hf;
  hf.resolution = 0.02;
  hf.origin_x = -kApron;
  hf.origin_y = -kFieldWidth / 2.0;
  hf.cells_x = static_cast<int>(std::llround((span + 2.0 * kApron) / hf.resolution)) + 1;
  hf.cells_y = static_cast<int>(std::llround(kFieldWidth / hf.resolution)) + 1;
  hf.elevation.resize(static_cast<std::size_t>(hf.cells_x) * hf.cells_y);

  for (int iy = 0; iy < hf.cells_y; ++iy) {
    for (int ix = 0; ix < hf.cells_x; ++ix) {
      // Snap the cell's world x to the lattice to keep riser positions exact.
      double x = hf.origin_x + hf.resolution * ix;
      x = std::round(x / hf.resolution) * hf.resolution;
      hf.at(ix, iy) = profile(spec, x, span);
    }
  }
  return hf;
}

double sample_height(const Heightfield& hf, double x, double y) {
  if (!hf.contains(x, y))
    throw std::out_of_range("terrain query (" + fmt_double(x) + ", " +
                            fmt_double(y) + ") outside field bounds");
  double fx = (x - hf.origin_x) / hf.resolution;
  double fy = (y - hf.origin_y) / hf.resolution;
  int ix = std::min(static_cast<int>(fx), hf.cells_x - 2);
  int iy = std::min(static_cast<int>(fy), hf.cells_y - 2);
  if (hf.cells_x == 1) ix = 0;
  if (hf.cells_y == 1) iy = 0;
  double tx = fx - ix;
  double ty = fy - iy;
  int ix1 = std::min(ix + 1, hf.cells_x - 1);
  int iy1 = std::min(iy + 1, hf.cells_y - 1);
  double h00 = hf.at(ix, iy), h10 = hf.at(ix1, iy);
  double h01 = hf.at(ix, iy1), h11 = hf.at(ix1, iy1);
  return h00 * (1 - tx) * (1 - ty) + h10 * tx * (1 - ty) +
         h01 * (1 - tx) * ty + h11 * tx * ty;
}

Eigen::MatrixXd height_scan(const Heightfield& hf, double base_x, double base_y,
                            double yaw, int rows, int cols, double spacing) {
  if (rows <= 0 || cols <= 0 || spacing <= 0.0)
    throw std::invalid_argument("height_scan: bad grid");
  double base_h = sample_height(hf, base_x, base_y);
  double c = std::cos(yaw), s = std::sin(yaw);
  Eigen::MatrixXd out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int k = 0; k < cols; ++k) {
      // grid local coords, centered on the base, row axis = forward
      double lx = (r - (rows - 1) / 2.0) * spacing;
      double ly = (k - (cols - 1) / 2.0) * spacing;
      double wx = base_x + c * lx - s * ly;
      double wy = base_y + s * lx + c * ly;
      out(r, k) = sample_height(hf, wx, wy) - base_h;
    }
  }
  return out;
}

void write_heightfield(const Heightfield& hf, std::ostream& os) {
  os << "heightfield v1\n";
  os << "resolution " << fmt_double(hf.resolution) << "\n";
  os << "cells " << hf.cells_x << " " << hf.cells_y << "\n";
  os << "origin " << fmt_double(hf.origin_x) << " " << fmt_double(hf.origin_y)
     << "\n";
  for (int iy = 0; iy < hf.cells_y; ++iy) {
    for (int ix = 0; ix < hf.cells_x; ++ix) {
      if (ix) os << " ";
      os << fmt_double(hf.at(ix, iy));
    }
    os << "\n";
  }
}

void save_heightfield(const Heightfield& hf, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  write_heightfield(hf, os);
  if (!os) throw FormatError("write failed: '" + path + "'");
}

Heightfield read_heightfield(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "heightfield v1")
    throw FormatError("heightfield: bad header");
  Heightfield hf;
  std::string key;
  {
    std::getline(is, line);
    std::istringstream ls(line);
    ls >> key >> hf.resolution;
    if (key != "resolution" || !(hf.resolution > 0.0))
      throw FormatError("heightfield: bad resolution line");
  }
  {
    std::getline(is, line);
    std::istringstream ls(line);
    ls >> key >> hf.cells_x >> hf.cells_y;
    if (key != "cells" || hf.cells_x <= 0 || hf.cells_y <= 0)
      throw FormatError("heightfield: bad cells line");
  }
  {
    std::getline(is, line);
    std::istringstream ls(line);
    ls >> key >> hf.origin_x >> hf.origin_y;
    if (key != "origin") throw FormatError("heightfield: bad origin line");
  }
  hf.elevation.resize(static_cast<std::size_t>(hf.cells_x) * hf.cells_y);
  for (int iy = 0; iy < hf.cells_y; ++iy) {
    if (!std::getline(is, line))
      throw FormatError("heightfield: truncated elevation data");
    std::istringstream ls(line);
    for (int ix = 0; ix < hf.cells_x; ++ix) {
      if (!(ls >> hf.at(ix, iy)))
        throw FormatError("heightfield: short row " + std::to_string(iy));
      if (!std::isfinite(hf.at(ix, iy)))
        throw FormatError("heightfield: non-finite elevation");
    }
  }
  return hf;
}

Heightfield load_heightfield(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open '" + path + "'");
  return read_heightfield(is);
}

}  // namespace loco
