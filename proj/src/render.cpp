#include "loco/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "loco/common.hpp"

namespace loco {

namespace {

constexpr double kDirNormTol = 1e-9;

void check_unit(const Vec3& dir) {
  if (std::abs(dir.norm() - 1.0) > kDirNormTol)
    throw std::invalid_argument("ray direction must be unit length");
}

}  // namespace

void CameraModel::validate() const {
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("camera: non-positive resolution");
  if (!(vertical_fov > 0.0) || !(vertical_fov < 3.141592653589793))
    throw std::invalid_argument("camera: vertical fov out of (0, pi)");
  if (!(d_max > 0.0)) throw std::invalid_argument("camera: d_max must be > 0");
}

Eigen::Matrix3d CameraModel::rotation() const {
  // level camera: optical z = world +x, image x = world -y, image y = world -z
  Eigen::Matrix3d r0;
  r0.col(0) = Vec3(0, -1, 0);
  r0.col(1) = Vec3(0, 0, -1);
  r0.col(2) = Vec3(1, 0, 0);
  Eigen::Matrix3d rz = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
  Eigen::Matrix3d ry =
      Eigen::AngleAxisd(pitch + pitch_down, Vec3::UnitY()).toRotationMatrix();
  Eigen::Matrix3d rx = Eigen::AngleAxisd(roll, Vec3::UnitX()).toRotationMatrix();
  return rz * ry * rx * r0;
}

Vec3 CameraModel::pixel_ray(int row, int col) const {
  double f = (height / 2.0) / std::tan(vertical_fov / 2.0);
  double px = (col + 0.5 - width / 2.0) / f;
  double py = (row + 0.5 - height / 2.0) / f;
  Vec3 d_cam(px, py, 1.0);
  return (rotation() * d_cam).normalized();
}

std::optional<double> ray_capsule(const Vec3& origin, const Vec3& dir,
                                  const Capsule& c) {
  check_unit(dir);
  if (!(c.radius > 0.0)) throw std::invalid_argument("capsule radius <= 0");

  double best = std::numeric_limits<double>::infinity();

  const Vec3 axis = c.b - c.a;
  const double axis_len2 = axis.squaredNorm();

  // infinite cylinder, result clipped to the segment span
  if (axis_len2 > 0.0) {
    const Vec3 oc = origin - c.a;
    const Vec3 d_perp = dir - dir.dot(axis) / axis_len2 * axis;
    const Vec3 o_perp = oc - oc.dot(axis) / axis_len2 * axis;
    const double qa = d_perp.squaredNorm();
    const double qb = 2.0 * d_perp.dot(o_perp);
    const double qc = o_perp.squaredNorm() - c.radius * c.radius;
    if (qa > 0.0) {
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        for (double t : {(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)}) {
          if (t < 0.0 || t >= best) continue;
          const double s = (origin + t * dir - c.a).dot(axis) / axis_len2;
          if (s >= 0.0 && s <= 1.0) best = std::min(best, t);
        }
      }
    }
  }

  // sphere caps
  for (const Vec3& center : {c.a, c.b}) {
    const Vec3 oc = origin - center;
    const double qb = 2.0 * dir.dot(oc);
    const double qc = oc.squaredNorm() - c.radius * c.radius;
    const double disc = qb * qb - 4.0 * qc;
    if (disc < 0.0) continue;
    const double sq = std::sqrt(disc);
    for (double t : {(-qb - sq) / 2.0, (-qb + sq) / 2.0})
      if (t >= 0.0 && t < best) best = t;
  }

  if (std::isinf(best)) return std::nullopt;
  return best;
}

namespace {

// Intersection of the ray with one bilinear patch spanning cell corners
// (ix, iy)..(ix+1, iy+1), restricted to t in [t0, t1]. The clearance
// f(t) = ray_z(t) - surface_z(t) is quadratic in t on a patch.
std::optional<double> patch_hit(const Vec3& o, const Vec3& d,
                                const Heightfield& hf, int ix, int iy,
                                double t0, double t1) {
  const double res = hf.resolution;
  const double x0 = hf.origin_x + res * ix;
  const double y0 = hf.origin_y + res * iy;
  const double h00 = hf.at(ix, iy), h10 = hf.at(ix + 1, iy);
  const double h01 = hf.at(ix, iy + 1), h11 = hf.at(ix + 1, iy + 1);

  // cheap reject: ray stays above the patch on [t0, t1]
  const double hmax = std::max({h00, h10, h01, h11});
  const double z_lo = std::min(o.z() + t0 * d.z(), o.z() + t1 * d.z());
  if (z_lo > hmax) return std::nullopt;

  // surface in local coords u = (x-x0)/res, v = (y-y0)/res:
  //   z(u,v) = h00 + (h10-h00) u + (h01-h00) v + (h00-h10-h01+h11) u v
  const double cu = h10 - h00;
  const double cv = h01 - h00;
  const double cuv = h00 - h10 - h01 + h11;

  const double ou = (o.x() - x0) / res, du = d.x() / res;
  const double ov = (o.y() - y0) / res, dv = d.y() / res;

  // f(t) = o.z + t d.z - z(u(t), v(t)) = A t^2 + B t + C
  const double A = -cuv * du * dv;
  const double B = d.z() - cu * du - cv * dv - cuv * (ou * dv + ov * du);
  const double C = o.z() - h00 - cu * ou - cv * ov - cuv * ou * ov;

  double roots[2];
  int nroots = 0;
  if (std::abs(A) < 1e-14) {
    if (B != 0.0) roots[nroots++] = -C / B;
  } else {
    const double disc = B * B - 4.0 * A * C;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      // numerically stable pair
      const double qq = -0.5 * (B + (B >= 0.0 ? sq : -sq));
      roots[nroots++] = qq / A;
      if (qq != 0.0) roots[nroots++] = C / qq;
    }
  }

  double best = std::numeric_limits<double>::infinity();
  const double pad = 1e-9;
  for (int i = 0; i < nroots; ++i) {
    const double t = roots[i];
    if (t < t0 - pad || t > t1 + pad || t < 0.0) continue;
    const double u = ou + t * du, v = ov + t * dv;
    if (u < -1e-6 || u > 1.0 + 1e-6 || v < -1e-6 || v > 1.0 + 1e-6) continue;
    best = std::min(best, std::max(t, 0.0));
  }
  if (std::isinf(best)) return std::nullopt;
  return best;
}

}  // namespace

std::optional<double> ray_heightfield(const Vec3& origin, const Vec3& dir,
                                      const Heightfield& hf, double t_max) {
  check_unit(dir);
  if (hf.cells_x < 2 || hf.cells_y < 2)
    throw std::invalid_argument("heightfield too small to raycast");

  const double res = hf.resolution;
  const double eps = 1e-12;

  // clip the ray to the field's xy rectangle
  double t_enter = 0.0, t_exit = t_max;
  for (int axis = 0; axis < 2; ++axis) {
    const double o = axis == 0 ? origin.x() : origin.y();
    const double d = axis == 0 ? dir.x() : dir.y();
    const double lo = axis == 0 ? hf.min_x() : hf.min_y();
    const double hi = axis == 0 ? hf.max_x() : hf.max_y();
    if (std::abs(d) < eps) {
      if (o < lo || o > hi) return std::nullopt;
    } else {
      double ta = (lo - o) / d, tb = (hi - o) / d;
      if (ta > tb) std::swap(ta, tb);
      t_enter = std::max(t_enter, ta);
      t_exit = std::min(t_exit, tb);
    }
  }
  if (t_enter > t_exit) return std::nullopt;

  // early out against the global elevation ceiling
  const double hmax = hf.max_elevation();
  if (dir.z() >= 0.0 && origin.z() + t_enter * dir.z() > hmax)
    return std::nullopt;

  // 2-D DDA over patches
  auto cell_of = [&](double w, double o_axis, int n) {
    int c = static_cast<int>(std::floor((w - o_axis) / res));
    return std::clamp(c, 0, n - 2);
  };

  double t = t_enter;
  Vec3 p = origin + t * dir;
  int ix = cell_of(p.x(), hf.origin_x, hf.cells_x);
  int iy = cell_of(p.y(), hf.origin_y, hf.cells_y);

  const int step_x = dir.x() > 0 ? 1 : -1;
  const int step_y = dir.y() > 0 ? 1 : -1;

  while (t <= t_exit) {
    // t at which the ray crosses the next cell boundary on each axis
    double tx = std::numeric_limits<double>::infinity();
    double ty = std::numeric_limits<double>::infinity();
    if (std::abs(dir.x()) > eps) {
      const double edge = hf.origin_x + res * (ix + (step_x > 0 ? 1 : 0));
      tx = (edge - origin.x()) / dir.x();
      if (tx <= t) tx = t + eps;
    }
    if (std::abs(dir.y()) > eps) {
      const double edge = hf.origin_y + res * (iy + (step_y > 0 ? 1 : 0));
      ty = (edge - origin.y()) / dir.y();
      if (ty <= t) ty = t + eps;
    }
    const double t_cell_end = std::min({tx, ty, t_exit});

    if (auto hit = patch_hit(origin, dir, hf, ix, iy, t, t_cell_end))
      return (*hit <= t_max) ? hit : std::nullopt;

    if (t_cell_end >= t_exit) break;
    if (tx <= ty) {
      ix += step_x;
      if (ix < 0 || ix > hf.cells_x - 2) return std::nullopt;
    }
    if (ty <= tx) {
      iy += step_y;
      if (iy < 0 || iy > hf.cells_y - 2) return std::nullopt;
    }
    t = t_cell_end;
  }
  return std::nullopt;
}

namespace {

double pixel_depth(const CameraModel& cam, const Heightfield& hf,
                   const CapsuleScene& scene, int row, int col) {
  const Vec3 dir = cam.pixel_ray(row, col);
  double depth = cam.d_max;
  if (auto t = ray_heightfield(cam.position, dir, hf, cam.d_max))
    depth = std::min(depth, *t);
  for (const Capsule& c : scene.capsules)
    if (auto t = ray_capsule(cam.position, dir, c))
      depth = std::min(depth, *t);
  return std::clamp(depth, 0.0, cam.d_max);
}

}  // namespace

DepthImage render_depth(const CameraModel& cam, const Heightfield& hf,
                        const CapsuleScene& scene, int threads) {
  cam.validate();
  DepthImage img;
  img.width = cam.width;
  img.height = cam.height;
  img.d_max = cam.d_max;
  img.raw.resize(cam.height, cam.width);

  auto render_rows = [&](int r0, int r1) {
    for (int r = r0; r < r1; ++r)
      for (int c = 0; c < cam.width; ++c)
        img.raw(r, c) = pixel_depth(cam, hf, scene, r, c);
  };

  threads = std::max(1, threads);
  if (threads == 1) {
    render_rows(0, cam.height);
  } else {
    std::vector<std::thread> pool;
    const int rows_per = (cam.height + threads - 1) / threads;
    for (int k = 0; k < threads; ++k) {
      const int r0 = k * rows_per;
      const int r1 = std::min(cam.height, r0 + rows_per);
      if (r0 < r1) pool.emplace_back(render_rows, r0, r1);
    }
    for (auto& th : pool) th.join();
  }

  img.normalized = img.raw / img.d_max;
  img.normalized.array() -= 0.5;
  return img;
}

std::vector<Vec3> foot_pointcloud(const Heightfield& hf, const Vec3& foot_pos,
                                  double foot_yaw, const FootScanConfig& cfg) {
  if (!hf.contains(foot_pos.x(), foot_pos.y()))
    throw std::out_of_range("foot pose outside field bounds");
  const double c = std::cos(foot_yaw), s = std::sin(foot_yaw);
  std::vector<Vec3> pts;
  const int nx =
      static_cast<int>(std::floor((cfg.forward_max - cfg.forward_min) /
                                  cfg.spacing + 1e-9)) + 1;
  const int ny =
      static_cast<int>(std::floor(2.0 * cfg.lateral_half / cfg.spacing + 1e-9)) + 1;
  pts.reserve(static_cast<std::size_t>(nx) * ny);
  for (int i = 0; i < nx; ++i) {
    const double lx = cfg.forward_min + i * cfg.spacing;
    for (int j = 0; j < ny; ++j) {
      const double ly = -cfg.lateral_half + j * cfg.spacing;
      const double wx = foot_pos.x() + c * lx - s * ly;
      const double wy = foot_pos.y() + s * lx + c * ly;
      const double wz = sample_height(hf, wx, wy);
      // world -> foot frame (rotate by -yaw about the foot point)
      const double rx = wx - foot_pos.x(), ry = wy - foot_pos.y();
      pts.emplace_back(c * rx + s * ry, -s * rx + c * ry, wz - foot_pos.z());
    }
  }
  return pts;
}

std::vector<Vec3> depth_to_points(const CameraModel& cam,
                                  const DepthImage& img) {
  if (img.width != cam.width || img.height != cam.height)
    throw std::invalid_argument("depth_to_points: image/camera size mismatch");
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(img.width) * img.height);
  const double f = (cam.height / 2.0) / std::tan(cam.vertical_fov / 2.0);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const double depth = img.raw(r, c);
      if (depth >= img.d_max) continue;  // no hit
      Vec3 d_cam((c + 0.5 - cam.width / 2.0) / f,
                 (r + 0.5 - cam.height / 2.0) / f, 1.0);
      pts.push_back(d_cam * (depth / d_cam.norm()));
    }
  }
  return pts;
}

void save_depth_pgm(const DepthImage& img, const CameraModel& cam,
                    const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  os << "P5\n" << img.width << " " << img.height << "\n65535\n";
  const double scale = 65535.0 / img.d_max;
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const double v = std::clamp(img.raw(r, c) * scale, 0.0, 65535.0);
      const auto q = static_cast<std::uint16_t>(std::llround(v));
      const unsigned char be[2] = {static_cast<unsigned char>(q >> 8),
                                   static_cast<unsigned char>(q & 0xff)};
      os.write(reinterpret_cast<const char*>(be), 2);
    }
  }
  if (!os) throw FormatError("write failed: '" + path + "'");

  std::ofstream meta(path + ".meta", std::ios::binary);
  if (!meta) throw FormatError("cannot open '" + path + ".meta' for writing");
  meta << "depth-meta v1\n";
  meta << "d_max " << fmt_double(img.d_max) << "\n";
  meta << "position " << fmt_double(cam.position.x()) << " "
       << fmt_double(cam.position.y()) << " " << fmt_double(cam.position.z())
       << "\n";
  meta << "yaw " << fmt_double(cam.yaw) << "\n";
  meta << "pitch " << fmt_double(cam.pitch) << "\n";
  meta << "roll " << fmt_double(cam.roll) << "\n";
  meta << "pitch_down " << fmt_double(cam.pitch_down) << "\n";
  meta << "vertical_fov " << fmt_double(cam.vertical_fov) << "\n";
}

DepthImage load_depth_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open '" + path + "'");
  std::string magic;
  is >> magic;
  if (magic != "P5") throw FormatError("pgm: bad magic");
  int w = 0, h = 0, maxval = 0;
  is >> w >> h >> maxval;
  if (w <= 0 || h <= 0 || maxval != 65535)
    throw FormatError("pgm: bad header");
  is.get();  // single whitespace after maxval

  DepthImage img;
  img.width = w;
  img.height = h;

  std::ifstream meta(path + ".meta", std::ios::binary);
  if (!meta) throw FormatError("cannot open '" + path + ".meta'");
  std::string line;
  if (!std::getline(meta, line) || line != "depth-meta v1")
    throw FormatError("depth meta: bad header");
  img.d_max = 0.0;
  while (std::getline(meta, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "d_max") ls >> img.d_max;
  }
  if (!(img.d_max > 0.0)) throw FormatError("depth meta: missing d_max");

  img.raw.resize(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      unsigned char be[2];
      if (!is.read(reinterpret_cast<char*>(be), 2))
        throw FormatError("pgm: truncated data");
      const std::uint16_t q = static_cast<std::uint16_t>((be[0] << 8) | be[1]);
      img.raw(r, c) = q * img.d_max / 65535.0;
    }
  }
  img.normalized = img.raw / img.d_max;
  img.normalized.array() -= 0.5;
  return img;
}

}  // namespace loco
