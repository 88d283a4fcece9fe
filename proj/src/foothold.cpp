#include "loco/foothold.hpp"

#include <algorithm>
#include <cmath>

namespace loco {

void FootholdConfig::validate() const {
  if (!(window_x > 0.0) || !(window_y > 0.0) || !(stride > 0.0) ||
      !(gate_time > 0.0) || !(roughness_max > 0.0) || !(tolerance_xz > 0.0))
    throw std::invalid_argument("foothold config: lengths must be > 0");
  if (!(normal_z_min > 0.0) || !(normal_z_min < 1.0))
    throw std::invalid_argument("foothold config: normal_z_min out of (0,1)");
}

void FootholdState::push_points(const std::vector<Vec3>& pts,
                                std::size_t cap) {
  buffer.insert(buffer.end(), pts.begin(), pts.end());
  if (buffer.size() > cap)
    buffer.erase(buffer.begin(),
                 buffer.begin() + static_cast<std::ptrdiff_t>(buffer.size() - cap));
}

std::vector<Vec3> forward_gate(const std::vector<Vec3>& points,
                               double forward_cmd, const FootholdConfig& cfg) {
  if (forward_cmd <= 0.0) return points;
  const double min_x = cfg.gate_time * forward_cmd;
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const Vec3& p : points)
    if (p.x() >= min_x) out.push_back(p);
  return out;
}

std::vector<Window> partition_windows(const std::vector<Vec3>& points,
                                      const FootholdConfig& cfg) {
  std::vector<Window> windows;
  if (points.empty()) return windows;

  double min_x = points[0].x(), max_x = points[0].x();
  double min_y = points[0].y(), max_y = points[0].y();
  for (const Vec3& p : points) {
    min_x = std::min(min_x, p.x());
    max_x = std::max(max_x, p.x());
    min_y = std::min(min_y, p.y());
    max_y = std::max(max_y, p.y());
  }

  auto window_count = [&](double extent, double size) {
    if (extent <= size) return 1;
    return static_cast<int>(std::floor((extent - size) / cfg.stride + 1e-9)) + 1;
  };
  const int nx = window_count(max_x - min_x, cfg.window_x);
  const int ny = window_count(max_y - min_y, cfg.window_y);

  windows.reserve(static_cast<std::size_t>(nx) * ny);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      Window w;
      w.x0 = min_x + i * cfg.stride;
      w.y0 = min_y + j * cfg.stride;
      for (const Vec3& p : points) {
        if (p.x() >= w.x0 && p.x() <= w.x0 + cfg.window_x &&
            p.y() >= w.y0 && p.y() <= w.y0 + cfg.window_y)
          w.points.push_back(p);
      }
      if (!w.points.empty()) windows.push_back(std::move(w));
    }
  }
  return windows;
}

WindowStats window_stats(const std::vector<Vec3>& points) {
  if (points.empty()) throw EmptyError("window_stats: empty window");

  WindowStats st;
  st.count = points.size();
  Vec3 sum = Vec3::Zero();
  for (const Vec3& p : points) sum += p;
  st.mean = sum / static_cast<double>(points.size());

  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  for (const Vec3& p : points) {
    const Vec3 d = p - st.mean;
    acc += d * d.transpose();
  }
  const double divisor = std::max<double>(static_cast<double>(points.size()) - 1.0, 1.0);
  st.cov = acc / divisor;

  const SymEig3 e = eig3_sym(st.cov);
  st.eigenvalues = e.vals;
  st.eigenvectors = e.vecs;
  st.roughness = std::sqrt(std::max(e.vals[0], 0.0));
  return st;
}

bool accept_window(const WindowStats& stats, const FootholdConfig& cfg) {
  return stats.roughness < cfg.roughness_max &&
         std::abs(stats.eigenvectors(2, 0)) > cfg.normal_z_min &&
         stats.mean.z() > cfg.recess_min;
}

void on_liftoff(FootholdState& state, double time, double forward_cmd,
                const FootholdConfig& cfg) {
  if (state.phase != ContactPhase::Stance)
    throw PhaseError("on_liftoff: foot already in swing");
  state.phase = ContactPhase::Swing;
  state.last_liftoff_time = time;

  state.candidates.clear();
  const std::vector<Vec3> gated = forward_gate(state.buffer, forward_cmd, cfg);
  for (const Window& w : partition_windows(gated, cfg)) {
    const WindowStats st = window_stats(w.points);
    if (accept_window(st, cfg)) state.candidates.push_back(st.mean);
  }
}

TouchdownResult score_contact(const std::vector<Vec3>& candidates,
                              const Vec3& contact_pos,
                              const FootholdConfig& cfg) {
  TouchdownResult res;
  if (candidates.empty()) return res;  // nothing supportable: reward 0
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const Vec3 d = candidates[k] - contact_pos;
    const double dist = cfg.distance_in_xy
                            ? std::hypot(d.x(), d.y())
                            : std::hypot(d.x(), d.z());
    if (dist < res.distance) {
      res.distance = dist;
      res.nearest = static_cast<int>(k);
    }
  }
  res.reward = std::exp(-res.distance / cfg.tolerance_xz);
  return res;
}

TouchdownResult touchdown_reward(FootholdState& state, double time,
                                 const Vec3& contact_pos,
                                 const FootholdConfig& cfg) {
  if (state.phase != ContactPhase::Swing)
    throw PhaseError("touchdown_reward: foot not in swing");
  state.phase = ContactPhase::Stance;
  state.last_touchdown_time = time;
  return score_contact(state.candidates, contact_pos, cfg);
}

}  // namespace loco
