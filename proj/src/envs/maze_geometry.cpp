#include <cmath>

#include <nlohmann/json.hpp>

#include "ppt/envs.hpp"
#include "ppt/errors.hpp"

namespace ppt::envs {

void MazeGeometry::validate() const {
  if (vertices.size() < 2) throw InvalidInput("maze: need at least 2 vertices");
  if (!(width > 0.0)) throw InvalidInput("maze: width must be > 0");
  if (undulation_amplitude < 0.0) throw InvalidInput("maze: negative undulation");
  if (undulation_amplitude > 0.0 && !(undulation_wavelength > 0.0))
    throw InvalidInput("maze: undulation wavelength must be > 0");
  for (std::size_t i = 1; i < vertices.size(); ++i)
    if ((vertices[i] - vertices[i - 1]).norm() < 1e-9)
      throw InvalidInput("maze: degenerate segment");
}

double MazeGeometry::total_length() const {
  double length = 0.0;
  for (std::size_t i = 1; i < vertices.size(); ++i)
    length += (vertices[i] - vertices[i - 1]).norm();
  return length;
}

MazeGeometry::Projection MazeGeometry::project(const Eigen::Vector2d& point) const {
  Projection best;
  double best_dist_sq = std::numeric_limits<double>::infinity();
  double arc_base = 0.0;
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    const Eigen::Vector2d a = vertices[i - 1];
    const Eigen::Vector2d ab = vertices[i] - a;
    const double seg_len = ab.norm();
    const double u = std::clamp((point - a).dot(ab) / (seg_len * seg_len), 0.0, 1.0);
    const Eigen::Vector2d closest = a + u * ab;
    const double dist_sq = (point - closest).squaredNorm();
    if (dist_sq < best_dist_sq) {
      best_dist_sq = dist_sq;
      best.arclength = arc_base + u * seg_len;
      best.closest = closest;
      best.tangent = ab / seg_len;
      const Eigen::Vector2d offset = point - closest;
      // +lateral is to the left of travel
      best.lateral = best.tangent.x() * offset.y() - best.tangent.y() * offset.x();
    }
    arc_base += seg_len;
  }
  return best;
}

Eigen::Vector2d MazeGeometry::point_at(double arclength) const {
  double remaining = std::clamp(arclength, 0.0, total_length());
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    const Eigen::Vector2d a = vertices[i - 1];
    const Eigen::Vector2d ab = vertices[i] - a;
    const double seg_len = ab.norm();
    if (remaining <= seg_len) return a + (remaining / seg_len) * ab;
    remaining -= seg_len;
  }
  return vertices.back();
}

double MazeGeometry::floor_height(double arclength) const {
  if (undulation_amplitude <= 0.0) return 0.0;
  const double s = std::clamp(arclength, 0.0, total_length());
  return 0.5 * undulation_amplitude *
         (1.0 - std::cos(2.0 * M_PI * s / undulation_wavelength));
}

double MazeGeometry::initial_heading() const {
  const Eigen::Vector2d dir = vertices[1] - vertices[0];
  return std::atan2(dir.y(), dir.x());
}

std::string MazeGeometry::to_json() const {
  nlohmann::json j;
  std::vector<std::vector<double>> verts;
  for (const auto& v : vertices) verts.push_back({v.x(), v.y()});
  j["vertices"] = verts;
  j["width"] = width;
  j["undulation_amplitude"] = undulation_amplitude;
  j["undulation_wavelength"] = undulation_wavelength;
  return j.dump(2);
}

MazeGeometry MazeGeometry::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  MazeGeometry geom;
  for (const auto& v : j.at("vertices"))
    geom.vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
  geom.width = j.at("width").get<double>();
  geom.undulation_amplitude = j.value("undulation_amplitude", 0.0);
  geom.undulation_wavelength = j.value("undulation_wavelength", 0.5);
  geom.validate();
  return geom;
}

MazeGeometry generate_maze(const TaskConfig& cfg, Rng& rng) {
  MazeGeometry geom;
  geom.width = rng.uniform(cfg.corridor_width_lo, cfg.corridor_width_hi);

  const double heading = rng.uniform(-cfg.heading_jitter, cfg.heading_jitter);
  const Eigen::Vector2d dir1(std::cos(heading), std::sin(heading));
  geom.vertices.emplace_back(0.0, 0.0);

  if (!cfg.maze_with_bend) {
    geom.vertices.emplace_back(cfg.maze_length * dir1);
  } else {
    const double bend_at = rng.uniform(0.35, 0.65) * cfg.maze_length;
    const double angle =
        (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(cfg.turn_lo, cfg.turn_hi);
    geom.vertices.emplace_back(bend_at * dir1);
    double heading2 = heading + angle;
    double used = bend_at;
    if (cfg.maze_with_disc) {
      // round the corner with a sampled arc (the disc-like segment)
      const double arc_radius = 0.08;
      const int arc_steps = std::max(2, static_cast<int>(std::ceil(std::abs(angle) / 0.17)));
      Eigen::Vector2d pos = geom.vertices.back();
      for (int i = 1; i <= arc_steps; ++i) {
        const double h = heading + angle * static_cast<double>(i) / arc_steps;
        const double step_len = arc_radius * std::abs(angle) / arc_steps;
        pos += step_len * Eigen::Vector2d(std::cos(h), std::sin(h));
        geom.vertices.push_back(pos);
        used += step_len;
      }
    }
    const double remaining = std::max(0.1, cfg.maze_length - used);
    geom.vertices.emplace_back(
        geom.vertices.back() +
        remaining * Eigen::Vector2d(std::cos(heading2), std::sin(heading2)));
  }

  if (cfg.maze_undulation && cfg.undulation_max > 0.0) {
    geom.undulation_amplitude = rng.uniform(0.005, 0.9 * cfg.undulation_max);
    geom.undulation_wavelength = rng.uniform(0.3, 0.6);
  }
  geom.validate();
  return geom;
}

}  // namespace ppt::envs
