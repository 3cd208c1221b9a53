// Synthetic crowd sequences: coherent groups of disk targets over a textured background.
#ifndef CROWDBQP_SCENE_HPP
#define CROWDBQP_SCENE_HPP

#include "crowdbqp/image.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace crowdbqp {

struct SceneConfig {
  int n_targets = 100;
  int n_frames = 200;
  int width = 320, height = 240;
  double target_radius = 3;
  int n_groups = 4;
  int palette_size = 4;
  double velocity_min = 1.5, velocity_max = 2.5;  ///< group speed, pixels/frame
  double noise_sigma = 8;                          ///< per-frame pixel noise
  double formation_jitter = 0.2;                   ///< stationary deviation of member offsets, pixels
  std::uint64_t seed = 1;

  double target_size() const { return 2 * target_radius; }
  void validate() const;
};

struct GroundTruth {
  std::vector<std::vector<Point>> positions;  ///< [frame][target]
  std::vector<int> group_ids;                 ///< per target

  int num_frames() const { return static_cast<int>(positions.size()); }
  int num_targets() const { return static_cast<int>(group_ids.size()); }
};

struct RenderedTarget {
  Point position;
  Rgb color;
};

struct Scene {
  std::vector<Image> frames;
  GroundTruth truth;
  std::vector<Rgb> colors;  ///< per target
};

std::vector<Rgb> make_palette(int size);

/// Static textured background, deterministic in cfg.seed.
Image make_background(const SceneConfig& cfg);

/// Anti-aliased disks over the background; higher index draws on top.
Image render_frame(std::span<const RenderedTarget> targets, const SceneConfig& cfg);
void draw_targets(Image& img, std::span<const RenderedTarget> targets, double radius);

Scene generate_scene(const SceneConfig& cfg);

/// frame_%06d.ppm files and gt.csv
void write_scene(const std::filesystem::path& dir, const Scene& scene);

void write_ground_truth_csv(std::ostream& os, const GroundTruth& gt);
GroundTruth read_ground_truth_csv(std::istream& is);
GroundTruth read_ground_truth_csv(const std::filesystem::path& path);

}  // namespace crowdbqp

#endif  // CROWDBQP_SCENE_HPP
