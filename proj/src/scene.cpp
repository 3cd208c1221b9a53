#include "crowdbqp/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace crowdbqp {

void SceneConfig::validate() const {
  if (n_targets < 1 || n_frames < 1 || n_groups < 1 || palette_size < 1) {
    throw std::invalid_argument("SceneConfig: counts must be >= 1");
  }
  if (target_radius < 1) throw std::invalid_argument("SceneConfig: radius must be >= 1");
  if (width < 4 * target_radius || height < 4 * target_radius) {
    throw std::invalid_argument("SceneConfig: frame too small for the target radius");
  }
  if (velocity_min < 0 || velocity_max < velocity_min) {
    throw std::invalid_argument("SceneConfig: bad velocity range");
  }
  if (noise_sigma < 0 || formation_jitter < 0) throw std::invalid_argument("SceneConfig: negative noise");
}

std::vector<Rgb> make_palette(int size) {
  static const Rgb base[] = {{230, 40, 40},  {40, 200, 60},  {50, 80, 235},  {240, 220, 40},
                             {220, 60, 220}, {40, 220, 220}, {245, 140, 30}, {250, 250, 250}};
  std::vector<Rgb> out;
  for (int i = 0; i < size; ++i) {
    if (i < 8) {
      out.push_back(base[i]);
      continue;
    }
    // golden-angle hues beyond the fixed set
    const double h = std::fmod(i * 137.508, 360.0) / 60.0;
    const double x = 1 - std::abs(std::fmod(h, 2.0) - 1);
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h)) {
      case 0: r = 1, g = x; break;
      case 1: r = x, g = 1; break;
      case 2: g = 1, b = x; break;
      case 3: g = x, b = 1; break;
      case 4: r = x, b = 1; break;
      default: r = 1, b = x; break;
    }
    out.push_back({static_cast<std::uint8_t>(40 + 200 * r), static_cast<std::uint8_t>(40 + 200 * g),
                   static_cast<std::uint8_t>(40 + 200 * b)});
  }
  return out;
}

Image make_background(const SceneConfig& cfg) {
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> u(-18.0, 18.0), phase(0.0, 2 * std::numbers::pi);
  const double p1 = phase(rng), p2 = phase(rng);
  Image img(cfg.width, cfg.height);
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      const double base = 90 + 20 * std::sin(x * 0.07 + p1) * std::cos(y * 0.05 + p2);
      const double grain = u(rng);
      img.at(x, y, 0) = static_cast<std::uint8_t>(std::clamp(base + grain, 0.0, 255.0));
      img.at(x, y, 1) = static_cast<std::uint8_t>(std::clamp(base + grain + 6, 0.0, 255.0));
      img.at(x, y, 2) = static_cast<std::uint8_t>(std::clamp(base + grain - 6, 0.0, 255.0));
    }
  }
  return img;
}

void draw_targets(Image& img, std::span<const RenderedTarget> targets, double radius) {
  constexpr int kSub = 4;
  for (const auto& t : targets) {
    const int x0 = static_cast<int>(std::floor(t.position.x() - radius - 1));
    const int x1 = static_cast<int>(std::ceil(t.position.x() + radius + 1));
    const int y0 = static_cast<int>(std::floor(t.position.y() - radius - 1));
    const int y1 = static_cast<int>(std::ceil(t.position.y() + radius + 1));
    for (int y = std::max(y0, 0); y <= std::min(y1, img.height() - 1); ++y) {
      for (int x = std::max(x0, 0); x <= std::min(x1, img.width() - 1); ++x) {
        // pixel (x,y) covers [x-0.5, x+0.5) x [y-0.5, y+0.5)
        int inside = 0;
        for (int sy = 0; sy < kSub; ++sy) {
          for (int sx = 0; sx < kSub; ++sx) {
            const double px = x - 0.5 + (sx + 0.5) / kSub - t.position.x();
            const double py = y - 0.5 + (sy + 0.5) / kSub - t.position.y();
            if (px * px + py * py <= radius * radius) ++inside;
          }
        }
        if (inside == 0) continue;
        const double a = static_cast<double>(inside) / (kSub * kSub);
        const std::uint8_t col[3] = {t.color.r, t.color.g, t.color.b};
        for (int c = 0; c < 3; ++c) {
          img.at(x, y, c) = static_cast<std::uint8_t>(std::lround((1 - a) * img.at(x, y, c) + a * col[c]));
        }
      }
    }
  }
}

Image render_frame(std::span<const RenderedTarget> targets, const SceneConfig& cfg) {
  Image img = make_background(cfg);
  draw_targets(img, targets, cfg.target_radius);
  return img;
}

Scene generate_scene(const SceneConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double r = cfg.target_radius;
  const double lo_x = r, hi_x = cfg.width - 1 - r, lo_y = r, hi_y = cfg.height - 1 - r;
  const double min_sep = 2 * r + 1;
  const int n = cfg.n_targets, groups = std::min(cfg.n_groups, n);

  Scene scene;
  scene.truth.group_ids.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) scene.truth.group_ids[static_cast<std::size_t>(i)] = i % groups;

  // group headings spread evenly around the circle so that some groups oppose each other
  const double theta0 = 2 * std::numbers::pi * unit(rng);
  std::vector<Eigen::Vector2d> gvel(static_cast<std::size_t>(groups));
  std::vector<Point> gcenter(static_cast<std::size_t>(groups));
  std::vector<int> gsize(static_cast<std::size_t>(groups), 0);
  for (int i = 0; i < n; ++i) ++gsize[static_cast<std::size_t>(i % groups)];
  for (int g = 0; g < groups; ++g) {
    const double theta = theta0 + 2 * std::numbers::pi * g / groups;
    const double speed = cfg.velocity_min + (cfg.velocity_max - cfg.velocity_min) * unit(rng);
    gvel[static_cast<std::size_t>(g)] = speed * Eigen::Vector2d(std::cos(theta), std::sin(theta));
    gcenter[static_cast<std::size_t>(g)] = Point(lo_x + (hi_x - lo_x) * unit(rng), lo_y + (hi_y - lo_y) * unit(rng));
  }

  // formations grow as connected clusters: each member lands one to two separations from an
  // already placed member of its group
  std::vector<Point> pos(static_cast<std::size_t>(n));
  long attempts = 0;
  for (int i = 0; i < n; ++i) {
    const int g = i % groups;
    for (;;) {
      if (++attempts > 100000) {
        throw std::runtime_error("generate_scene: cannot place targets without overlap");
      }
      Point p = gcenter[static_cast<std::size_t>(g)];
      if (i >= groups) {
        std::uniform_int_distribution<int> anchor(0, i / groups - 1);
        const double a = 2 * std::numbers::pi * unit(rng), d = min_sep * (1 + unit(rng));
        p = pos[static_cast<std::size_t>(g + groups * anchor(rng))] + d * Eigen::Vector2d(std::cos(a), std::sin(a));
      }
      if (p.x() < lo_x || p.x() > hi_x || p.y() < lo_y || p.y() > hi_y) continue;
      bool clear = true;
      for (int j = 0; j < i && clear; ++j) clear = (p - pos[static_cast<std::size_t>(j)]).norm() >= min_sep;
      if (!clear) {
        // a blocked group seed moves elsewhere
        if (i < groups) {
          gcenter[static_cast<std::size_t>(g)] =
              Point(lo_x + (hi_x - lo_x) * unit(rng), lo_y + (hi_y - lo_y) * unit(rng));
        }
        continue;
      }
      pos[static_cast<std::size_t>(i)] = p;
      break;
    }
  }

  const auto palette = make_palette(cfg.palette_size);
  std::uniform_int_distribution<int> pick(0, cfg.palette_size - 1);
  for (int i = 0; i < n; ++i) scene.colors.push_back(palette[static_cast<std::size_t>(pick(rng))]);

  // members follow the group center; formation offsets are AR(1) around rest with stationary
  // deviation formation_jitter per axis
  std::vector<Eigen::Vector2d> rest(static_cast<std::size_t>(n)), offset(static_cast<std::size_t>(n));
  for (int g = 0; g < groups; ++g) {
    Point mean = Point::Zero();
    for (int i = g; i < n; i += groups) mean += pos[static_cast<std::size_t>(i)];
    gcenter[static_cast<std::size_t>(g)] = mean / gsize[static_cast<std::size_t>(g)];
  }
  for (int i = 0; i < n; ++i) {
    rest[static_cast<std::size_t>(i)] = offset[static_cast<std::size_t>(i)] =
        pos[static_cast<std::size_t>(i)] - gcenter[static_cast<std::size_t>(i % groups)];
  }

  const Image background = make_background(cfg);
  std::mt19937_64 noise_rng(cfg.seed * 0x2545f4914f6cdd1dULL + 7);
  std::normal_distribution<double> pixel_noise(0.0, cfg.noise_sigma > 0 ? cfg.noise_sigma : 1.0);
  std::vector<RenderedTarget> drawn(static_cast<std::size_t>(n));

  for (int f = 0; f < cfg.n_frames; ++f) {
    if (f > 0) {
      for (int i = 0; i < n; ++i) {
        auto& o = offset[static_cast<std::size_t>(i)];
        o = rest[static_cast<std::size_t>(i)] + 0.8 * (o - rest[static_cast<std::size_t>(i)]);
        if (cfg.formation_jitter > 0) o += 0.6 * cfg.formation_jitter * Eigen::Vector2d(gauss(rng), gauss(rng));
      }
      for (int g = 0; g < groups; ++g) {
        auto& v = gvel[static_cast<std::size_t>(g)];
        const Point next = gcenter[static_cast<std::size_t>(g)] + v;
        // reflect the whole group when any member would leave the frame
        bool flip_x = false, flip_y = false;
        for (int i = g; i < n; i += groups) {
          const Point p = next + offset[static_cast<std::size_t>(i)];
          flip_x |= (p.x() < lo_x && v.x() < 0) || (p.x() > hi_x && v.x() > 0);
          flip_y |= (p.y() < lo_y && v.y() < 0) || (p.y() > hi_y && v.y() > 0);
        }
        if (flip_x) v.x() = -v.x();
        if (flip_y) v.y() = -v.y();
        gcenter[static_cast<std::size_t>(g)] += v;
      }
      for (int i = 0; i < n; ++i) {
        Point p = gcenter[static_cast<std::size_t>(i % groups)] + offset[static_cast<std::size_t>(i)];
        p.x() = std::clamp(p.x(), lo_x, hi_x);
        p.y() = std::clamp(p.y(), lo_y, hi_y);
        pos[static_cast<std::size_t>(i)] = p;
      }
    }
    scene.truth.positions.push_back(pos);
    for (int i = 0; i < n; ++i) {
      drawn[static_cast<std::size_t>(i)] = {pos[static_cast<std::size_t>(i)], scene.colors[static_cast<std::size_t>(i)]};
    }
    Image img = background;
    draw_targets(img, drawn, r);
    if (cfg.noise_sigma > 0) {
      for (auto& v : img.data()) {
        v = static_cast<std::uint8_t>(std::clamp(std::lround(v + pixel_noise(noise_rng)), 0L, 255L));
      }
    }
    scene.frames.push_back(std::move(img));
  }
  return scene;
}

void write_ground_truth_csv(std::ostream& os, const GroundTruth& gt) {
  os << "frame,target_id,x,y,group_id\n";
  char buf[96];
  for (int f = 0; f < gt.num_frames(); ++f) {
    for (int i = 0; i < gt.num_targets(); ++i) {
      const Point& p = gt.positions[static_cast<std::size_t>(f)][static_cast<std::size_t>(i)];
      std::snprintf(buf, sizeof buf, "%d,%d,%.2f,%.2f,%d\n", f, i, p.x(), p.y(),
                    gt.group_ids[static_cast<std::size_t>(i)]);
      os << buf;
    }
  }
}

GroundTruth read_ground_truth_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("ground truth: empty file");
  if (line.rfind("frame,target_id,x,y", 0) != 0) throw std::runtime_error("ground truth: unexpected header");
  std::map<int, std::map<int, Point>> rows;
  std::map<int, int> groups;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 4) throw std::runtime_error("ground truth: short row at line " + std::to_string(lineno));
    try {
      const int f = std::stoi(cells[0]), id = std::stoi(cells[1]);
      rows[f][id] = Point(std::stod(cells[2]), std::stod(cells[3]));
      groups[id] = cells.size() > 4 ? std::stoi(cells[4]) : -1;
    } catch (const std::exception&) {
      throw std::runtime_error("ground truth: malformed row at line " + std::to_string(lineno));
    }
  }
  GroundTruth gt;
  const int n = groups.empty() ? 0 : groups.rbegin()->first + 1;
  gt.group_ids.assign(static_cast<std::size_t>(n), -1);
  for (auto [id, g] : groups) gt.group_ids[static_cast<std::size_t>(id)] = g;
  int expect = 0;
  for (auto& [f, targets] : rows) {
    if (f != expect++) throw std::runtime_error("ground truth: missing frame " + std::to_string(expect - 1));
    std::vector<Point> frame(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      auto it = targets.find(i);
      if (it == targets.end()) {
        throw std::runtime_error("ground truth: target " + std::to_string(i) + " missing in frame " + std::to_string(f));
      }
      frame[static_cast<std::size_t>(i)] = it->second;
    }
    gt.positions.push_back(std::move(frame));
  }
  return gt;
}

GroundTruth read_ground_truth_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return read_ground_truth_csv(is);
}

void write_scene(const std::filesystem::path& dir, const Scene& scene) {
  std::filesystem::create_directories(dir);
  for (std::size_t f = 0; f < scene.frames.size(); ++f) {
    write_ppm(dir / frame_filename(static_cast<int>(f)), scene.frames[f]);
  }
  std::ofstream os(dir / "gt.csv");
  if (!os) throw std::runtime_error("cannot write " + (dir / "gt.csv").string());
  write_ground_truth_csv(os, scene.truth);
}

}  // namespace crowdbqp
