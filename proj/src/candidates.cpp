#include "crowdbqp/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace crowdbqp {

namespace {

std::int64_t key(long x, long y) { return (static_cast<std::int64_t>(x) << 32) ^ (y & 0xffffffff); }

}  // namespace

void PruneConfig::validate() const {
  if (m < 1) throw std::invalid_argument("PruneConfig: m must be >= 1");
  if (extra_per_extremum < 0) throw std::invalid_argument("PruneConfig: negative extra count");
  if (neighborhood < 1) throw std::invalid_argument("PruneConfig: neighborhood must be >= 1");
}

std::vector<Point> dense_candidates(const SearchRegion& region, int stride, int width, int height) {
  if (stride < 1) throw std::invalid_argument("dense_candidates: stride must be >= 1");
  if (region.half_extent < 1) throw std::invalid_argument("dense_candidates: half_extent must be >= 1");
  const long cx = std::lround(region.center.x()), cy = std::lround(region.center.y());
  std::vector<Point> out;
  for (long dy = -region.half_extent; dy <= region.half_extent; dy += stride) {
    const long y = cy + dy;
    if (y < 0 || y >= height) continue;
    for (long dx = -region.half_extent; dx <= region.half_extent; dx += stride) {
      const long x = cx + dx;
      if (x < 0 || x >= width) continue;
      out.emplace_back(static_cast<double>(x), static_cast<double>(y));
    }
  }
  if (out.empty()) throw std::invalid_argument("dense_candidates: region lies outside the frame");
  return out;
}

std::vector<Eigen::Vector2i> neighborhood_offsets(const PruneConfig& cfg) {
  const int lo = -cfg.neighborhood / 2, hi = lo + cfg.neighborhood - 1;
  std::vector<Eigen::Vector2i> all;
  for (int dy = lo; dy <= hi; ++dy)
    for (int dx = lo; dx <= hi; ++dx)
      if (dx != 0 || dy != 0) all.emplace_back(dx, dy);
  auto group = [](const Eigen::Vector2i& o) {
    if (o.x() % 2 == 0 && o.y() % 2 == 0) return 0;
    return std::abs(o.x()) == std::abs(o.y()) ? 1 : 2;
  };
  std::stable_sort(all.begin(), all.end(), [&](const Eigen::Vector2i& a, const Eigen::Vector2i& b) {
    const int ga = group(a), gb = group(b);
    if (ga != gb) return ga < gb;
    return a.squaredNorm() < b.squaredNorm();
  });
  all.resize(std::min(all.size(), static_cast<std::size_t>(cfg.extra_per_extremum)));
  return all;
}

std::vector<std::size_t> local_maxima(std::span<const Point> dense, const Eigen::VectorXd& scores,
                                      std::size_t limit) {
  if (static_cast<std::size_t>(scores.size()) != dense.size()) {
    throw std::invalid_argument("local_maxima: scores not aligned with candidates");
  }
  // grid spacing inferred from the smallest positive coordinate difference
  long step = 0;
  for (const auto& p : dense) {
    for (long d : {std::lround(std::abs(p.x() - dense[0].x())), std::lround(std::abs(p.y() - dense[0].y()))}) {
      if (d > 0) step = step == 0 ? d : std::gcd(step, d);
    }
  }
  if (step == 0) step = 1;
  std::unordered_map<std::int64_t, std::size_t> where;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    where.emplace(key(std::lround(dense[i].x()), std::lround(dense[i].y())), i);
  }
  std::vector<std::size_t> maxima;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    const long x = std::lround(dense[i].x()), y = std::lround(dense[i].y());
    bool is_max = true;
    for (long dy = -1; dy <= 1 && is_max; ++dy) {
      for (long dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        auto it = where.find(key(x + dx * step, y + dy * step));
        if (it != where.end() && scores(static_cast<Eigen::Index>(it->second)) > scores(static_cast<Eigen::Index>(i))) {
          is_max = false;
          break;
        }
      }
    }
    if (is_max) maxima.push_back(i);
  }
  std::stable_sort(maxima.begin(), maxima.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });
  if (maxima.size() > limit) maxima.resize(limit);
  return maxima;
}

std::vector<Point> prune_candidates(std::span<const Point> dense, const Eigen::VectorXd& scores,
                                    const PruneConfig& cfg) {
  cfg.validate();
  if (dense.empty()) throw std::invalid_argument("prune_candidates: no candidates");
  const auto maxima = local_maxima(dense, scores, static_cast<std::size_t>(cfg.m));
  Eigen::Vector2d lo = dense[0], hi = dense[0];
  for (const auto& p : dense) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const auto offsets = neighborhood_offsets(cfg);
  std::vector<Point> out;
  std::unordered_map<std::int64_t, bool> seen;
  auto push = [&](const Point& p) {
    if ((p.array() < lo.array()).any() || (p.array() > hi.array()).any()) return;
    if (seen.emplace(key(std::lround(p.x()), std::lround(p.y())), true).second) out.push_back(p);
  };
  for (std::size_t i : maxima) push(dense[i]);
  for (std::size_t i : maxima) {
    for (const auto& o : offsets) push(dense[i] + o.cast<double>());
  }
  return out;
}

}  // namespace crowdbqp
