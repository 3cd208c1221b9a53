#include "crowdbqp/motion_context.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

namespace crowdbqp {

MotionModel MotionModel::for_target_size(double target_size) {
  MotionModel mm;
  const double s = target_size / 2;
  mm.sigma = Eigen::Matrix2d::Identity() * s * s;
  return mm;
}

Eigen::VectorXd gaussian_scores(const Point& mean, const MotionModel& mm,
                                std::span<const Point> candidates) {
  Eigen::LLT<Eigen::Matrix2d> llt(mm.sigma);
  if (llt.info() != Eigen::Success || !mm.sigma.isApprox(mm.sigma.transpose())) {
    throw std::invalid_argument("motion covariance is not symmetric positive definite");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Eigen::Vector2d d = candidates[i] - mean;
    out(static_cast<Eigen::Index>(i)) = std::exp(-0.5 * d.dot(llt.solve(d)));
  }
  return out;
}

Eigen::VectorXd motion_cost(const TargetState& state, const MotionModel& mm,
                            std::span<const Point> candidates) {
  if (candidates.empty()) throw std::invalid_argument("motion_cost: no candidates");
  return gaussian_scores(mm.predict(state), mm, candidates);
}

namespace {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      a = parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
    }
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    return true;
  }
};

}  // namespace

std::vector<int> coherent_groups(const std::vector<std::vector<Point>>& histories,
                                 const CoherenceConfig& cfg) {
  const int n = static_cast<int>(histories.size());
  DisjointSets sets(n);
  for (int i = 0; i < n; ++i) {
    const auto& hi = histories[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < n; ++j) {
      const auto& hj = histories[static_cast<std::size_t>(j)];
      // aligned on the most recent frame
      const int len = std::min({static_cast<int>(hi.size()), static_cast<int>(hj.size()), cfg.window + 1});
      if (len < 2) continue;
      double dot = 0, ni = 0, nj = 0, dist = 0;
      for (int t = 0; t < len; ++t) {
        const Point& pi = hi[hi.size() - static_cast<std::size_t>(len - t)];
        const Point& pj = hj[hj.size() - static_cast<std::size_t>(len - t)];
        dist += (pi - pj).norm();
        if (t == 0) continue;
        const Eigen::Vector2d vi = pi - hi[hi.size() - static_cast<std::size_t>(len - t + 1)];
        const Eigen::Vector2d vj = pj - hj[hj.size() - static_cast<std::size_t>(len - t + 1)];
        dot += vi.dot(vj);
        ni += vi.squaredNorm();
        nj += vj.squaredNorm();
      }
      double cosine;
      if (ni == 0 && nj == 0) cosine = 1;  // both stationary
      else if (ni == 0 || nj == 0) cosine = 0;
      else cosine = dot / std::sqrt(ni * nj);
      if (cosine >= cfg.min_cosine && dist / len <= cfg.max_distance) sets.unite(i, j);
    }
  }
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::unordered_map<int, int> relabel;
  for (int i = 0; i < n; ++i) {
    auto [it, fresh] = relabel.emplace(sets.find(i), static_cast<int>(relabel.size()));
    labels[static_cast<std::size_t>(i)] = it->second;
  }
  return labels;
}

Eigen::Vector2d fit_velocity(std::span<const Point> history, int window) {
  const std::size_t m = std::min(history.size(), static_cast<std::size_t>(std::max(window, 1)));
  if (m < 2) return Eigen::Vector2d::Zero();
  const auto tail = history.subspan(history.size() - m);
  const double tmean = (static_cast<double>(m) - 1) / 2;
  Eigen::Vector2d pmean = Eigen::Vector2d::Zero();
  for (const auto& p : tail) pmean += p;
  pmean /= static_cast<double>(m);
  Eigen::Vector2d num = Eigen::Vector2d::Zero();
  double den = 0;
  for (std::size_t t = 0; t < m; ++t) {
    const double dt = static_cast<double>(t) - tmean;
    num += dt * (tail[t] - pmean);
    den += dt * dt;
  }
  return num / den;
}

void assign_neighbor_weights(NeighborSet& ns, double u) {
  if (ns.empty()) return;
  if (!(u > 0)) throw std::invalid_argument("assign_neighbor_weights: u must be > 0");
  double dmin = ns.front().distance;
  for (const auto& nb : ns) dmin = std::min(dmin, nb.distance);
  double sum = 0;
  for (auto& nb : ns) sum += (nb.weight = std::exp(-(nb.distance - dmin) / u));
  for (auto& nb : ns) nb.weight /= sum;
}

std::vector<NeighborSet> build_neighbor_sets(const std::vector<TargetState>& targets,
                                             double target_size, int max_neighbors) {
  std::vector<NeighborSet> out(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& ti = targets[i];
    if (ti.group_id < 0) continue;
    NeighborSet& ns = out[i];
    for (std::size_t j = 0; j < targets.size(); ++j) {
      if (j == i || targets[j].group_id != ti.group_id) continue;
      ns.push_back({targets[j].id, targets[j].velocity, (targets[j].position - ti.position).norm(), 0.0});
    }
    std::stable_sort(ns.begin(), ns.end(),
                     [](const Neighbor& a, const Neighbor& b) { return a.distance < b.distance; });
    if (ns.size() > static_cast<std::size_t>(max_neighbors)) ns.resize(static_cast<std::size_t>(max_neighbors));
    assign_neighbor_weights(ns, target_size);
  }
  return out;
}

Eigen::VectorXd neighborhood_motion_cost(const TargetState& target, const NeighborSet& neighbors,
                                         const MotionModel& mm, std::span<const Point> candidates) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(candidates.size()));
  for (const auto& nb : neighbors) {
    out += nb.weight * gaussian_scores(target.position + nb.velocity, mm, candidates);
  }
  return out;
}

SparseMatrix<double> proximity_similarity(std::span<const Point> candidates,
                                          const BlockLayout& layout, double sigma) {
  if (!(sigma > 0)) throw std::invalid_argument("proximity_similarity: sigma must be > 0");
  const Index l = layout.num_vars();
  if (static_cast<Index>(candidates.size()) != l) {
    throw std::invalid_argument("proximity_similarity: candidate count does not match layout");
  }
  const double cutoff = 3 * sigma;
  auto cell_of = [&](const Point& p) {
    return std::pair<long, long>(static_cast<long>(std::floor(p.x() / cutoff)),
                                 static_cast<long>(std::floor(p.y() / cutoff)));
  };
  auto cell_key = [](long cx, long cy) { return (static_cast<std::int64_t>(cx) << 32) ^ (cy & 0xffffffff); };
  std::unordered_map<std::int64_t, std::vector<Index>> grid;
  for (Index i = 0; i < l; ++i) {
    auto [cx, cy] = cell_of(candidates[static_cast<std::size_t>(i)]);
    grid[cell_key(cx, cy)].push_back(i);
  }
  std::vector<Eigen::Triplet<double>> t;
  for (Index i = 0; i < l; ++i) {
    const Point& pi = candidates[static_cast<std::size_t>(i)];
    const Index bi = layout.block_of(i);
    auto [cx, cy] = cell_of(pi);
    for (long dy = -1; dy <= 1; ++dy) {
      for (long dx = -1; dx <= 1; ++dx) {
        auto it = grid.find(cell_key(cx + dx, cy + dy));
        if (it == grid.end()) continue;
        for (Index j : it->second) {
          if (j <= i || layout.block_of(j) == bi) continue;
          const double d2 = (pi - candidates[static_cast<std::size_t>(j)]).squaredNorm();
          if (d2 > cutoff * cutoff) continue;
          const double v = std::exp(-d2 / (2 * sigma * sigma));
          t.emplace_back(i, j, v);
          t.emplace_back(j, i, v);
        }
      }
    }
  }
  SparseMatrix<double> s(l, l);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

std::vector<MstEdge> build_group_mst(std::span<const Point> positions, std::span<const int> ids) {
  const int m = static_cast<int>(positions.size());
  if (!ids.empty() && static_cast<int>(ids.size()) != m) {
    throw std::invalid_argument("build_group_mst: ids do not match positions");
  }
  auto id = [&](int i) { return ids.empty() ? i : ids[static_cast<std::size_t>(i)]; };
  std::vector<std::tuple<double, int, int, int, int>> edges;  // weight, min id, max id, i, j
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const double w = (positions[static_cast<std::size_t>(i)] - positions[static_cast<std::size_t>(j)]).norm();
      edges.emplace_back(w, std::min(id(i), id(j)), std::max(id(i), id(j)), i, j);
    }
  }
  std::sort(edges.begin(), edges.end());
  DisjointSets sets(m);
  std::vector<MstEdge> tree;
  for (const auto& [w, a, b, i, j] : edges) {
    if (sets.unite(i, j)) tree.push_back({a, b, w});
    if (static_cast<int>(tree.size()) == m - 1) break;
  }
  return tree;
}

GroupModel build_group_model(const std::vector<Point>& positions, std::vector<int> labels, int frame,
                             int refresh_period) {
  if (labels.size() != positions.size()) {
    throw std::invalid_argument("build_group_model: one label per target required");
  }
  GroupModel g;
  g.refreshed_at = frame;
  g.refresh_period = refresh_period;
  std::unordered_map<int, std::vector<int>> members;
  std::vector<int> order;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) continue;
    auto [it, fresh] = members.try_emplace(labels[i]);
    if (fresh) order.push_back(labels[i]);
    it->second.push_back(static_cast<int>(i));
  }
  for (int label : order) {
    const auto& ids = members[label];
    std::vector<Point> pts;
    for (int i : ids) pts.push_back(positions[static_cast<std::size_t>(i)]);
    for (const auto& e : build_group_mst(pts, ids)) g.edges.push_back(e);
  }
  g.labels = std::move(labels);
  return g;
}

SparseMatrix<double> group_similarity(std::span<const Point> candidates, const BlockLayout& layout,
                                      const GroupModel& g, double sigma_g, int frame) {
  if (!(sigma_g > 0)) throw std::invalid_argument("group_similarity: sigma_g must be > 0");
  if (frame - g.refreshed_at > g.refresh_period) {
    throw std::runtime_error("group_similarity: group model is stale (refreshed at frame " +
                             std::to_string(g.refreshed_at) + ", now " + std::to_string(frame) + ")");
  }
  const Index l = layout.num_vars();
  if (static_cast<Index>(candidates.size()) != l) {
    throw std::invalid_argument("group_similarity: candidate count does not match layout");
  }
  std::vector<Eigen::Triplet<double>> t;
  const double cutoff = 3 * sigma_g;
  for (const auto& e : g.edges) {
    if (e.a >= layout.num_blocks() || e.b >= layout.num_blocks()) {
      throw std::invalid_argument("group_similarity: tree edge outside layout");
    }
    for (Index i = 0; i < layout.size(e.a); ++i) {
      const Index gi = layout.global(e.a, i);
      for (Index j = 0; j < layout.size(e.b); ++j) {
        const Index gj = layout.global(e.b, j);
        const double dev = (candidates[static_cast<std::size_t>(gi)] - candidates[static_cast<std::size_t>(gj)]).norm() - e.rest;
        if (std::abs(dev) > cutoff) continue;
        const double v = std::exp(-dev * dev / (2 * sigma_g * sigma_g));
        t.emplace_back(gi, gj, v);
        t.emplace_back(gj, gi, v);
      }
    }
  }
  SparseMatrix<double> s(l, l);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

}  // namespace crowdbqp
