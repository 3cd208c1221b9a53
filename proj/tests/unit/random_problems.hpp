// Test-only generators for random block-simplex problems.
#ifndef CROWDBQP_TESTS_RANDOM_PROBLEMS_HPP
#define CROWDBQP_TESTS_RANDOM_PROBLEMS_HPP

#include "crowdbqp/qp_core.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace crowdbqp::testing {

inline BlockLayout random_layout(std::mt19937_64& rng, int max_blocks, int max_size, int min_size = 1) {
  std::uniform_int_distribution<int> nb(1, max_blocks), ns(min_size, max_size);
  std::vector<Index> sizes(static_cast<std::size_t>(nb(rng)));
  for (auto& s : sizes) s = ns(rng);
  return BlockLayout(std::move(sizes));
}

/// Symmetric cross-block similarity with entries in [0,1], zero diagonal and zero within blocks.
inline SparseMatrix<double> random_similarity(std::mt19937_64& rng, const BlockLayout& layout,
                                              double density) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Eigen::Triplet<double>> t;
  const Index l = layout.num_vars();
  for (Index i = 0; i < l; ++i) {
    for (Index j = i + 1; j < l; ++j) {
      if (layout.block_of(i) == layout.block_of(j)) continue;
      if (u(rng) < density) {
        const double v = u(rng);
        t.emplace_back(i, j, v);
        t.emplace_back(j, i, v);
      }
    }
  }
  SparseMatrix<double> s(l, l);
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

/// Random PSD instance: random linear costs plus one repel and one attract Laplacian term.
inline BqpProblem<double> random_problem(std::mt19937_64& rng, const BlockLayout& layout,
                                         double density = 0.5) {
  std::uniform_real_distribution<double> u(-1.0, 0.0);
  const Index l = layout.num_vars();
  LinearCosts<double> lin = LinearCosts<double>::zeros(l);
  for (Index i = 0; i < l; ++i) {
    lin.appearance(i) = u(rng);
    lin.motion(i) = u(rng);
    lin.neighborhood(i) = u(rng);
  }
  std::vector<QuadraticTerm<double>> quads;
  quads.push_back(laplacianize(random_similarity(rng, layout, density), LaplacianMode::repel));
  quads.push_back(laplacianize(random_similarity(rng, layout, density), LaplacianMode::attract));
  return build_problem(layout, std::move(lin), std::move(quads));
}

/// Tracking-like instance: targets scattered in the plane, candidates jittered around each target,
/// Gaussian proximity between candidates of different targets and a chain formation term.
inline BqpProblem<double> planar_problem(std::mt19937_64& rng, const BlockLayout& layout,
                                         double spacing = 6.0, double sigma = 3.0) {
  const Index n = layout.num_blocks();
  const double side = spacing * std::sqrt(static_cast<double>(n));
  std::uniform_real_distribution<double> pos(0.0, side), off(-sigma, sigma), noise(0.0, 0.3);
  std::vector<Eigen::Vector2d> centers(static_cast<std::size_t>(n)), cand;
  for (auto& p : centers) p = {pos(rng), pos(rng)};
  LinearCosts<double> lin = LinearCosts<double>::zeros(layout.num_vars());
  for (Index b = 0; b < n; ++b) {
    const Eigen::Vector2d truth = centers[static_cast<std::size_t>(b)] + Eigen::Vector2d(off(rng), off(rng));
    for (Index i = 0; i < layout.size(b); ++i) {
      const Eigen::Vector2d q = centers[static_cast<std::size_t>(b)] + Eigen::Vector2d(off(rng), off(rng));
      cand.push_back(q);
      const double d2 = (q - truth).squaredNorm() / (2 * sigma * sigma);
      const Index g = layout.global(b, i);
      lin.appearance(g) = std::exp(-d2) + noise(rng);
      lin.motion(g) = std::exp(-d2) + noise(rng);
      lin.neighborhood(g) = std::exp(-d2) + noise(rng);
    }
  }
  lin.appearance = scores_to_costs(layout, lin.appearance);
  lin.motion = scores_to_costs(layout, lin.motion);
  lin.neighborhood = scores_to_costs(layout, lin.neighborhood);

  const Index l = layout.num_vars();
  std::vector<Eigen::Triplet<double>> prox, group;
  for (Index i = 0; i < l; ++i) {
    for (Index j = i + 1; j < l; ++j) {
      const Index bi = layout.block_of(i), bj = layout.block_of(j);
      if (bi == bj) continue;
      const double d = (cand[static_cast<std::size_t>(i)] - cand[static_cast<std::size_t>(j)]).norm();
      if (d <= 3 * sigma) {
        const double v = std::exp(-d * d / (2 * sigma * sigma));
        prox.emplace_back(i, j, v);
        prox.emplace_back(j, i, v);
      }
      if (bj == bi + 1) {
        const double rest =
            (centers[static_cast<std::size_t>(bi)] - centers[static_cast<std::size_t>(bj)]).norm();
        const double v = std::exp(-(d - rest) * (d - rest) / (2 * sigma * sigma));
        group.emplace_back(i, j, v);
        group.emplace_back(j, i, v);
      }
    }
  }
  SparseMatrix<double> s(l, l), gm(l, l);
  s.setFromTriplets(prox.begin(), prox.end());
  gm.setFromTriplets(group.begin(), group.end());
  std::vector<QuadraticTerm<double>> quads;
  quads.push_back(laplacianize(s, LaplacianMode::repel));
  quads.push_back(laplacianize(gm, LaplacianMode::attract));
  return build_problem(layout, std::move(lin), std::move(quads));
}

/// Random point of the block-simplex product.
inline Vector<double> random_feasible(std::mt19937_64& rng, const BlockLayout& layout) {
  std::exponential_distribution<double> e(1.0);
  Vector<double> x(layout.num_vars());
  for (Index b = 0; b < layout.num_blocks(); ++b) {
    double sum = 0;
    for (Index i = 0; i < layout.size(b); ++i) sum += (x(layout.global(b, i)) = e(rng));
    x.segment(layout.offset(b), layout.size(b)) /= sum;
  }
  return x;
}

/// Calls fn(assignment) for every vertex of the block-simplex product.
template <typename Fn>
void for_each_vertex(const BlockLayout& layout, Fn&& fn) {
  Assignment a{std::vector<Index>(static_cast<std::size_t>(layout.num_blocks()), 0)};
  while (true) {
    fn(a);
    Index b = layout.num_blocks() - 1;
    while (b >= 0) {
      if (++a.chosen[static_cast<std::size_t>(b)] < layout.size(b)) break;
      a.chosen[static_cast<std::size_t>(b)] = 0;
      --b;
    }
    if (b < 0) return;
  }
}

}  // namespace crowdbqp::testing

#endif  // CROWDBQP_TESTS_RANDOM_PROBLEMS_HPP
