#include "crowdbqp/bench.hpp"

#include "crowdbqp/metrics.hpp"
#include "crowdbqp/motion_context.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <random>
#include <unordered_set>

namespace crowdbqp {

BqpProblem<double> make_benchmark_problem(int n, std::uint64_t seed, const BenchProblemOptions& opt) {
  if (n < 1 || opt.candidates < 1) throw std::invalid_argument("make_benchmark_problem: empty instance");
  std::mt19937_64 rng(seed);
  const double side = opt.spacing * std::sqrt(static_cast<double>(n));
  const double sigma = opt.target_size / 2;
  const int reach = static_cast<int>(std::lround(opt.target_size));
  std::uniform_real_distribution<double> pos(0.0, side), noise(0.0, opt.score_noise);
  std::uniform_int_distribution<int> off(-reach, reach);

  std::vector<Point> centers(static_cast<std::size_t>(n));
  for (auto& c : centers) c = Point(std::round(pos(rng)), std::round(pos(rng)));

  // candidates: distinct integer offsets around each target
  const int max_unique = (2 * reach + 1) * (2 * reach + 1);
  const int k = std::min(opt.candidates, max_unique);
  std::vector<Index> sizes(static_cast<std::size_t>(n), k);
  BlockLayout layout(sizes);
  std::vector<Point> cands;
  Eigen::VectorXd app(layout.num_vars()), mot(layout.num_vars()), nmot(layout.num_vars());
  for (int b = 0; b < n; ++b) {
    const Point& c = centers[static_cast<std::size_t>(b)];
    const Point truth = c + Point(off(rng), off(rng)) * 0.5;
    const Point predicted = truth + Point(off(rng), off(rng)) * 0.25;
    std::unordered_set<int> used;
    for (int i = 0; i < k;) {
      const int dx = off(rng), dy = off(rng);
      if (!used.insert(dx * 1000 + dy).second) continue;
      const Point q = c + Point(dx, dy);
      cands.push_back(q);
      const Index g = layout.global(b, i);
      app(g) = std::exp(-(q - truth).squaredNorm() / (2 * sigma * sigma)) + noise(rng);
      mot(g) = std::exp(-(q - predicted).squaredNorm() / (2 * sigma * sigma));
      nmot(g) = std::exp(-(q - predicted).squaredNorm() / (2 * sigma * sigma)) + noise(rng);
      ++i;
    }
  }

  LinearCosts<double> lin;
  lin.appearance = scores_to_costs(layout, app);
  lin.motion = scores_to_costs(layout, mot);
  lin.neighborhood = scores_to_costs(layout, nmot);

  // groups: targets sorted into horizontal bands, one spanning tree per band
  std::vector<int> labels(static_cast<std::size_t>(n));
  const int groups = std::max(1, std::min(opt.groups, n));
  for (int b = 0; b < n; ++b) {
    labels[static_cast<std::size_t>(b)] =
        std::min(groups - 1, static_cast<int>(centers[static_cast<std::size_t>(b)].y() / side * groups));
  }
  const GroupModel gm = build_group_model(centers, labels, 0);

  std::vector<QuadraticTerm<double>> quads;
  quads.push_back(laplacianize(proximity_similarity(cands, layout, sigma), LaplacianMode::repel, QuadKind::proximity));
  quads.push_back(laplacianize(group_similarity(cands, layout, gm, sigma, 0), LaplacianMode::attract, QuadKind::grouping));
  return build_problem(layout, std::move(lin), std::move(quads));
}

std::vector<BenchRow> bench_solvers(const BenchConfig& cfg) {
  std::vector<BenchRow> rows;
  for (int size : cfg.sizes) {
    for (int s = 0; s < cfg.seeds; ++s) {
      const std::uint64_t seed = 1000 * static_cast<std::uint64_t>(size) + static_cast<std::uint64_t>(s);
      const auto p = make_benchmark_problem(size, seed, cfg.problem);
      std::vector<SolverVariant> variants = cfg.variants;
      if (cfg.include_exact) {
        double combos = 1;
        for (Index b = 0; b < p.layout().num_blocks(); ++b) combos *= static_cast<double>(p.layout().size(b));
        if (combos <= 1e6) variants.push_back(SolverVariant::exact);
      }
      for (SolverVariant v : variants) {
        SolverConfig sc;
        sc.variant = v;
        sc.epsilon = cfg.epsilon;
        sc.max_iterations = cfg.max_iterations;
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = fw_solve(p, sc);
        BenchRow row;
        row.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        row.size = size;
        row.seed = seed;
        row.variant = to_string(v);
        row.num_vars = p.layout().num_vars();
        row.iterations = r.trace.iterations;
        row.objective = r.trace.records.back().objective;
        row.gap = r.trace.records.back().gap;
        row.converged = r.converged;
        for (std::size_t i = 1; i < r.trace.records.size(); ++i) {
          row.monotone &= r.trace.records[i].objective <= r.trace.records[i - 1].objective + 1e-10;
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << "size,seed,variant,num_vars,wall_time_ms,iterations,objective,gap,converged\n";
  for (const auto& r : rows) {
    os << r.size << ',' << r.seed << ',' << r.variant << ',' << r.num_vars << ',' << r.wall_time_ms << ','
       << r.iterations << ',' << r.objective << ',' << r.gap << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

std::vector<PruneBenchRow> bench_pruning(const Scene& scene, TrackerConfig cfg, const PruneConfig& prune) {
  std::vector<PruneBenchRow> rows;
  for (bool pruned : {false, true}) {
    cfg.prune = pruned ? std::optional<PruneConfig>(prune) : std::nullopt;
    const auto result = track_sequence(scene.frames, scene.truth.positions.front(), cfg);
    PruneBenchRow row;
    row.mode = pruned ? "pruned" : "dense";
    for (const auto& f : result.frames) {
      row.total_vars += f.num_vars;
      row.mean_frame_ms += f.frame_ms;
      row.mean_solve_ms += f.solve_ms;
    }
    if (!result.frames.empty()) {
      row.mean_frame_ms /= static_cast<double>(result.frames.size());
      row.mean_solve_ms /= static_cast<double>(result.frames.size());
    }
    row.accuracy15 = accuracy_curve(result.tracks, scene.truth, 15).at(15);
    row.swaps = count_identity_swaps(result.tracks, scene.truth);
    rows.push_back(row);
  }
  return rows;
}

void write_prune_bench_csv(std::ostream& os, const std::vector<PruneBenchRow>& rows) {
  os << "mode,total_vars,accuracy15,mean_frame_ms,mean_solve_ms,swaps\n";
  for (const auto& r : rows) {
    os << r.mode << ',' << r.total_vars << ',' << r.accuracy15 << ',' << r.mean_frame_ms << ','
       << r.mean_solve_ms << ',' << r.swaps << '\n';
  }
}

}  // namespace crowdbqp
