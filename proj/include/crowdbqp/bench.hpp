// Solver benchmarks on tracking-like frame problems, and the pruning comparison.
#ifndef CROWDBQP_BENCH_HPP
#define CROWDBQP_BENCH_HPP

#include "crowdbqp/fw_solver.hpp"
#include "crowdbqp/scene.hpp"
#include "crowdbqp/tracker.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace crowdbqp {

struct BenchProblemOptions {
  int candidates = 30;         ///< per target
  double target_size = 6;
  double spacing = 9;          ///< mean distance between neighbouring targets, pixels
  int groups = 4;
  double score_noise = 0.3;
};

/// One synthetic frame problem: targets scattered in a square, jittered candidates around each,
/// noisy Gaussian scores, proximity and group-formation terms.
BqpProblem<double> make_benchmark_problem(int n, std::uint64_t seed,
                                          const BenchProblemOptions& opt = {});

struct BenchConfig {
  std::vector<int> sizes{25, 50, 100, 200};
  int seeds = 5;
  std::vector<SolverVariant> variants{SolverVariant::fw, SolverVariant::fw_away, SolverVariant::fw_swap};
  double epsilon = 0.01;
  int max_iterations = 100000;
  bool include_exact = true;   ///< only where the enumeration fits
  BenchProblemOptions problem;
};

struct BenchRow {
  int size = 0;
  std::uint64_t seed = 0;
  std::string variant;
  Index num_vars = 0;
  double wall_time_ms = 0;
  int iterations = 0;
  double objective = 0;
  double gap = 0;
  bool converged = false;
  bool monotone = true;  ///< objective never increased by more than 1e-10
};

std::vector<BenchRow> bench_solvers(const BenchConfig& cfg);
void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows);

struct PruneBenchRow {
  std::string mode;        ///< dense or pruned
  long total_vars = 0;     ///< summed over frames
  double accuracy15 = 0;
  double mean_frame_ms = 0;
  double mean_solve_ms = 0;
  int swaps = 0;
};

/// Tracks the scene with dense and with pruned candidates.
std::vector<PruneBenchRow> bench_pruning(const Scene& scene, TrackerConfig cfg, const PruneConfig& prune);
void write_prune_bench_csv(std::ostream& os, const std::vector<PruneBenchRow>& rows);

}  // namespace crowdbqp

#endif  // CROWDBQP_BENCH_HPP
