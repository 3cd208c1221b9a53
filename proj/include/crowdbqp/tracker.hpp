// Online crowd tracker: per-frame BQP assembly, solve and state update.
#ifndef CROWDBQP_TRACKER_HPP
#define CROWDBQP_TRACKER_HPP

#include "crowdbqp/appearance.hpp"
#include "crowdbqp/candidates.hpp"
#include "crowdbqp/fw_solver.hpp"
#include "crowdbqp/image.hpp"
#include "crowdbqp/motion_context.hpp"
#include "crowdbqp/qp_core.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace crowdbqp {

enum class AppearanceBackend { ridge, ncc };

struct TrackerConfig {
  double zeta = 0.3, eta = 0.2;
  bool use_motion = true;
  bool use_neighborhood = true;
  bool use_proximity = true;
  bool use_group = true;
  AppearanceBackend appearance = AppearanceBackend::ridge;
  SolverConfig solver;
  std::optional<PruneConfig> prune{std::in_place};
  int group_refresh = 10;  ///< tau, frames
  double target_size = 6;  ///< pixels; sigma terms use half of it
  int search_half_extent = 0;  ///< 0 means target_size
  int stride = 1;
  double ridge = 0.1;
  double learning_rate = 0.05;
  double update_threshold = 0.4;
  int velocity_window = 5;
  LaplacianMode proximity_mode = LaplacianMode::repel;
  bool keep_traces = false;

  double sigma() const { return target_size / 2; }
  PatchSize patch() const;
  int half_extent() const;
  void validate() const;
};

struct TrackSet {
  std::vector<std::vector<Point>> positions;        ///< [frame][target]
  std::vector<std::vector<std::uint8_t>> coasted;   ///< [frame][target], 1 when predicted

  int num_frames() const { return static_cast<int>(positions.size()); }
  int num_targets() const { return positions.empty() ? 0 : static_cast<int>(positions.front().size()); }
};

struct FrameSummary {
  int frame = 0;
  Index num_vars = 0;
  int iterations = 0;
  double objective = 0;
  double gap = 0;
  bool converged = true;
  bool coasted = false;
  double solve_ms = 0;
  double frame_ms = 0;
  SolverTrace<double> trace;  ///< filled when keep_traces is set
};

struct FrameProblem {
  BqpProblem<double> problem;
  std::vector<Point> candidates;        ///< flattened, block order
  Eigen::VectorXd appearance_scores;    ///< raw, aligned with candidates
};

class CrowdTracker {
 public:
  CrowdTracker(TrackerConfig cfg, const Image& first, std::span<const Point> init);

  /// Problem for the next frame given the current state.
  FrameProblem build_frame_problem(const Image& frame) const;

  /// Advances one frame.
  FrameSummary step(const Image& frame);

  const std::vector<TargetState>& states() const { return states_; }
  const GroupModel& groups() const { return groups_; }
  const std::vector<NeighborSet>& neighbors() const { return neighbors_; }
  const TrackerConfig& config() const { return cfg_; }
  int frame() const { return frame_; }

 private:
  std::vector<Point> target_candidates(std::size_t i, const Image& frame) const;
  Eigen::VectorXd appearance_scores(std::size_t i, const Image& frame, std::span<const Point> pts) const;
  void refresh_groups(int frame);

  TrackerConfig cfg_;
  MotionModel motion_;
  std::vector<TargetState> states_;
  std::vector<RegressorModel> models_;
  std::vector<Eigen::VectorXd> templates_;
  GroupModel groups_;
  std::vector<NeighborSet> neighbors_;
  int frame_ = 0;
};

struct TrackResult {
  TrackSet tracks;
  std::vector<FrameSummary> frames;  ///< one per frame after the first
};

TrackResult track_sequence(std::span<const Image> frames, std::span<const Point> init,
                           const TrackerConfig& cfg);

void write_tracks_csv(std::ostream& os, const TrackSet& tracks);
TrackSet read_tracks_csv(std::istream& is);
TrackSet read_tracks_csv(const std::filesystem::path& path);

/// Per-iteration solver records of every frame: frame,iteration,objective,gap,step_kind,lambda,wall_time_us
void write_tracking_trace_csv(std::ostream& os, const std::vector<FrameSummary>& frames);

}  // namespace crowdbqp

#endif  // CROWDBQP_TRACKER_HPP
