// Motion, neighbourhood-motion, proximity and group-formation terms built from track state.
#ifndef CROWDBQP_MOTION_CONTEXT_HPP
#define CROWDBQP_MOTION_CONTEXT_HPP

#include "crowdbqp/image.hpp"
#include "crowdbqp/qp_core.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace crowdbqp {

struct TargetState {
  int id = 0;
  Point position = Point::Zero();
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
  std::vector<Point> history;  ///< oldest first, includes the current position
  int group_id = -1;
};

/// Constant-velocity model p' = p + v with isotropic Gaussian uncertainty.
struct MotionModel {
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Identity() * 9.0;

  static MotionModel for_target_size(double target_size);
  Point predict(const TargetState& s) const { return s.position + s.velocity; }
};

/// exp(-1/2 (q - mu)^T Sigma^-1 (q - mu)) around mu = p + v.
Eigen::VectorXd motion_cost(const TargetState& state, const MotionModel& mm,
                            std::span<const Point> candidates);

/// Same kernel around an arbitrary mean.
Eigen::VectorXd gaussian_scores(const Point& mean, const MotionModel& mm,
                                std::span<const Point> candidates);

struct CoherenceConfig {
  int window = 10;            ///< frames of velocity history compared
  double min_cosine = 0.9;
  double max_distance = 24;   ///< mean mutual distance gate, pixels (4x target size)
};

/// Single-linkage grouping of tracks with correlated recent velocities that stay close. Labels
/// are numbered by first appearance.
std::vector<int> coherent_groups(const std::vector<std::vector<Point>>& histories,
                                 const CoherenceConfig& cfg);

/// Least-squares velocity of the last `window` positions (zero for a single position).
Eigen::Vector2d fit_velocity(std::span<const Point> history, int window = 5);

struct Neighbor {
  int id = 0;
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
  double distance = 0;
  double weight = 0;
};
using NeighborSet = std::vector<Neighbor>;

/// Fills weights with softmax(-distance / u).
void assign_neighbor_weights(NeighborSet& ns, double u);

/// Up to max_neighbors nearest members of each target's group, weighted by distance.
std::vector<NeighborSet> build_neighbor_sets(const std::vector<TargetState>& targets,
                                             double target_size, int max_neighbors = 5);

/// Sum_j w_j N(p_i + v_j, Sigma) at each candidate.
Eigen::VectorXd neighborhood_motion_cost(const TargetState& target, const NeighborSet& neighbors,
                                         const MotionModel& mm, std::span<const Point> candidates);

/// exp(-d^2 / (2 sigma^2)) between candidates of different blocks within 3 sigma.
SparseMatrix<double> proximity_similarity(std::span<const Point> candidates,
                                          const BlockLayout& layout, double sigma);

struct MstEdge {
  int a = 0, b = 0;  ///< member ids, a < b
  double rest = 0;   ///< rest length, pixels
};

/// Euclidean minimum spanning tree; ties broken by (weight, min id, max id). ids default to
/// 0..m-1.
std::vector<MstEdge> build_group_mst(std::span<const Point> positions, std::span<const int> ids = {});

struct GroupModel {
  std::vector<int> labels;     ///< group per target
  std::vector<MstEdge> edges;  ///< tree edges between target indices
  int refreshed_at = 0;
  int refresh_period = 10;
};

GroupModel build_group_model(const std::vector<Point>& positions, std::vector<int> labels, int frame,
                             int refresh_period = 10);

/// Formation kernel exp(-(d - e)^2 / (2 sigma_g^2)) for candidate pairs of tree-adjacent targets,
/// truncated at 3 sigma_g deviation.
SparseMatrix<double> group_similarity(std::span<const Point> candidates, const BlockLayout& layout,
                                      const GroupModel& g, double sigma_g, int frame);

}  // namespace crowdbqp

#endif  // CROWDBQP_MOTION_CONTEXT_HPP
