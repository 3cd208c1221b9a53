// Candidate locations per target: dense grid sampling and extrema-based pruning.
#ifndef CROWDBQP_CANDIDATES_HPP
#define CROWDBQP_CANDIDATES_HPP

#include "crowdbqp/image.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace crowdbqp {

struct SearchRegion {
  Point center;
  int half_extent = 6;
};

struct PruneConfig {
  int m = 3;                   ///< local maxima kept
  int extra_per_extremum = 10;
  int neighborhood = 6;        ///< side of the square sampled around each extremum, pixels
  PruneConfig() noexcept {}  // user-provided: GCC 11 SRA drops the NSDMIs inside std::optional
  void validate() const;
};

/// Integer grid points of the region clipped to [0,width) x [0,height), row-major.
std::vector<Point> dense_candidates(const SearchRegion& region, int stride, int width, int height);

/// Fixed offsets placed around each extremum; both-even offsets first, then diagonals, then the
/// rest, each group by distance and row-major order.
std::vector<Eigen::Vector2i> neighborhood_offsets(const PruneConfig& cfg);

/// Local maxima (8-neighbourhood, >=) of the score field on the dense grid, best first, ties by
/// lowest index. At most `limit` are returned.
std::vector<std::size_t> local_maxima(std::span<const Point> dense, const Eigen::VectorXd& scores,
                                      std::size_t limit);

/// Keeps the top-m local maxima and fixed samples around each. Extra samples are restricted to
/// the bounding box of the dense grid.
std::vector<Point> prune_candidates(std::span<const Point> dense, const Eigen::VectorXd& scores,
                                    const PruneConfig& cfg);

}  // namespace crowdbqp

#endif  // CROWDBQP_CANDIDATES_HPP
