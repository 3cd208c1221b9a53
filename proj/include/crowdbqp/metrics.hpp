// Tracking accuracy against ground truth.
#ifndef CROWDBQP_METRICS_HPP
#define CROWDBQP_METRICS_HPP

#include "crowdbqp/scene.hpp"
#include "crowdbqp/tracker.hpp"

#include <iosfwd>
#include <vector>

namespace crowdbqp {

struct AccuracyCurve {
  std::vector<int> thresholds;   ///< 1..max, pixels
  std::vector<double> accuracy;  ///< fraction within each threshold

  /// accuracy at an integer threshold in range
  double at(int threshold) const;
};

/// Fraction of (frame, target) estimates within t pixels of ground truth, t = 1..max_threshold.
AccuracyCurve accuracy_curve(const TrackSet& tracks, const GroundTruth& gt, int max_threshold);

/// Number of times the ground-truth target nearest to an estimate changes between frames.
int count_identity_swaps(const TrackSet& tracks, const GroundTruth& gt);

void write_curve_csv(std::ostream& os, const AccuracyCurve& curve);

}  // namespace crowdbqp

#endif  // CROWDBQP_METRICS_HPP
