#include "crowdbqp/metrics.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace crowdbqp {

namespace {

void check_coverage(const TrackSet& tracks, const GroundTruth& gt) {
  std::ostringstream missing;
  int count = 0;
  for (int f = 0; f < gt.num_frames(); ++f) {
    for (int i = 0; i < gt.num_targets(); ++i) {
      const bool have = f < tracks.num_frames() &&
                        i < static_cast<int>(tracks.positions[static_cast<std::size_t>(f)].size()) &&
                        tracks.positions[static_cast<std::size_t>(f)][static_cast<std::size_t>(i)].allFinite();
      if (have) continue;
      if (count < 20) missing << " (" << f << "," << i << ")";
      ++count;
    }
  }
  bool extra = tracks.num_frames() > gt.num_frames();
  for (int f = 0; f < std::min(tracks.num_frames(), gt.num_frames()); ++f) {
    extra |= static_cast<int>(tracks.positions[static_cast<std::size_t>(f)].size()) > gt.num_targets();
  }
  if (count > 0) {
    throw std::invalid_argument("tracks do not cover the ground truth; missing " + std::to_string(count) +
                                " (frame,target) pairs:" + missing.str() + (count > 20 ? " ..." : ""));
  }
  if (extra) throw std::invalid_argument("tracks contain (frame,target) pairs absent from the ground truth");
}

}  // namespace

double AccuracyCurve::at(int threshold) const {
  if (threshold < 1 || threshold > static_cast<int>(accuracy.size())) {
    throw std::out_of_range("AccuracyCurve: threshold outside the curve");
  }
  return accuracy[static_cast<std::size_t>(threshold - 1)];
}

AccuracyCurve accuracy_curve(const TrackSet& tracks, const GroundTruth& gt, int max_threshold) {
  if (max_threshold < 1) throw std::invalid_argument("accuracy_curve: max threshold must be >= 1");
  check_coverage(tracks, gt);
  std::vector<long> within(static_cast<std::size_t>(max_threshold), 0);
  long total = 0;
  for (int f = 0; f < gt.num_frames(); ++f) {
    for (int i = 0; i < gt.num_targets(); ++i) {
      const double err = (tracks.positions[static_cast<std::size_t>(f)][static_cast<std::size_t>(i)] -
                          gt.positions[static_cast<std::size_t>(f)][static_cast<std::size_t>(i)]).norm();
      ++total;
      // first integer threshold that admits this error
      const double first = std::max(1.0, std::ceil(err - 1e-9));
      if (first <= max_threshold) ++within[static_cast<std::size_t>(first) - 1];
    }
  }
  AccuracyCurve c;
  long running = 0;
  for (int t = 1; t <= max_threshold; ++t) {
    running += within[static_cast<std::size_t>(t - 1)];
    c.thresholds.push_back(t);
    c.accuracy.push_back(total > 0 ? static_cast<double>(running) / static_cast<double>(total) : 1.0);
  }
  return c;
}

int count_identity_swaps(const TrackSet& tracks, const GroundTruth& gt) {
  check_coverage(tracks, gt);
  const int n = gt.num_targets();
  std::vector<int> label(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) label[static_cast<std::size_t>(i)] = i;
  int swaps = 0;
  for (int f = 0; f < gt.num_frames(); ++f) {
    const auto& truth = gt.positions[static_cast<std::size_t>(f)];
    for (int i = 0; i < n; ++i) {
      const Point& e = tracks.positions[static_cast<std::size_t>(f)][static_cast<std::size_t>(i)];
      int best = 0;
      for (int j = 1; j < n; ++j) {
        if ((truth[static_cast<std::size_t>(j)] - e).squaredNorm() < (truth[static_cast<std::size_t>(best)] - e).squaredNorm()) best = j;
      }
      if (best != label[static_cast<std::size_t>(i)]) {
        ++swaps;
        label[static_cast<std::size_t>(i)] = best;
      }
    }
  }
  return swaps;
}

void write_curve_csv(std::ostream& os, const AccuracyCurve& curve) {
  os << "threshold,accuracy\n";
  for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
    os << curve.thresholds[i] << ',' << curve.accuracy[i] << '\n';
  }
}

}  // namespace crowdbqp
