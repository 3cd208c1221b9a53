#include "crowdbqp/tracker.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace crowdbqp {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Eigen::VectorXd block_normalized(const BlockLayout& layout, const Eigen::VectorXd& scores) {
  return -scores_to_costs(layout, scores);
}

}  // namespace

PatchSize TrackerConfig::patch() const {
  const int s = std::max(1, static_cast<int>(std::lround(target_size)));
  return {s, s};
}

int TrackerConfig::half_extent() const {
  return search_half_extent > 0 ? search_half_extent : std::max(1, static_cast<int>(std::lround(target_size)));
}

void TrackerConfig::validate() const {
  if (zeta < 0 || eta < 0) throw std::invalid_argument("TrackerConfig: zeta and eta must be >= 0");
  if (!(target_size > 0)) throw std::invalid_argument("TrackerConfig: target_size must be > 0");
  if (group_refresh < 1) throw std::invalid_argument("TrackerConfig: group refresh must be >= 1");
  if (stride < 1) throw std::invalid_argument("TrackerConfig: stride must be >= 1");
  if (!(ridge > 0)) throw std::invalid_argument("TrackerConfig: ridge must be > 0");
  if (learning_rate < 0 || learning_rate > 1) throw std::invalid_argument("TrackerConfig: learning rate outside [0,1]");
  if (prune) prune->validate();
  solver.validate();
}

CrowdTracker::CrowdTracker(TrackerConfig cfg, const Image& first, std::span<const Point> init)
    : cfg_(std::move(cfg)), motion_(MotionModel::for_target_size(cfg_.target_size)) {
  cfg_.validate();
  if (init.empty()) throw std::invalid_argument("CrowdTracker: no initial targets");
  for (std::size_t i = 0; i < init.size(); ++i) {
    if (!init[i].allFinite()) throw std::invalid_argument("CrowdTracker: missing init for target " + std::to_string(i));
    TargetState s;
    s.id = static_cast<int>(i);
    s.position = init[i];
    s.history.push_back(init[i]);
    s.group_id = static_cast<int>(i);
    states_.push_back(std::move(s));
    if (cfg_.appearance == AppearanceBackend::ridge) {
      RegressorModel m = train_regressor(make_training_set(first, init[i], cfg_.patch()), cfg_.ridge);
      m.learning_rate = cfg_.learning_rate;
      models_.push_back(std::move(m));
    } else {
      templates_.push_back(extract_patch_features(first, init[i], cfg_.patch()).values);
    }
  }
  std::vector<int> singletons(states_.size());
  for (std::size_t i = 0; i < singletons.size(); ++i) singletons[i] = static_cast<int>(i);
  groups_ = build_group_model(std::vector<Point>(init.begin(), init.end()), singletons, 0, cfg_.group_refresh);
  neighbors_.assign(states_.size(), {});
}

void CrowdTracker::refresh_groups(int frame) {
  std::vector<std::vector<Point>> histories;
  std::vector<Point> positions;
  for (const auto& s : states_) {
    histories.push_back(s.history);
    positions.push_back(s.position);
  }
  CoherenceConfig cc;
  cc.max_distance = 4 * cfg_.target_size;
  auto labels = coherent_groups(histories, cc);
  for (std::size_t i = 0; i < states_.size(); ++i) states_[i].group_id = labels[i];
  groups_ = build_group_model(positions, std::move(labels), frame, cfg_.group_refresh);
}

std::vector<Point> CrowdTracker::target_candidates(std::size_t i, const Image& frame) const {
  return dense_candidates({states_[i].position, cfg_.half_extent()}, cfg_.stride, frame.width(), frame.height());
}

Eigen::VectorXd CrowdTracker::appearance_scores(std::size_t i, const Image& frame,
                                                std::span<const Point> pts) const {
  if (cfg_.appearance == AppearanceBackend::ridge) return score_candidates(models_[i], frame, pts);
  return ncc_scores(templates_[i], frame, pts, cfg_.patch());
}

FrameProblem CrowdTracker::build_frame_problem(const Image& frame) const {
  const std::size_t n = states_.size();
  std::vector<std::vector<Point>> cands(n);
  std::vector<Eigen::VectorXd> app(n), mot(n), nmot(n);

  auto score_all = [&](std::size_t i, const std::vector<Point>& pts) {
    const Index k = static_cast<Index>(pts.size());
    app[i] = appearance_scores(i, frame, pts);
    mot[i] = cfg_.use_motion ? motion_cost(states_[i], motion_, pts) : Eigen::VectorXd::Zero(k);
    nmot[i] = cfg_.use_neighborhood ? neighborhood_motion_cost(states_[i], neighbors_[i], motion_, pts)
                                    : Eigen::VectorXd::Zero(k);
  };
  auto normalized = [](const Eigen::VectorXd& v) {
    const double lo = v.minCoeff(), hi = v.maxCoeff();
    return hi > lo ? Eigen::VectorXd((v.array() - lo) / (hi - lo)) : Eigen::VectorXd::Zero(v.size());
  };

  for (std::size_t i = 0; i < n; ++i) {
    cands[i] = target_candidates(i, frame);
    score_all(i, cands[i]);
    if (cfg_.prune) {
      const Eigen::VectorXd combined = normalized(app[i]) + normalized(mot[i]) + normalized(nmot[i]);
      cands[i] = prune_candidates(cands[i], combined, *cfg_.prune);
      score_all(i, cands[i]);
    }
  }

  std::vector<Index> sizes(n);
  for (std::size_t i = 0; i < n; ++i) sizes[i] = static_cast<Index>(cands[i].size());
  BlockLayout layout(sizes);
  const Index l = layout.num_vars();

  std::vector<Point> all;
  all.reserve(static_cast<std::size_t>(l));
  Eigen::VectorXd a(l), m(l), nm(l);
  for (std::size_t i = 0; i < n; ++i) {
    const Index off = layout.offset(static_cast<Index>(i)), k = sizes[i];
    a.segment(off, k) = app[i];
    m.segment(off, k) = mot[i];
    nm.segment(off, k) = nmot[i];
    all.insert(all.end(), cands[i].begin(), cands[i].end());
  }

  LinearCosts<double> lin;
  lin.appearance = scores_to_costs(layout, a);
  lin.motion = cfg_.use_motion ? scores_to_costs(layout, m) : Eigen::VectorXd::Zero(l);
  lin.neighborhood = cfg_.use_neighborhood ? scores_to_costs(layout, nm) : Eigen::VectorXd::Zero(l);
  lin.zeta = cfg_.zeta;
  lin.eta = cfg_.eta;

  std::vector<QuadraticTerm<double>> quads;
  if (cfg_.use_proximity) {
    quads.push_back(laplacianize(proximity_similarity(all, layout, cfg_.sigma()),
                                 cfg_.proximity_mode, QuadKind::proximity));
  }
  if (cfg_.use_group && !groups_.edges.empty()) {
    quads.push_back(laplacianize(group_similarity(all, layout, groups_, cfg_.sigma(), frame_ + 1),
                                 LaplacianMode::attract, QuadKind::grouping));
  }
  FrameProblem out{build_problem(layout, std::move(lin), std::move(quads)), std::move(all), std::move(a)};

  std::vector<std::int64_t> keys(static_cast<std::size_t>(l));
  for (Index g = 0; g < l; ++g) {
    const Point& p = out.candidates[static_cast<std::size_t>(g)];
    keys[static_cast<std::size_t>(g)] = std::llround(p.y()) * frame.width() + std::llround(p.x());
  }
  out.problem.set_pixel_keys(std::move(keys));
  return out;
}

FrameSummary CrowdTracker::step(const Image& frame) {
  const auto t0 = Clock::now();
  if (frame_ + 1 - groups_.refreshed_at >= cfg_.group_refresh) refresh_groups(frame_ + 1);
  neighbors_ = cfg_.use_neighborhood ? build_neighbor_sets(states_, cfg_.target_size) : std::vector<NeighborSet>(states_.size());

  FrameProblem fp = build_frame_problem(frame);
  const BlockLayout& layout = fp.problem.layout();
  ++frame_;

  const auto ts = Clock::now();
  SolverResult<double> r = fw_solve(fp.problem, cfg_.solver);
  FrameSummary summary;
  summary.solve_ms = ms_since(ts);
  summary.frame = frame_;
  summary.num_vars = layout.num_vars();
  summary.iterations = r.trace.iterations;
  summary.converged = r.converged;
  if (!r.trace.records.empty()) {
    summary.objective = r.trace.records.back().objective;
    summary.gap = r.trace.records.back().gap;
  }
  summary.coasted = !r.converged;

  const Eigen::VectorXd app_norm = block_normalized(layout, fp.appearance_scores);
  for (std::size_t i = 0; i < states_.size(); ++i) {
    TargetState& s = states_[i];
    Point next;
    if (summary.coasted) {
      next = motion_.predict(s);
      next.x() = std::clamp(next.x(), 0.0, frame.width() - 1.0);
      next.y() = std::clamp(next.y(), 0.0, frame.height() - 1.0);
    } else {
      const Index g = layout.global(static_cast<Index>(i), r.rounded[static_cast<Index>(i)]);
      next = fp.candidates[static_cast<std::size_t>(g)];
      // appearance update, skipped when the chosen spot looks unlike the model
      if (app_norm(g) >= cfg_.update_threshold) {
        if (cfg_.appearance == AppearanceBackend::ridge) {
          const RegressorModel fresh =
              train_regressor(make_training_set(frame, next, cfg_.patch()), cfg_.ridge);
          models_[i] = update_model(models_[i], fresh, cfg_.learning_rate);
        } else {
          templates_[i] = (1 - cfg_.learning_rate) * templates_[i] +
                          cfg_.learning_rate * extract_patch_features(frame, next, cfg_.patch()).values;
        }
      }
    }
    s.position = next;
    s.history.push_back(next);
    s.velocity = fit_velocity(s.history, cfg_.velocity_window);
  }
  if (cfg_.keep_traces) summary.trace = std::move(r.trace);
  summary.frame_ms = ms_since(t0);
  return summary;
}

TrackResult track_sequence(std::span<const Image> frames, std::span<const Point> init,
                           const TrackerConfig& cfg) {
  if (frames.empty()) throw std::invalid_argument("track_sequence: no frames");
  TrackResult out;
  CrowdTracker tracker(cfg, frames[0], init);
  out.tracks.positions.emplace_back(init.begin(), init.end());
  out.tracks.coasted.emplace_back(init.size(), 0);
  for (std::size_t f = 1; f < frames.size(); ++f) {
    FrameSummary s = tracker.step(frames[f]);
    std::vector<Point> pos;
    for (const auto& st : tracker.states()) pos.push_back(st.position);
    out.tracks.positions.push_back(std::move(pos));
    out.tracks.coasted.emplace_back(init.size(), s.coasted ? 1 : 0);
    out.frames.push_back(std::move(s));
  }
  return out;
}

void write_tracks_csv(std::ostream& os, const TrackSet& tracks) {
  os << "frame,target_id,x,y\n";
  char buf[80];
  for (int f = 0; f < tracks.num_frames(); ++f) {
    const auto& row = tracks.positions[static_cast<std::size_t>(f)];
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%d,%zu,%.2f,%.2f\n", f, i, row[i].x(), row[i].y());
      os << buf;
    }
  }
}

TrackSet read_tracks_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("frame,target_id,x,y", 0) != 0) {
    throw std::runtime_error("tracks: unexpected header");
  }
  std::map<int, std::map<int, Point>> rows;
  int lineno = 1, max_id = -1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    int f = 0, id = 0;
    double x = 0, y = 0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf", &f, &id, &x, &y) != 4) {
      throw std::runtime_error("tracks: malformed row at line " + std::to_string(lineno));
    }
    rows[f][id] = Point(x, y);
    max_id = std::max(max_id, id);
  }
  TrackSet t;
  const Point missing = Point::Constant(std::numeric_limits<double>::quiet_NaN());
  const int frames = rows.empty() ? 0 : rows.rbegin()->first + 1;
  for (int f = 0; f < frames; ++f) {
    std::vector<Point> frame(static_cast<std::size_t>(max_id + 1), missing);
    if (auto it = rows.find(f); it != rows.end()) {
      for (auto [id, p] : it->second) frame[static_cast<std::size_t>(id)] = p;
    }
    t.positions.push_back(std::move(frame));
    t.coasted.emplace_back(static_cast<std::size_t>(max_id + 1), 0);
  }
  return t;
}

void write_tracking_trace_csv(std::ostream& os, const std::vector<FrameSummary>& frames) {
  os << "frame,iteration,objective,gap,step_kind,lambda,wall_time_us\n";
  for (const auto& f : frames) {
    for (const auto& r : f.trace.records) {
      os << f.frame << ',' << r.iteration << ',' << r.objective << ',' << r.gap << ',' << to_string(r.kind)
         << ',' << r.lambda << ',' << r.wall_time_us << '\n';
    }
  }
}

TrackSet read_tracks_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return read_tracks_csv(is);
}

}  // namespace crowdbqp
