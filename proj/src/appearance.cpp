#include "crowdbqp/appearance.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>

namespace crowdbqp {

namespace {

void fill_feature(const Image& frame, const Point& center, PatchSize patch, double* out) {
  const int x0 = static_cast<int>(std::lround(center.x())) - patch.width / 2;
  const int y0 = static_cast<int>(std::lround(center.y())) - patch.height / 2;
  const Eigen::Index area = static_cast<Eigen::Index>(patch.width) * patch.height;
  for (int c = 0; c < 3; ++c) {
    double* ch = out + c * area;
    double mean = 0;
    for (int y = 0; y < patch.height; ++y) {
      for (int x = 0; x < patch.width; ++x) {
        const double v = frame.clamped(x0 + x, y0 + y, c) / 255.0;
        ch[y * patch.width + x] = v;
        mean += v;
      }
    }
    mean /= static_cast<double>(area);
    for (Eigen::Index i = 0; i < area; ++i) ch[i] -= mean;
  }
}

void check_patch(PatchSize patch) {
  if (patch.width <= 0 || patch.height <= 0) throw std::invalid_argument("patch has zero area");
}

}  // namespace

PatchFeature extract_patch_features(const Image& frame, const Point& center, PatchSize patch) {
  check_patch(patch);
  if (frame.empty()) throw std::invalid_argument("extract_patch_features: empty frame");
  PatchFeature f{Eigen::VectorXd(patch.dims()), patch};
  fill_feature(frame, center, patch, f.values.data());
  return f;
}

TrainingSet make_training_set(const Image& frame, const Point& center, PatchSize patch) {
  check_patch(patch);
  const int hx = patch.width / 2, hy = patch.height / 2;
  const double sx = patch.width / 10.0, sy = patch.height / 10.0;
  const Eigen::Index rows = static_cast<Eigen::Index>(2 * hx + 1) * (2 * hy + 1);
  TrainingSet t{Eigen::MatrixXd(rows, patch.dims()), Eigen::VectorXd(rows), patch};
  Eigen::VectorXd buf(patch.dims());
  Eigen::Index r = 0;
  for (int dy = -hy; dy <= hy; ++dy) {
    for (int dx = -hx; dx <= hx; ++dx, ++r) {
      fill_feature(frame, center + Point(dx, dy), patch, buf.data());
      t.samples.row(r) = buf.transpose();
      t.labels(r) = std::exp(-(dx * dx / (2 * sx * sx) + dy * dy / (2 * sy * sy)));
    }
  }
  return t;
}

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, double ridge,
                            RidgeForm form) {
  if (!(ridge > 0)) throw std::invalid_argument("ridge_solve: ridge must be > 0");
  if (z.rows() != y.size()) throw std::invalid_argument("ridge_solve: label count mismatch");
  if (!z.allFinite() || !y.allFinite()) throw std::invalid_argument("ridge_solve: non-finite samples");
  if (form == RidgeForm::automatic) form = z.rows() < z.cols() ? RidgeForm::dual : RidgeForm::primal;
  if (form == RidgeForm::dual) {
    Eigen::MatrixXd k = z * z.transpose();
    k.diagonal().array() += ridge;
    return z.transpose() * k.ldlt().solve(y);
  }
  Eigen::MatrixXd g = z.transpose() * z;
  g.diagonal().array() += ridge;
  return g.ldlt().solve(z.transpose() * y);
}

RegressorModel train_regressor(const TrainingSet& t, double ridge) {
  RegressorModel m;
  m.weights = ridge_solve(t.samples, t.labels, ridge);
  m.ridge = ridge;
  m.patch = t.patch;
  return m;
}

Eigen::VectorXd score_candidates(const RegressorModel& m, const Image& frame,
                                 std::span<const Point> candidates) {
  if (candidates.empty()) throw std::invalid_argument("score_candidates: no candidates");
  if (m.weights.size() != m.patch.dims()) throw std::invalid_argument("score_candidates: model size mismatch");
  Eigen::VectorXd out(static_cast<Eigen::Index>(candidates.size()));
  Eigen::VectorXd buf(m.patch.dims());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    fill_feature(frame, candidates[i], m.patch, buf.data());
    out(static_cast<Eigen::Index>(i)) = m.weights.dot(buf);
  }
  return out;
}

RegressorModel update_model(const RegressorModel& old, const RegressorModel& fresh, double gamma) {
  if (!(gamma >= 0 && gamma <= 1)) throw std::invalid_argument("update_model: gamma outside [0,1]");
  if (!(old.patch == fresh.patch) || old.weights.size() != fresh.weights.size()) {
    throw std::invalid_argument("update_model: dimension mismatch");
  }
  RegressorModel out = old;
  out.weights = (1 - gamma) * old.weights + gamma * fresh.weights;
  return out;
}

Eigen::VectorXd ncc_scores(const Eigen::VectorXd& templ, const Image& frame,
                           std::span<const Point> candidates, PatchSize patch) {
  check_patch(patch);
  if (templ.size() != patch.dims()) throw std::invalid_argument("ncc_scores: template size mismatch");
  const double tn = templ.norm();
  Eigen::VectorXd out(static_cast<Eigen::Index>(candidates.size()));
  Eigen::VectorXd buf(patch.dims());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    fill_feature(frame, candidates[i], patch, buf.data());
    const double denom = tn * buf.norm();
    out(static_cast<Eigen::Index>(i)) = denom > 0 ? templ.dot(buf) / denom : 0.0;
  }
  return out;
}

}  // namespace crowdbqp
