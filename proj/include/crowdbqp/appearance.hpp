// Per-target appearance models: closed-form ridge regression on colour patches, and an NCC
// template baseline.
#ifndef CROWDBQP_APPEARANCE_HPP
#define CROWDBQP_APPEARANCE_HPP

#include "crowdbqp/image.hpp"

#include <Eigen/Core>

#include <span>

namespace crowdbqp {

struct PatchSize {
  int width = 6, height = 6;
  Eigen::Index dims() const { return 3 * static_cast<Eigen::Index>(width) * height; }
  friend bool operator==(const PatchSize&, const PatchSize&) = default;
};

/// Channel-major colour values in [0,1] with each channel's mean removed.
struct PatchFeature {
  Eigen::VectorXd values;
  PatchSize patch;
};

struct TrainingSet {
  Eigen::MatrixXd samples;  ///< one feature per row
  Eigen::VectorXd labels;
  PatchSize patch;
};

struct RegressorModel {
  Eigen::VectorXd weights;
  double ridge = 0.1;
  PatchSize patch;
  double learning_rate = 0.05;
};

PatchFeature extract_patch_features(const Image& frame, const Point& center, PatchSize patch);

/// Patches at every integer shift within +-patch/2 of the center, labelled with a Gaussian of
/// width patch/10 per axis.
TrainingSet make_training_set(const Image& frame, const Point& center, PatchSize patch);

enum class RidgeForm { automatic, primal, dual };

/// argmin_w ||Zw - y||^2 + ridge ||w||^2. The automatic form picks the dual system when Z has
/// fewer rows than columns.
Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& z, const Eigen::VectorXd& y, double ridge,
                            RidgeForm form = RidgeForm::automatic);

RegressorModel train_regressor(const TrainingSet& t, double ridge);

/// Raw scores w . phi(candidate).
Eigen::VectorXd score_candidates(const RegressorModel& m, const Image& frame,
                                 std::span<const Point> candidates);

/// w <- (1 - gamma) w_old + gamma w_fresh
RegressorModel update_model(const RegressorModel& old, const RegressorModel& fresh, double gamma);

/// Normalised cross-correlation of each candidate patch with a template feature, in [-1,1].
Eigen::VectorXd ncc_scores(const Eigen::VectorXd& templ, const Image& frame,
                           std::span<const Point> candidates, PatchSize patch);

}  // namespace crowdbqp

#endif  // CROWDBQP_APPEARANCE_HPP
