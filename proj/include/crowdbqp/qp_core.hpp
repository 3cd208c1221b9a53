#ifndef CROWDBQP_QP_CORE_HPP
#define CROWDBQP_QP_CORE_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace crowdbqp {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::ColMajor>;

/// Partition of the variable vector into per-target simplex blocks.
class BlockLayout {
 public:
  BlockLayout() = default;

  explicit BlockLayout(std::vector<Index> block_sizes) : sizes_(std::move(block_sizes)) {
    offsets_.reserve(sizes_.size() + 1);
    offsets_.push_back(0);
    for (std::size_t b = 0; b < sizes_.size(); ++b) {
      if (sizes_[b] < 1) {
        throw std::invalid_argument("BlockLayout: block " + std::to_string(b) +
                                    " has no candidates");
      }
      offsets_.push_back(offsets_.back() + sizes_[b]);
    }
  }

  static BlockLayout uniform(Index num_blocks, Index block_size) {
    return BlockLayout(std::vector<Index>(static_cast<std::size_t>(num_blocks), block_size));
  }

  Index num_blocks() const { return static_cast<Index>(sizes_.size()); }
  Index num_vars() const { return offsets_.empty() ? 0 : offsets_.back(); }
  Index size(Index block) const { return sizes_[static_cast<std::size_t>(block)]; }
  Index offset(Index block) const { return offsets_[static_cast<std::size_t>(block)]; }
  Index global(Index block, Index local) const { return offset(block) + local; }
  const std::vector<Index>& sizes() const { return sizes_; }

  /// Block containing the global variable index.
  Index block_of(Index global_index) const {
    auto it = std::upper_bound(offsets_.begin(), offsets_.end(), global_index);
    return static_cast<Index>(it - offsets_.begin()) - 1;
  }

  bool operator==(const BlockLayout& other) const { return sizes_ == other.sizes_; }

 private:
  std::vector<Index> sizes_;
  std::vector<Index> offsets_;
};

/// One chosen local candidate index per block.
struct Assignment {
  std::vector<Index> chosen;

  Index num_blocks() const { return static_cast<Index>(chosen.size()); }
  Index operator[](Index block) const { return chosen[static_cast<std::size_t>(block)]; }
  bool operator==(const Assignment& other) const = default;
};

template <typename Scalar>
Vector<Scalar> to_indicator(const BlockLayout& layout, const Assignment& a) {
  Vector<Scalar> x = Vector<Scalar>::Zero(layout.num_vars());
  for (Index b = 0; b < layout.num_blocks(); ++b) x(layout.global(b, a[b])) = Scalar(1);
  return x;
}

/// Per-target linear cost vectors of the tracking objective.
template <typename Scalar>
struct LinearCosts {
  Vector<Scalar> appearance;
  Vector<Scalar> motion;
  Vector<Scalar> neighborhood;
  Scalar zeta = Scalar(0.3);
  Scalar eta = Scalar(0.2);

  static LinearCosts zeros(Index num_vars, Scalar zeta = Scalar(0.3), Scalar eta = Scalar(0.2)) {
    return {Vector<Scalar>::Zero(num_vars), Vector<Scalar>::Zero(num_vars),
            Vector<Scalar>::Zero(num_vars), zeta, eta};
  }
};

enum class QuadKind { proximity, grouping };

template <typename Scalar>
struct QuadraticTerm {
  SparseMatrix<Scalar> matrix;
  QuadKind kind = QuadKind::proximity;
};

/// Entries with magnitude below this are dropped from assembled quadratic terms.
inline constexpr double kSparseDropThreshold = 1e-6;

/// Binary quadratic program over a product of simplices:
///   minimize c^T x + x^T Q x  subject to one unit of mass per block.
/// The combined cost c and the summed Q are materialized at construction.
template <typename Scalar>
class BqpProblem {
 public:
  BqpProblem(BlockLayout layout, LinearCosts<Scalar> lin, std::vector<QuadraticTerm<Scalar>> quads)
      : layout_(std::move(layout)), lin_(std::move(lin)), quads_(std::move(quads)) {
    const Index l = layout_.num_vars();
    auto check = [l](const Vector<Scalar>& v, const char* name) {
      if (v.size() != l) {
        throw std::invalid_argument(std::string("BqpProblem: ") + name + " has length " +
                                    std::to_string(v.size()) + ", expected " + std::to_string(l));
      }
    };
    check(lin_.appearance, "c_a");
    check(lin_.motion, "c_m");
    check(lin_.neighborhood, "c_nm");
    if (!(lin_.zeta >= 0) || !(lin_.eta >= 0)) {
      throw std::invalid_argument("BqpProblem: zeta and eta must be non-negative");
    }
    cost_ = lin_.appearance + lin_.zeta * lin_.motion + lin_.eta * lin_.neighborhood;

    quadratic_.resize(l, l);
    for (std::size_t q = 0; q < quads_.size(); ++q) {
      const auto& m = quads_[q].matrix;
      if (m.rows() != l || m.cols() != l) {
        throw std::invalid_argument("BqpProblem: quadratic term " + std::to_string(q) + " is " +
                                    std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                    ", expected " + std::to_string(l) + "x" + std::to_string(l));
      }
      quadratic_ += m;
    }
    quadratic_.makeCompressed();
  }

  const BlockLayout& layout() const { return layout_; }
  const LinearCosts<Scalar>& linear_costs() const { return lin_; }
  const std::vector<QuadraticTerm<Scalar>>& quadratic_terms() const { return quads_; }
  const Vector<Scalar>& cost() const { return cost_; }
  const SparseMatrix<Scalar>& quadratic() const { return quadratic_; }
  Index num_vars() const { return layout_.num_vars(); }
  bool has_quadratic() const { return quadratic_.nonZeros() > 0; }

  /// Optional per-variable pixel keys; two variables with equal keys sit on the same pixel.
  const std::vector<std::int64_t>& pixel_keys() const { return pixel_keys_; }
  void set_pixel_keys(std::vector<std::int64_t> keys) {
    if (static_cast<Index>(keys.size()) != num_vars()) {
      throw std::invalid_argument("BqpProblem: pixel key count does not match variable count");
    }
    pixel_keys_ = std::move(keys);
  }

 private:
  BlockLayout layout_;
  LinearCosts<Scalar> lin_;
  std::vector<QuadraticTerm<Scalar>> quads_;
  Vector<Scalar> cost_;
  SparseMatrix<Scalar> quadratic_;
  std::vector<std::int64_t> pixel_keys_;
};

template <typename Scalar>
BqpProblem<Scalar> build_problem(BlockLayout layout, LinearCosts<Scalar> lin,
                                 std::vector<QuadraticTerm<Scalar>> quads = {}) {
  return BqpProblem<Scalar>(std::move(layout), std::move(lin), std::move(quads));
}

namespace detail {
template <typename Scalar, typename Derived>
void check_length(const BqpProblem<Scalar>& p, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != p.num_vars()) {
    throw std::invalid_argument("vector length " + std::to_string(x.size()) +
                                " does not match problem size " + std::to_string(p.num_vars()));
  }
}
}  // namespace detail

template <typename Scalar, typename Derived>
Scalar objective(const BqpProblem<Scalar>& p, const Eigen::MatrixBase<Derived>& x) {
  detail::check_length(p, x);
  const Vector<Scalar> qx = p.quadratic() * x;
  return p.cost().dot(x) + x.dot(qx);
}

template <typename Scalar, typename Derived>
Vector<Scalar> gradient(const BqpProblem<Scalar>& p, const Eigen::MatrixBase<Derived>& x) {
  detail::check_length(p, x);
  return p.cost() + Scalar(2) * (p.quadratic() * x);
}

enum class LaplacianMode {
  attract,  ///< I - D^-1/2 S D^-1/2, rewards co-selection of similar pairs.
  repel,    ///< I + D^-1/2 S D^-1/2, penalizes co-selection of similar pairs.
  printed,  ///< I - D^-1/2 S D^1/2 symmetrized; kept for comparison only, not PSD in general.
};

/// Turns a cross-block similarity matrix into a quadratic term via the normalized adjacency.
/// S must be symmetric with entries in [0,1] and a zero diagonal. Rows of zero degree map to zero.
template <typename Scalar>
QuadraticTerm<Scalar> laplacianize(const SparseMatrix<Scalar>& similarity, LaplacianMode mode,
                                   QuadKind kind) {
  const Index l = similarity.rows();
  if (similarity.cols() != l) throw std::invalid_argument("laplacianize: S must be square");

  Vector<Scalar> degree = Vector<Scalar>::Zero(l);
  for (Index col = 0; col < similarity.outerSize(); ++col) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(similarity, col); it; ++it) {
      const Scalar v = it.value();
      if (!(v >= Scalar(0)) || v > Scalar(1) + Scalar(1e-12)) {
        throw std::invalid_argument("laplacianize: entries must lie in [0,1]");
      }
      if (it.row() == it.col() && v != Scalar(0)) {
        throw std::invalid_argument("laplacianize: diagonal must be zero");
      }
      degree(it.row()) += v;
    }
  }
  const SparseMatrix<Scalar> transposed = similarity.transpose();
  if ((similarity - transposed).norm() > Scalar(1e-12) * std::max(Scalar(1), similarity.norm())) {
    throw std::invalid_argument("laplacianize: S must be symmetric");
  }

  Vector<Scalar> inv_sqrt(l), sqrt_deg(l);
  for (Index i = 0; i < l; ++i) {
    inv_sqrt(i) = degree(i) > Scalar(0) ? Scalar(1) / std::sqrt(degree(i)) : Scalar(0);
    sqrt_deg(i) = degree(i) > Scalar(0) ? std::sqrt(degree(i)) : Scalar(0);
  }

  std::vector<Eigen::Triplet<Scalar>> triplets;
  triplets.reserve(static_cast<std::size_t>(similarity.nonZeros() + l));
  for (Index i = 0; i < l; ++i) triplets.emplace_back(i, i, Scalar(1));
  for (Index col = 0; col < similarity.outerSize(); ++col) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(similarity, col); it; ++it) {
      const Index r = it.row(), c = it.col();
      Scalar v = Scalar(0);
      switch (mode) {
        case LaplacianMode::attract: v = -it.value() * inv_sqrt(r) * inv_sqrt(c); break;
        case LaplacianMode::repel: v = it.value() * inv_sqrt(r) * inv_sqrt(c); break;
        case LaplacianMode::printed:
          // symmetric part of -D^-1/2 S D^1/2
          v = -Scalar(0.5) * it.value() *
              (inv_sqrt(r) * sqrt_deg(c) + inv_sqrt(c) * sqrt_deg(r));
          break;
      }
      if (std::abs(v) >= Scalar(kSparseDropThreshold)) triplets.emplace_back(r, c, v);
    }
  }
  QuadraticTerm<Scalar> term;
  term.kind = kind;
  term.matrix.resize(l, l);
  term.matrix.setFromTriplets(triplets.begin(), triplets.end());
  term.matrix.makeCompressed();
  return term;
}

template <typename Scalar>
QuadraticTerm<Scalar> laplacianize(const SparseMatrix<Scalar>& similarity, LaplacianMode mode) {
  return laplacianize(similarity, mode,
                      mode == LaplacianMode::attract ? QuadKind::grouping : QuadKind::proximity);
}

/// As above, additionally checking that S has no within-block entries.
template <typename Scalar>
QuadraticTerm<Scalar> laplacianize(const BlockLayout& layout, const SparseMatrix<Scalar>& similarity,
                                   LaplacianMode mode) {
  if (similarity.rows() != layout.num_vars()) {
    throw std::invalid_argument("laplacianize: S does not match the layout");
  }
  for (Index col = 0; col < similarity.outerSize(); ++col) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(similarity, col); it; ++it) {
      if (it.value() != Scalar(0) && layout.block_of(it.row()) == layout.block_of(it.col())) {
        throw std::invalid_argument("laplacianize: S has a within-block entry at (" +
                                    std::to_string(it.row()) + "," + std::to_string(it.col()) + ")");
      }
    }
  }
  return laplacianize(similarity, mode);
}

/// Nonnegativity, unit mass per block (within 1e-9) and, optionally, integrality.
template <typename Derived>
bool is_feasible(const BlockLayout& layout, const Eigen::MatrixBase<Derived>& x, bool binary,
                 double tol = 1e-9) {
  if (x.size() != layout.num_vars()) {
    throw std::invalid_argument("is_feasible: vector length does not match layout");
  }
  for (Index b = 0; b < layout.num_blocks(); ++b) {
    double sum = 0;
    for (Index i = 0; i < layout.size(b); ++i) {
      const double v = static_cast<double>(x(layout.global(b, i)));
      if (!std::isfinite(v) || v < 0) return false;
      if (binary && v != 0.0 && v != 1.0) return false;
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

template <typename Scalar>
Vector<Scalar> uniform_point(const BlockLayout& layout) {
  Vector<Scalar> x(layout.num_vars());
  for (Index b = 0; b < layout.num_blocks(); ++b) {
    x.segment(layout.offset(b), layout.size(b)).setConstant(Scalar(1) / Scalar(layout.size(b)));
  }
  return x;
}

/// Per-block min-max normalization to [0,1] followed by negation, turning scores
/// (higher is better) into costs. Constant blocks map to zero.
template <typename Scalar>
Vector<Scalar> scores_to_costs(const BlockLayout& layout, const Vector<Scalar>& scores) {
  if (scores.size() != layout.num_vars()) {
    throw std::invalid_argument("scores_to_costs: length does not match layout");
  }
  Vector<Scalar> out(scores.size());
  for (Index b = 0; b < layout.num_blocks(); ++b) {
    auto seg = scores.segment(layout.offset(b), layout.size(b));
    const Scalar lo = seg.minCoeff(), hi = seg.maxCoeff();
    if (hi - lo > Scalar(0)) {
      out.segment(layout.offset(b), layout.size(b)) = -(seg.array() - lo) / (hi - lo);
    } else {
      out.segment(layout.offset(b), layout.size(b)).setZero();
    }
  }
  return out;
}

}  // namespace crowdbqp

#endif  // CROWDBQP_QP_CORE_HPP
