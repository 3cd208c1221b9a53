#ifndef CROWDBQP_FW_SOLVER_HPP
#define CROWDBQP_FW_SOLVER_HPP

#include "crowdbqp/qp_core.hpp"

#include <chrono>
#include <functional>
#include <cstdint>
#include <limits>
#include <algorithm>
#include <optional>
#include <type_traits>
#include <ostream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace crowdbqp {

enum class SolverVariant { fw, fw_away, fw_swap, exact };
enum class StepKind { fw, away, away_drop, swap_add, swap_drop, none };

inline const char* to_string(SolverVariant v) {
  switch (v) {
    case SolverVariant::fw: return "fw";
    case SolverVariant::fw_away: return "fw_away";
    case SolverVariant::fw_swap: return "fw_swap";
    case SolverVariant::exact: return "exact";
  }
  return "?";
}

inline const char* to_string(StepKind k) {
  switch (k) {
    case StepKind::fw: return "fw";
    case StepKind::away: return "away";
    case StepKind::away_drop: return "away_drop";
    case StepKind::swap_add: return "swap_add";
    case StepKind::swap_drop: return "swap_drop";
    case StepKind::none: return "none";
  }
  return "?";
}

struct SolverConfig {
  SolverVariant variant = SolverVariant::fw_swap;
  double epsilon = 0.01;  ///< duality-gap threshold
  int max_iterations = 10000;
  double drop_tolerance = 1e-12;  ///< active-set weights below this are removed
  bool exact_line_search = true;  ///< false: FW steps use 2/(k+2)

  void validate() const {
    if (!(epsilon > 0)) throw std::invalid_argument("SolverConfig: epsilon must be positive");
    if (max_iterations < 1) throw std::invalid_argument("SolverConfig: max_iterations must be >= 1");
  }
};

struct AssignmentHash {
  std::size_t operator()(const Assignment& a) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (Index v : a.chosen) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

/// Convex combination of vertices of the block-simplex product. Iteration order is
/// insertion order, oldest first. Vertex choices are also kept block-major so the away search
/// streams one short column per block; weights are stored relative to a common factor so that
/// scaling all of them is O(1).
template <typename Scalar>
class ActiveSet {
 public:
  /// Decomposes a feasible point into at most l - n + 1 vertices by sweeping the
  /// per-block cumulative masses in lockstep.
  static ActiveSet decompose(const BlockLayout& layout, const Vector<Scalar>& x) {
    ActiveSet set;
    const Index n = layout.num_blocks();
    if (n == 0) return set;
    std::vector<Index> cursor(static_cast<std::size_t>(n));
    std::vector<Scalar> remaining(static_cast<std::size_t>(n));
    auto advance = [&](Index b, Index from) -> bool {
      for (Index i = from; i < layout.size(b); ++i) {
        if (x(layout.global(b, i)) > Scalar(0)) {
          cursor[static_cast<std::size_t>(b)] = i;
          remaining[static_cast<std::size_t>(b)] = x(layout.global(b, i));
          return true;
        }
      }
      return false;
    };
    for (Index b = 0; b < n; ++b) {
      if (!advance(b, 0)) throw std::invalid_argument("ActiveSet: block without mass");
    }
    Scalar total = 0;
    while (true) {
      Scalar w = *std::min_element(remaining.begin(), remaining.end());
      Assignment v{std::vector<Index>(cursor.begin(), cursor.end())};
      if (w > Scalar(0)) set.add_mass(v, w);
      total += w;
      bool exhausted = false;
      for (Index b = 0; b < n; ++b) {
        auto& r = remaining[static_cast<std::size_t>(b)];
        r -= w;
        if (r <= Scalar(1e-15)) {
          if (!advance(b, cursor[static_cast<std::size_t>(b)] + 1)) exhausted = true;
        }
      }
      if (exhausted) break;
    }
    // absorb round-off so the weights sum to one
    if (set.size() > 0 && total != Scalar(1)) set.scale(Scalar(1) / total);
    return set;
  }

  static ActiveSet single(const Assignment& v) {
    ActiveSet set;
    set.add_mass(v, Scalar(1));
    return set;
  }

  Index size() const { return live_; }
  bool empty() const { return live_ == 0; }
  bool contains(const Assignment& v) const { return lookup_.contains(v); }

  /// Calls fn(vertex, alpha) oldest first.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t i = 0; i < vertex_.size(); ++i) {
      if (alive_[i]) fn(vertex_[i], weight_[i] * scale_);
    }
  }

  /// Active vertex maximizing <v, g>; the oldest one wins ties.
  const Assignment& max_dot(const BlockLayout& layout, Eigen::Ref<const Vector<Scalar>> g) const {
    if (live_ == 0) throw std::invalid_argument("ActiveSet: empty");
    const std::size_t slots = vertex_.size();
    std::vector<Scalar> h(slots, Scalar(0));
    for (std::size_t b = 0; b < columns_.size(); ++b) {
      const Scalar* gb = g.data() + layout.offset(static_cast<Index>(b));
      const std::uint16_t* col = columns_[b].data();
      for (std::size_t i = 0; i < slots; ++i) h[i] += gb[col[i]];
    }
    std::size_t best = 0;
    Scalar best_v = -std::numeric_limits<Scalar>::infinity();
    for (std::size_t i = 0; i < slots; ++i) {
      if (alive_[i] && h[i] > best_v) {
        best_v = h[i];
        best = i;
      }
    }
    return vertex_[best];
  }

  Scalar alpha(const Assignment& v) const {
    auto it = lookup_.find(v);
    return it == lookup_.end() ? Scalar(0) : weight_[it->second] * scale_;
  }

  void add_mass(const Assignment& v, Scalar w) {
    auto it = lookup_.find(v);
    if (it != lookup_.end()) {
      weight_[it->second] += w / scale_;
      return;
    }
    if (vertex_.empty()) columns_.assign(static_cast<std::size_t>(v.num_blocks()), {});
    if (static_cast<std::size_t>(v.num_blocks()) != columns_.size()) {
      throw std::invalid_argument("ActiveSet: vertex has the wrong number of blocks");
    }
    for (std::size_t b = 0; b < columns_.size(); ++b) {
      const Index c = v.chosen[b];
      if (c < 0 || c > std::numeric_limits<std::uint16_t>::max()) {
        throw std::invalid_argument("ActiveSet: candidate index out of range");
      }
      columns_[b].push_back(static_cast<std::uint16_t>(c));
    }
    lookup_.emplace(v, vertex_.size());
    vertex_.push_back(v);
    weight_.push_back(w / scale_);
    alive_.push_back(1);
    ++live_;
  }

  void scale(Scalar factor) {
    scale_ *= factor;
    if (scale_ < Scalar(1e-150) || scale_ > Scalar(1e150)) {
      for (auto& w : weight_) w *= scale_;
      scale_ = 1;
    }
  }

  void remove(const Assignment& v) {
    auto it = lookup_.find(v);
    if (it == lookup_.end()) return;
    alive_[it->second] = 0;
    lookup_.erase(it);
    --live_;
    if (vertex_.size() > 64 && static_cast<Index>(vertex_.size()) > 2 * live_) compact();
  }

  void reset(const Assignment& v) {
    vertex_.clear();
    weight_.clear();
    alive_.clear();
    columns_.clear();
    lookup_.clear();
    live_ = 0;
    scale_ = 1;
    add_mass(v, Scalar(1));
  }

  /// Removes vertices whose weight fell below the tolerance.
  void prune(Scalar tolerance) {
    bool removed = false;
    for (std::size_t i = 0; i < vertex_.size(); ++i) {
      if (alive_[i] && weight_[i] * scale_ < tolerance) {
        alive_[i] = 0;
        lookup_.erase(vertex_[i]);
        --live_;
        removed = true;
      }
    }
    if (removed && static_cast<Index>(vertex_.size()) > 2 * live_) compact();
  }

  /// Removes v if its weight fell below the tolerance.
  void prune(const Assignment& v, Scalar tolerance) {
    if (contains(v) && alpha(v) < tolerance) remove(v);
  }

  Scalar total_weight() const {
    Scalar s = 0;
    for (std::size_t i = 0; i < vertex_.size(); ++i) {
      if (alive_[i]) s += weight_[i];
    }
    return s * scale_;
  }

  Vector<Scalar> reconstruct(const BlockLayout& layout) const {
    Vector<Scalar> x = Vector<Scalar>::Zero(layout.num_vars());
    for_each([&](const Assignment& v, Scalar a) {
      for (Index b = 0; b < layout.num_blocks(); ++b) x(layout.global(b, v[b])) += a;
    });
    return x;
  }

 private:
  void compact() {
    std::size_t out = 0;
    for (std::size_t i = 0; i < vertex_.size(); ++i) {
      if (!alive_[i]) continue;
      if (out != i) {
        vertex_[out] = std::move(vertex_[i]);
        weight_[out] = weight_[i];
        for (auto& col : columns_) col[out] = col[i];
        lookup_[vertex_[out]] = out;
      }
      alive_[out] = 1;
      ++out;
    }
    vertex_.resize(out);
    weight_.resize(out);
    alive_.resize(out);
    for (auto& col : columns_) col.resize(out);
  }

  std::vector<Assignment> vertex_;
  std::vector<Scalar> weight_;  ///< alpha / scale_
  std::vector<char> alive_;
  std::vector<std::vector<std::uint16_t>> columns_;  ///< columns_[b][slot] = chosen candidate
  std::unordered_map<Assignment, std::size_t, AssignmentHash> lookup_;
  Index live_ = 0;
  Scalar scale_ = 1;
};

template <typename Scalar>
struct TraceRecord {
  int iteration = 0;
  Scalar objective = 0;  ///< f(x_k)
  Scalar gap = 0;        ///< duality gap at x_k
  StepKind kind = StepKind::none;  ///< step taken from x_k
  Scalar lambda = 0;               ///< step size of the taken step
  Scalar lambda_fw = 0;
  Scalar lambda_swap = 0;  ///< away or SWAP candidate, depending on variant
  Scalar delta_fw = 0;     ///< objective decrease of the FW candidate
  Scalar delta_swap = 0;   ///< objective decrease of the away/SWAP candidate
  Index active_set_size = 0;
  std::int64_t wall_time_us = 0;
};

template <typename Scalar>
struct SolverTrace {
  std::vector<TraceRecord<Scalar>> records;
  int iterations = 0;
  std::int64_t wall_time_us = 0;
};

template <typename Scalar>
struct SolverResult {
  Vector<Scalar> fractional;
  Assignment rounded;
  SolverTrace<Scalar> trace;
  bool converged = false;
  ActiveSet<Scalar> active;
};

/// Linear minimization over the block-simplex product: per-block argmin, lowest index on ties.
template <typename Scalar, typename Derived>
Assignment lmo(const BlockLayout& layout, const Eigen::MatrixBase<Derived>& grad) {
  Assignment s{std::vector<Index>(static_cast<std::size_t>(layout.num_blocks()))};
  for (Index b = 0; b < layout.num_blocks(); ++b) {
    Index best = 0;
    Scalar best_v = grad(layout.offset(b));
    for (Index i = 1; i < layout.size(b); ++i) {
      const Scalar v = grad(layout.global(b, i));
      if (v < best_v) {
        best_v = v;
        best = i;
      }
    }
    s.chosen[static_cast<std::size_t>(b)] = best;
  }
  return s;
}

template <typename Scalar, typename Derived>
Assignment lmo(const BqpProblem<Scalar>& p, const Eigen::MatrixBase<Derived>& grad) {
  detail::check_length(p, grad);
  return lmo<Scalar>(p.layout(), grad);
}

/// <v, g> for a vertex v.
template <typename Scalar, typename Derived>
Scalar vertex_dot(const BlockLayout& layout, const Assignment& v,
                  const Eigen::MatrixBase<Derived>& g) {
  Scalar s = 0;
  for (Index b = 0; b < layout.num_blocks(); ++b) s += g(layout.global(b, v[b]));
  return s;
}

/// Active vertex maximizing <y, grad>; the oldest one wins ties.
template <typename Scalar, typename Derived>
Assignment away_vertex(const BlockLayout& layout, const ActiveSet<Scalar>& active,
                       const Eigen::MatrixBase<Derived>& grad) {
  if (active.empty()) throw std::invalid_argument("away_vertex: active set is empty");
  return active.max_dot(layout, grad.derived());
}

namespace detail {
/// Minimizer over [0, lambda_max] of  lambda*gd + lambda^2*dqd.
template <typename Scalar>
Scalar quadratic_step(Scalar gd, Scalar dqd, Scalar lambda_max) {
  if (dqd <= Scalar(1e-14)) return gd < Scalar(0) ? lambda_max : Scalar(0);
  return std::clamp(-gd / (Scalar(2) * dqd), Scalar(0), lambda_max);
}

template <typename Scalar>
Scalar decrease(Scalar lambda, Scalar gd, Scalar dqd) {
  return -(lambda * gd + lambda * lambda * dqd);
}

/// Q * indicator(v), accumulated from the selected columns.
template <typename Scalar>
void gather_columns(const SparseMatrix<Scalar>& q, const BlockLayout& layout, const Assignment& v,
                    Vector<Scalar>& out) {
  out.setZero(layout.num_vars());
  for (Index b = 0; b < layout.num_blocks(); ++b) {
    for (typename SparseMatrix<Scalar>::InnerIterator it(q, layout.global(b, v[b])); it; ++it) {
      out(it.row()) += it.value();
    }
  }
}
}  // namespace detail

/// Exact minimizer of f along x + lambda*d over [0, lambda_max].
template <typename Scalar>
Scalar line_search_exact(const BqpProblem<Scalar>& p, const Vector<Scalar>& x,
                         const Vector<Scalar>& d, Scalar lambda_max) {
  detail::check_length(p, x);
  detail::check_length(p, d);
  const Scalar gd = gradient(p, x).dot(d);
  const Scalar dqd = d.dot(p.quadratic() * d);
  return detail::quadratic_step(gd, dqd, lambda_max);
}

template <typename Scalar>
Scalar duality_gap(const BqpProblem<Scalar>& p, const Vector<Scalar>& x, const Assignment& s) {
  const Vector<Scalar> g = gradient(p, x);
  return g.dot(x) - vertex_dot<Scalar>(p.layout(), s, g);
}

/// Nearest binary feasible point: per-block argmax, lowest index on ties.
template <typename Derived>
Assignment round_solution(const BlockLayout& layout, const Eigen::MatrixBase<Derived>& x) {
  Assignment a{std::vector<Index>(static_cast<std::size_t>(layout.num_blocks()))};
  for (Index b = 0; b < layout.num_blocks(); ++b) {
    Index best = 0;
    for (Index i = 1; i < layout.size(b); ++i) {
      if (x(layout.global(b, i)) > x(layout.global(b, best))) best = i;
    }
    a.chosen[static_cast<std::size_t>(b)] = best;
  }
  return a;
}

/// f at a vertex.
template <typename Scalar>
Scalar vertex_objective(const BqpProblem<Scalar>& p, const Assignment& a) {
  return objective(p, to_indicator<Scalar>(p.layout(), a));
}

/// Exhaustive minimum over all binary feasible points. With forbid_shared_pixels, assignments
/// placing two targets on the same pixel (equal pixel keys) are skipped.
template <typename Scalar>
std::pair<Assignment, Scalar> brute_force_solve(const BqpProblem<Scalar>& p,
                                                bool forbid_shared_pixels = false) {
  const BlockLayout& layout = p.layout();
  const Index n = layout.num_blocks();
  double combos = 1;
  for (Index b = 0; b < n; ++b) combos *= static_cast<double>(layout.size(b));
  if (combos > 1e6) {
    throw std::invalid_argument("brute_force_solve: " + std::to_string(combos) +
                                " assignments exceed the 1e6 limit");
  }
  if (forbid_shared_pixels && p.pixel_keys().empty()) {
    throw std::invalid_argument("brute_force_solve: problem carries no pixel keys");
  }
  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> q = p.quadratic();
  const Vector<Scalar>& c = p.cost();

  std::vector<Index> idx(static_cast<std::size_t>(n), 0), global(static_cast<std::size_t>(n));
  Assignment best{std::vector<Index>(static_cast<std::size_t>(n), 0)};
  Scalar best_f = std::numeric_limits<Scalar>::infinity();
  bool found = false;
  while (true) {
    for (Index b = 0; b < n; ++b) global[b] = layout.global(b, idx[b]);
    bool allowed = true;
    if (forbid_shared_pixels) {
      for (Index a = 0; a < n && allowed; ++a) {
        for (Index b = a + 1; b < n; ++b) {
          if (p.pixel_keys()[global[a]] == p.pixel_keys()[global[b]]) {
            allowed = false;
            break;
          }
        }
      }
    }
    if (allowed) {
      Scalar f = 0;
      for (Index a = 0; a < n; ++a) {
        f += c(global[a]);
        for (Index b = 0; b < n; ++b) f += q(global[a], global[b]);
      }
      if (f < best_f) {
        best_f = f;
        best.chosen = idx;
        found = true;
      }
    }
    Index b = n - 1;
    while (b >= 0) {
      if (++idx[b] < layout.size(b)) break;
      idx[b] = 0;
      --b;
    }
    if (b < 0) break;
  }
  if (!found) throw std::runtime_error("brute_force_solve: no admissible assignment");
  return {best, best_f};
}

/// Called after every step with the record of the step and the new iterate.
template <typename Scalar>
using StepObserver = std::function<void(const TraceRecord<Scalar>&, const Vector<Scalar>&,
                                        const ActiveSet<Scalar>&)>;

/// Frank-Wolfe family solver for the relaxed problem, followed by rounding.
/// Starts from x0, or from the per-block uniform point when x0 is empty.
template <typename Scalar>
SolverResult<Scalar> fw_solve(const BqpProblem<Scalar>& p, const SolverConfig& cfg,
                              std::optional<std::type_identity_t<Vector<Scalar>>> x0 = std::nullopt,
                              const std::type_identity_t<StepObserver<Scalar>>& observer = {}) {
  cfg.validate();
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed_us = [&] {
    return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start).count();
  };
  const BlockLayout& layout = p.layout();
  SolverResult<Scalar> result;

  if (cfg.variant == SolverVariant::exact) {
    auto [a, f] = brute_force_solve(p, !p.pixel_keys().empty());
    result.fractional = to_indicator<Scalar>(layout, a);
    result.rounded = a;
    result.converged = true;
    result.active = ActiveSet<Scalar>::single(a);
    TraceRecord<Scalar> rec;
    rec.objective = f;
    rec.active_set_size = 1;
    rec.wall_time_us = elapsed_us();
    result.trace.records.push_back(rec);
    result.trace.wall_time_us = rec.wall_time_us;
    return result;
  }

  Vector<Scalar> x = x0 ? *x0 : uniform_point<Scalar>(layout);
  detail::check_length(p, x);
  if (!is_feasible(layout, x, false)) {
    throw std::invalid_argument("fw_solve: initial point is not feasible");
  }
  ActiveSet<Scalar> active = ActiveSet<Scalar>::decompose(layout, x);

  const SparseMatrix<Scalar>& q = p.quadratic();
  const Vector<Scalar>& c = p.cost();
  Vector<Scalar> qx = q * x;
  Vector<Scalar> qs, qy, g;
  Scalar f = c.dot(x) + x.dot(qx);
  if (!std::isfinite(static_cast<double>(f))) {
    throw std::runtime_error("fw_solve: non-finite objective at iteration 0");
  }

  const bool use_away = cfg.variant == SolverVariant::fw_away;
  const bool use_swap = cfg.variant == SolverVariant::fw_swap;
  int k = 0;
  for (;; ++k) {
    g = c + Scalar(2) * qx;
    const Assignment s = lmo<Scalar>(layout, g);
    const Scalar gx = g.dot(x);
    const Scalar gs = vertex_dot<Scalar>(layout, s, g);
    const Scalar gap = gx - gs;

    TraceRecord<Scalar> rec;
    rec.iteration = k;
    rec.objective = f;
    rec.gap = gap;
    rec.active_set_size = active.size();
    if (gap <= Scalar(cfg.epsilon)) {
      result.converged = true;
      rec.wall_time_us = elapsed_us();
      result.trace.records.push_back(rec);
      break;
    }
    if (k >= cfg.max_iterations) {
      rec.wall_time_us = elapsed_us();
      result.trace.records.push_back(rec);
      break;
    }

    const Scalar xqx = x.dot(qx);
    detail::gather_columns(q, layout, s, qs);
    const Scalar sqs = vertex_dot<Scalar>(layout, s, qs);
    const Scalar sqx = vertex_dot<Scalar>(layout, s, qx);

    // toward step d = s - x
    const Scalar gd_fw = gs - gx;
    const Scalar dqd_fw = sqs - Scalar(2) * sqx + xqx;
    Scalar lambda_fw = cfg.exact_line_search ? detail::quadratic_step(gd_fw, dqd_fw, Scalar(1))
                                             : Scalar(2) / Scalar(k + 2);
    const Scalar delta_fw = detail::decrease(lambda_fw, gd_fw, dqd_fw);
    rec.lambda_fw = lambda_fw;
    rec.delta_fw = delta_fw;

    StepKind kind = StepKind::fw;
    Scalar lambda = lambda_fw;
    Assignment y;
    Scalar alpha_y = 0, lambda_alt_max = 0;
    if (use_away || use_swap) {
      y = away_vertex<Scalar>(layout, active, g);
      alpha_y = active.alpha(y);
      detail::gather_columns(q, layout, y, qy);
      const Scalar gy = vertex_dot<Scalar>(layout, y, g);
      const Scalar yqy = vertex_dot<Scalar>(layout, y, qy);
      Scalar gd = 0, dqd = 0;
      bool available = false;
      if (use_away && alpha_y < Scalar(1) && active.size() > 1) {
        // away step d = x - y
        gd = gx - gy;
        dqd = xqx - Scalar(2) * vertex_dot<Scalar>(layout, y, qx) + yqy;
        lambda_alt_max = alpha_y / (Scalar(1) - alpha_y);
        available = true;
      } else if (use_swap && !(y == s)) {
        // SWAP step d = s - y
        gd = gs - gy;
        dqd = sqs - Scalar(2) * vertex_dot<Scalar>(layout, s, qy) + yqy;
        lambda_alt_max = alpha_y;
        available = true;
      }
      if (available) {
        const Scalar lambda_alt = detail::quadratic_step(gd, dqd, lambda_alt_max);
        const Scalar delta_alt = detail::decrease(lambda_alt, gd, dqd);
        rec.lambda_swap = lambda_alt;
        rec.delta_swap = delta_alt;
        if (delta_alt > delta_fw) {
          lambda = lambda_alt;
          const bool drop = lambda_alt >= lambda_alt_max;
          if (use_away) kind = drop ? StepKind::away_drop : StepKind::away;
          else kind = drop ? StepKind::swap_drop : StepKind::swap_add;
        }
      }
    }

    if (std::max(rec.delta_fw, rec.delta_swap) <= Scalar(0) && cfg.exact_line_search) {
      // no descent direction left at working precision
      rec.wall_time_us = elapsed_us();
      result.trace.records.push_back(rec);
      break;
    }

    switch (kind) {
      case StepKind::fw:
        x *= Scalar(1) - lambda;
        for (Index b = 0; b < layout.num_blocks(); ++b) x(layout.global(b, s[b])) += lambda;
        qx = (Scalar(1) - lambda) * qx + lambda * qs;
        if (lambda >= Scalar(1)) {
          active.reset(s);
        } else {
          active.scale(Scalar(1) - lambda);
          active.add_mass(s, lambda);
        }
        break;
      case StepKind::away:
      case StepKind::away_drop:
        x *= Scalar(1) + lambda;
        for (Index b = 0; b < layout.num_blocks(); ++b) x(layout.global(b, y[b])) -= lambda;
        qx = (Scalar(1) + lambda) * qx - lambda * qy;
        active.scale(Scalar(1) + lambda);
        if (kind == StepKind::away_drop) active.remove(y);
        else active.add_mass(y, -lambda);
        break;
      case StepKind::swap_add:
      case StepKind::swap_drop:
        for (Index b = 0; b < layout.num_blocks(); ++b) {
          x(layout.global(b, s[b])) += lambda;
          x(layout.global(b, y[b])) -= lambda;
        }
        qx += lambda * (qs - qy);
        if (kind == StepKind::swap_drop) active.remove(y);
        else active.add_mass(y, -lambda);
        active.add_mass(s, lambda);
        break;
      case StepKind::none: break;
    }
    if (kind == StepKind::away_drop || kind == StepKind::swap_drop) {
      // the dropped vertex may leave round-off mass behind in x
      x = x.cwiseMax(Scalar(0));
    }
    // weights only shrink globally on FW steps, so a full sweep now and then suffices
    if (kind != StepKind::fw) active.prune(y, Scalar(cfg.drop_tolerance));
    if ((k & 255) == 255) active.prune(Scalar(cfg.drop_tolerance));

    const Scalar f_next = c.dot(x) + x.dot(qx);
    if (!std::isfinite(static_cast<double>(f_next))) {
      throw std::runtime_error("fw_solve: non-finite objective at iteration " +
                               std::to_string(k + 1));
    }
    f = f_next;
    rec.kind = kind;
    rec.lambda = lambda;
    rec.wall_time_us = elapsed_us();
    result.trace.records.push_back(rec);
    if (observer) observer(rec, x, active);
  }

  active.prune(Scalar(cfg.drop_tolerance));
  result.trace.iterations = k;
  result.trace.wall_time_us = elapsed_us();
  result.rounded = round_solution(layout, x);
  result.fractional = std::move(x);
  result.active = std::move(active);
  return result;
}

/// CSV columns: iteration,objective,gap,step_kind,lambda,wall_time_us
template <typename Scalar>
void write_trace_csv(std::ostream& os, const SolverTrace<Scalar>& trace) {
  os << "iteration,objective,gap,step_kind,lambda,wall_time_us\n";
  for (const auto& r : trace.records) {
    os << r.iteration << ',' << r.objective << ',' << r.gap << ',' << to_string(r.kind) << ','
       << r.lambda << ',' << r.wall_time_us << '\n';
  }
}

}  // namespace crowdbqp

#endif  // CROWDBQP_FW_SOLVER_HPP
