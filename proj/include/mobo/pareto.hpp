#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace mobo {

/// A point in objective space. Every component is maximized; callers negate
/// minimized properties before handing them over.
using ObjectiveVector = std::vector<double>;

/// Largest objective count supported by the exact hypervolume routines.
inline constexpr std::size_t kMaxExactDimension = 6;

/// True iff a >= b componentwise and a > b in at least one component.
bool dominates(std::span<const double> a, std::span<const double> b);

/// True iff a >= b componentwise.
bool weakly_dominates(std::span<const double> a, std::span<const double> b);

/// True iff a > b in every component.
bool strictly_dominates(std::span<const double> a, std::span<const double> b);

struct FrontPoint {
  ObjectiveVector values;
  std::optional<std::string> id;
};

/// Mutually non-dominated objective vectors that all strictly dominate a fixed
/// reference point. Points are kept in lexicographic order of their values so
/// the stored sequence does not depend on insertion order.
class ParetoFront {
 public:
  explicit ParetoFront(ObjectiveVector ref_point);

  const ObjectiveVector& ref_point() const noexcept { return ref_; }
  const std::vector<FrontPoint>& points() const noexcept { return points_; }
  std::size_t dim() const noexcept { return ref_.size(); }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

  /// Objective vectors only, in stored order.
  std::vector<ObjectiveVector> values() const;

  /// Inserts y unless it is weakly dominated by an incumbent or fails to
  /// strictly dominate the reference point; removes incumbents y dominates.
  /// Returns whether y was inserted.
  bool insert(std::span<const double> y, std::optional<std::string> id = std::nullopt);

 private:
  ObjectiveVector ref_;
  std::vector<FrontPoint> points_;
};

/// Functional form of ParetoFront::insert.
ParetoFront update_front(const ParetoFront& front, std::span<const double> y,
                         std::optional<std::string> id = std::nullopt);

/// Exact Lebesgue measure of the union of boxes [ref, y]. Points that do not
/// strictly dominate ref contribute nothing. Throws UnsupportedDimension when
/// the dimension exceeds kMaxExactDimension.
double hypervolume(const std::vector<ObjectiveVector>& points, std::span<const double> ref);
double hypervolume(const ParetoFront& front);

/// Hypervolume improvement of adding y to the front. Zero whenever y is weakly
/// dominated by a front point or does not strictly dominate the reference point.
double hvi(std::span<const double> y, const ParetoFront& front);

/// Precomputed hypervolume-improvement evaluator for one fixed point set and
/// reference point. The set need not be non-dominated. Thread-safe for reads.
class HviEvaluator {
 public:
  HviEvaluator(const std::vector<ObjectiveVector>& points, ObjectiveVector ref);
  explicit HviEvaluator(const ParetoFront& front);

  double operator()(std::span<const double> y) const;

  /// Adds a point to the set (e.g. a fantasy observation).
  void add(std::span<const double> y);

  const ObjectiveVector& ref_point() const noexcept { return ref_; }
  const std::vector<ObjectiveVector>& points() const noexcept { return points_; }

 private:
  void rebuild();

  ObjectiveVector ref_;
  std::vector<ObjectiveVector> points_;
  // M == 2: points sorted by first objective descending.
  std::vector<std::pair<double, double>> staircase_;
  // M == 1: best value (or ref when empty).
  double best_ = 0.0;
};

/// |found ∩ truth| / |truth|. Throws InvalidInput on an empty truth set.
double fraction_recovered(const std::set<std::string>& found, const std::set<std::string>& truth);

/// (hv_t − hv_0) / hv_0. Throws InvalidInput unless hv_0 > 0.
double relative_hvi(double hv_t, double hv_0);

/// Componentwise minimum of a non-empty set of vectors.
ObjectiveVector nadir(const std::vector<ObjectiveVector>& points);

/// Indices of the points not dominated by any other point (ties all kept).
std::vector<std::size_t> non_dominated_indices(const std::vector<ObjectiveVector>& points);

}  // namespace mobo
