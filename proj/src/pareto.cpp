#include "mobo/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mobo/errors.hpp"

namespace mobo {

namespace {

void check_same_dim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw InvalidInput("objective dimension mismatch: " + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()));
  if (a.empty()) throw InvalidInput("objective vectors must have at least one component");
}

void check_finite(std::span<const double> y) {
  for (double v : y)
    if (!std::isfinite(v)) throw InvalidInput("objective vector has a non-finite component");
}

double box_volume(std::span<const double> y, std::span<const double> ref) {
  double v = 1.0;
  for (std::size_t m = 0; m < y.size(); ++m) v *= y[m] - ref[m];
  return v;
}

// Drops weakly dominated points (keeps one representative of duplicates).
std::vector<ObjectiveVector> non_dominated(std::vector<ObjectiveVector> pts) {
  std::vector<char> keep(pts.size(), 1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size() && keep[i]; ++j) {
      if (i == j) continue;
      if (dominates(pts[j], pts[i])) keep[i] = 0;
      // duplicates: keep the first occurrence only
      else if (j < i && pts[j] == pts[i]) keep[i] = 0;
    }
  }
  std::vector<ObjectiveVector> out;
  out.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (keep[i]) out.push_back(std::move(pts[i]));
  return out;
}

double hv2d(std::vector<ObjectiveVector> pts, std::span<const double> ref) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a[0] != b[0] ? a[0] > b[0] : a[1] > b[1];
  });
  double area = 0.0;
  double height = ref[1];
  for (const auto& p : pts) {
    if (p[1] > height) {
      area += (p[0] - ref[0]) * (p[1] - height);
      height = p[1];
    }
  }
  return area;
}

// Points must be mutually non-dominated and strictly dominate ref.
double hv_recursive(std::vector<ObjectiveVector> pts, std::span<const double> ref) {
  if (pts.empty()) return 0.0;
  const std::size_t dim = ref.size();
  if (dim == 1) {
    double best = pts.front()[0];
    for (const auto& p : pts) best = std::max(best, p[0]);
    return best - ref[0];
  }
  if (dim == 2) return hv2d(std::move(pts), ref);
  if (pts.size() == 1) return box_volume(pts.front(), ref);

  std::sort(pts.begin(), pts.end(), [dim](const auto& a, const auto& b) {
    if (a[dim - 1] != b[dim - 1]) return a[dim - 1] > b[dim - 1];
    return a < b;
  });
  double total = 0.0;
  std::vector<ObjectiveVector> limited;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    limited.clear();
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      ObjectiveVector q = pts[j];
      for (std::size_t m = 0; m < dim; ++m) q[m] = std::min(q[m], pts[i][m]);
      limited.push_back(std::move(q));
    }
    total += box_volume(pts[i], ref) - hv_recursive(non_dominated(std::move(limited)), ref);
    limited = {};
  }
  return total;
}

std::vector<ObjectiveVector> clip_to_ref(const std::vector<ObjectiveVector>& points,
                                         std::span<const double> ref) {
  std::vector<ObjectiveVector> kept;
  kept.reserve(points.size());
  for (const auto& p : points) {
    check_same_dim(p, ref);
    if (strictly_dominates(p, ref)) kept.push_back(p);
  }
  return kept;
}

void check_exact_dim(std::size_t dim) {
  if (dim == 0) throw InvalidInput("reference point must have at least one component");
  if (dim > kMaxExactDimension)
    throw UnsupportedDimension("exact hypervolume supports at most " +
                               std::to_string(kMaxExactDimension) + " objectives, got " +
                               std::to_string(dim));
}

}  // namespace

bool dominates(std::span<const double> a, std::span<const double> b) {
  check_same_dim(a, b);
  bool strict = false;
  for (std::size_t m = 0; m < a.size(); ++m) {
    if (a[m] < b[m]) return false;
    if (a[m] > b[m]) strict = true;
  }
  return strict;
}

bool weakly_dominates(std::span<const double> a, std::span<const double> b) {
  check_same_dim(a, b);
  for (std::size_t m = 0; m < a.size(); ++m)
    if (a[m] < b[m]) return false;
  return true;
}

bool strictly_dominates(std::span<const double> a, std::span<const double> b) {
  check_same_dim(a, b);
  for (std::size_t m = 0; m < a.size(); ++m)
    if (!(a[m] > b[m])) return false;
  return true;
}

ParetoFront::ParetoFront(ObjectiveVector ref_point) : ref_(std::move(ref_point)) {
  if (ref_.empty()) throw InvalidInput("reference point must have at least one component");
  check_finite(ref_);
}

std::vector<ObjectiveVector> ParetoFront::values() const {
  std::vector<ObjectiveVector> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.push_back(p.values);
  return out;
}

bool ParetoFront::insert(std::span<const double> y, std::optional<std::string> id) {
  check_same_dim(y, ref_);
  check_finite(y);
  if (!strictly_dominates(y, ref_)) return false;
  for (const auto& p : points_)
    if (weakly_dominates(p.values, y)) return false;
  std::erase_if(points_, [&](const FrontPoint& p) { return dominates(y, p.values); });
  FrontPoint fp{ObjectiveVector(y.begin(), y.end()), std::move(id)};
  auto pos = std::lower_bound(points_.begin(), points_.end(), fp.values,
                              [](const FrontPoint& a, const ObjectiveVector& v) { return a.values < v; });
  points_.insert(pos, std::move(fp));
  return true;
}

ParetoFront update_front(const ParetoFront& front, std::span<const double> y,
                         std::optional<std::string> id) {
  ParetoFront out = front;
  out.insert(y, std::move(id));
  return out;
}

double hypervolume(const std::vector<ObjectiveVector>& points, std::span<const double> ref) {
  check_exact_dim(ref.size());
  auto kept = clip_to_ref(points, ref);
  return std::max(0.0, hv_recursive(non_dominated(std::move(kept)), ref));
}

double hypervolume(const ParetoFront& front) { return hypervolume(front.values(), front.ref_point()); }

double hvi(std::span<const double> y, const ParetoFront& front) {
  check_same_dim(y, front.ref_point());
  return HviEvaluator(front)(y);
}

HviEvaluator::HviEvaluator(const std::vector<ObjectiveVector>& points, ObjectiveVector ref)
    : ref_(std::move(ref)) {
  check_exact_dim(ref_.size());
  points_ = clip_to_ref(points, ref_);
  rebuild();
}

HviEvaluator::HviEvaluator(const ParetoFront& front) : HviEvaluator(front.values(), front.ref_point()) {}

void HviEvaluator::add(std::span<const double> y) {
  check_same_dim(y, ref_);
  if (!strictly_dominates(y, ref_)) return;
  points_.emplace_back(y.begin(), y.end());
  rebuild();
}

void HviEvaluator::rebuild() {
  const std::size_t dim = ref_.size();
  if (dim == 1) {
    best_ = ref_[0];
    for (const auto& p : points_) best_ = std::max(best_, p[0]);
  } else if (dim == 2) {
    staircase_.clear();
    staircase_.reserve(points_.size());
    for (const auto& p : points_) staircase_.emplace_back(p[0], p[1]);
    std::sort(staircase_.begin(), staircase_.end(),
              [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second > b.second; });
  }
}

double HviEvaluator::operator()(std::span<const double> y) const {
  if (y.size() != ref_.size()) throw InvalidInput("objective dimension mismatch");
  if (!strictly_dominates(y, ref_)) return 0.0;
  const std::size_t dim = ref_.size();
  if (dim == 1) return std::max(0.0, y[0] - best_);
  if (dim == 2) {
    // Integrate the part of [ref, y] above the staircase, sweeping the first
    // objective from y[0] down to ref[0].
    double area = 0.0;
    double upper = y[0];
    double height = ref_[1];
    for (const auto& [x, h] : staircase_) {
      if (x < upper) {
        const double lower = std::max(x, ref_[0]);
        if (y[1] > height) area += (upper - lower) * (y[1] - height);
        upper = lower;
        if (upper <= ref_[0]) return area;
      }
      height = std::max(height, h);
      if (height >= y[1]) return area;
    }
    if (upper > ref_[0] && y[1] > height) area += (upper - ref_[0]) * (y[1] - height);
    return area;
  }
  for (const auto& p : points_)
    if (weakly_dominates(p, y)) return 0.0;
  std::vector<ObjectiveVector> limited;
  limited.reserve(points_.size());
  for (const auto& p : points_) {
    ObjectiveVector q = p;
    for (std::size_t m = 0; m < dim; ++m) q[m] = std::min(q[m], y[m]);
    limited.push_back(std::move(q));
  }
  const double covered = hv_recursive(non_dominated(std::move(limited)), ref_);
  return std::max(0.0, box_volume(y, ref_) - covered);
}

double fraction_recovered(const std::set<std::string>& found, const std::set<std::string>& truth) {
  if (truth.empty()) throw InvalidInput("true Pareto set is empty");
  std::size_t hit = 0;
  for (const auto& id : truth) hit += found.count(id);
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

double relative_hvi(double hv_t, double hv_0) {
  if (!(hv_0 > 0.0)) throw InvalidInput("relative HVI needs a positive baseline hypervolume");
  return (hv_t - hv_0) / hv_0;
}

ObjectiveVector nadir(const std::vector<ObjectiveVector>& points) {
  if (points.empty()) throw InvalidInput("nadir of an empty set");
  ObjectiveVector out = points.front();
  for (const auto& p : points) {
    check_same_dim(p, out);
    for (std::size_t m = 0; m < out.size(); ++m) out[m] = std::min(out[m], p[m]);
  }
  return out;
}

std::vector<std::size_t> non_dominated_indices(const std::vector<ObjectiveVector>& points) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < points.size() && !dominated; ++j)
      dominated = j != i && dominates(points[j], points[i]);
    if (!dominated) out.push_back(i);
  }
  return out;
}

}  // namespace mobo
