#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hvgan {

enum class Orientation { Minimize, Maximize };

/// A point in objective space. Orientation travels with the data so that
/// minimization and maximization vectors can never be compared by accident.
class ObjectiveVector {
public:
    ObjectiveVector(std::vector<double> values, Orientation orientation);

    [[nodiscard]] auto values() const noexcept -> std::span<const double> { return values_; }
    [[nodiscard]] auto orientation() const noexcept -> Orientation { return orientation_; }
    [[nodiscard]] auto size() const noexcept -> std::size_t { return values_.size(); }
    [[nodiscard]] auto operator[](std::size_t i) const -> double { return values_[i]; }

    friend auto operator==(const ObjectiveVector&, const ObjectiveVector&) -> bool = default;

private:
    std::vector<double> values_;
    Orientation orientation_;
};

class PointSet {
public:
    PointSet() = default;
    explicit PointSet(std::vector<ObjectiveVector> points);

    void push_back(ObjectiveVector p);

    [[nodiscard]] auto points() const noexcept -> const std::vector<ObjectiveVector>& { return points_; }
    [[nodiscard]] auto size() const noexcept -> std::size_t { return points_.size(); }
    [[nodiscard]] auto empty() const noexcept -> bool { return points_.empty(); }
    [[nodiscard]] auto operator[](std::size_t i) const -> const ObjectiveVector& { return points_[i]; }
    /// 0 for an empty set.
    [[nodiscard]] auto dimension() const noexcept -> std::size_t;

    friend auto operator==(const PointSet&, const PointSet&) -> bool = default;

private:
    std::vector<ObjectiveVector> points_;
};

/// Reference point for hypervolume. Carries no orientation; it is read in the
/// orientation of the set it is used with.
struct ReferencePoint {
    std::vector<double> values;
};

inline constexpr std::size_t kExactMaxDimension = 6;
inline constexpr std::size_t kExactMaxPoints = 32;

/// Pareto dominance: `a` at least as good everywhere and strictly better somewhere.
[[nodiscard]] auto dominates(const ObjectiveVector& a, const ObjectiveVector& b) -> bool;

/// Points not dominated by any other point, in input order. Duplicates are kept.
[[nodiscard]] auto pareto_filter(const PointSet& s) -> PointSet;

/// Exact hypervolume of the region dominated by `s` and bounded by `ref`.
///
/// Recursive dimension sweep over the nondominated subset: points are sorted
/// on the last objective and each slab between consecutive levels contributes
/// its (d-1)-dimensional hypervolume times its thickness. Limited to
/// kExactMaxDimension objectives and kExactMaxPoints nondominated points.
/// Throws ValidationError when some point does not weakly dominate `ref`.
[[nodiscard]] auto hypervolume_exact(const PointSet& s, const ReferencePoint& ref) -> double;

struct MonteCarloEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
};

/// Uniform sampling in the box between the best corner of `s` and `ref`.
/// Deterministic for a fixed seed.
[[nodiscard]] auto hypervolume_mc(const PointSet& s, const ReferencePoint& ref, std::uint64_t samples,
                                  std::uint64_t seed) -> MonteCarloEstimate;

} // namespace hvgan
