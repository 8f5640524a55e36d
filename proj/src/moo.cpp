#include "hvgan/moo.hpp"

#include "hvgan/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace hvgan {

ObjectiveVector::ObjectiveVector(std::vector<double> values, Orientation orientation)
    : values_(std::move(values)), orientation_(orientation)
{
    if (values_.empty()) {
        throw ValidationError("objective vector must have at least one component");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw ValidationError("objective vector has a non-finite component");
        }
    }
}

PointSet::PointSet(std::vector<ObjectiveVector> points)
{
    points_.reserve(points.size());
    for (auto& p : points) {
        push_back(std::move(p));
    }
}

void PointSet::push_back(ObjectiveVector p)
{
    if (!points_.empty()) {
        if (p.size() != points_.front().size()) {
            throw ValidationError("point " + std::to_string(points_.size()) + " has dimension "
                                  + std::to_string(p.size()) + ", expected "
                                  + std::to_string(points_.front().size()));
        }
        if (p.orientation() != points_.front().orientation()) {
            throw ValidationError("mixed orientations in point set");
        }
    }
    points_.push_back(std::move(p));
}

auto PointSet::dimension() const noexcept -> std::size_t
{
    return points_.empty() ? 0 : points_.front().size();
}

auto dominates(const ObjectiveVector& a, const ObjectiveVector& b) -> bool
{
    if (a.size() != b.size()) {
        throw ValidationError("dominance check on vectors of different dimension");
    }
    if (a.orientation() != b.orientation()) {
        throw ValidationError("dominance check on vectors of different orientation");
    }
    const bool maximize = a.orientation() == Orientation::Maximize;
    bool strictly_better = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double x = maximize ? a[i] : -a[i];
        const double y = maximize ? b[i] : -b[i];
        if (x < y) {
            return false;
        }
        strictly_better = strictly_better || x > y;
    }
    return strictly_better;
}

auto pareto_filter(const PointSet& s) -> PointSet
{
    PointSet front;
    for (std::size_t i = 0; i < s.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < s.size() && !dominated; ++j) {
            dominated = j != i && dominates(s[j], s[i]);
        }
        if (!dominated) {
            front.push_back(s[i]);
        }
    }
    return front;
}

namespace {

    // Points are stored flat, row-major, already converted to minimization.
    struct MinSet {
        std::size_t dim = 0;
        std::vector<double> coords;

        [[nodiscard]] auto count() const -> std::size_t { return dim == 0 ? 0 : coords.size() / dim; }
        [[nodiscard]] auto at(std::size_t i, std::size_t k) const -> double { return coords[i * dim + k]; }
    };

    // Converts to minimization and checks the reference precondition.
    auto to_min_set(const PointSet& s, const ReferencePoint& ref) -> std::pair<MinSet, std::vector<double>>
    {
        const std::size_t d = ref.values.size();
        for (double r : ref.values) {
            if (!std::isfinite(r)) {
                throw ValidationError("reference point has a non-finite component");
            }
        }
        if (!s.empty() && s.dimension() != d) {
            throw ValidationError("reference point has dimension " + std::to_string(d) + ", points have "
                                  + std::to_string(s.dimension()));
        }
        const double sign = (!s.empty() && s[0].orientation() == Orientation::Maximize) ? -1.0 : 1.0;
        MinSet out{d, {}};
        out.coords.reserve(s.size() * d);
        for (std::size_t i = 0; i < s.size(); ++i) {
            for (std::size_t k = 0; k < d; ++k) {
                if (sign * s[i][k] > sign * ref.values[k]) {
                    throw ValidationError("reference point is not dominated by point " + std::to_string(i)
                                          + " (objective " + std::to_string(k) + ")");
                }
                out.coords.push_back(sign * s[i][k]);
            }
        }
        std::vector<double> r(d);
        std::transform(ref.values.begin(), ref.values.end(), r.begin(), [&](double v) { return sign * v; });
        return {std::move(out), std::move(r)};
    }

    // Hypervolume of the first `dim` coordinates of `pts` (indices into `set`).
    auto sweep(const MinSet& set, std::vector<std::size_t> pts, std::size_t dim, const std::vector<double>& ref)
        -> double
    {
        if (pts.empty()) {
            return 0.0;
        }
        const std::size_t last = dim - 1;
        if (dim == 1) {
            double best = ref[0];
            for (auto i : pts) {
                best = std::min(best, set.at(i, 0));
            }
            return ref[0] - best;
        }
        std::stable_sort(pts.begin(), pts.end(),
                         [&](std::size_t a, std::size_t b) { return set.at(a, last) < set.at(b, last); });

        double volume = 0.0;
        std::vector<std::size_t> active;
        active.reserve(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            active.push_back(pts[i]);
            const double level = set.at(pts[i], last);
            const double next = i + 1 < pts.size() ? set.at(pts[i + 1], last) : ref[last];
            const double thickness = next - level;
            if (thickness > 0.0) {
                volume += thickness * sweep(set, active, dim - 1, ref);
            }
        }
        return volume;
    }

} // namespace

auto hypervolume_exact(const PointSet& s, const ReferencePoint& ref) -> double
{
    if (ref.values.empty()) {
        throw ValidationError("reference point must have at least one component");
    }
    auto [all, r] = to_min_set(s, ref);
    if (s.empty()) {
        return 0.0;
    }
    if (all.dim > kExactMaxDimension) {
        throw ValidationError("exact hypervolume supports at most " + std::to_string(kExactMaxDimension)
                              + " objectives");
    }
    const PointSet front = pareto_filter(s);
    if (front.size() > kExactMaxPoints) {
        throw ValidationError("exact hypervolume supports at most " + std::to_string(kExactMaxPoints)
                              + " nondominated points");
    }
    auto [set, ref_min] = to_min_set(front, ref);
    std::vector<std::size_t> idx(set.count());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return sweep(set, std::move(idx), set.dim, ref_min);
}

auto hypervolume_mc(const PointSet& s, const ReferencePoint& ref, std::uint64_t samples, std::uint64_t seed)
    -> MonteCarloEstimate
{
    if (ref.values.empty()) {
        throw ValidationError("reference point must have at least one component");
    }
    if (samples == 0) {
        throw ValidationError("Monte-Carlo hypervolume needs at least one sample");
    }
    auto [set, r] = to_min_set(s, ref);
    if (s.empty()) {
        return {};
    }
    const std::size_t d = set.dim;
    const std::size_t n = set.count();

    std::vector<double> lower(d);
    double box = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
        double lo = r[k];
        for (std::size_t i = 0; i < n; ++i) {
            lo = std::min(lo, set.at(i, k));
        }
        lower[k] = lo;
        box *= r[k] - lo;
    }
    if (box == 0.0) {
        return {};
    }

    std::mt19937_64 rng(seed);
    std::vector<std::uniform_real_distribution<double>> axes;
    axes.reserve(d);
    for (std::size_t k = 0; k < d; ++k) {
        axes.emplace_back(lower[k], r[k]);
    }
    std::vector<double> z(d);
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < samples; ++t) {
        for (std::size_t k = 0; k < d; ++k) {
            z[k] = axes[k](rng);
        }
        for (std::size_t i = 0; i < n; ++i) {
            bool covers = true;
            for (std::size_t k = 0; k < d && covers; ++k) {
                covers = set.at(i, k) <= z[k];
            }
            if (covers) {
                ++hits;
                break;
            }
        }
    }
    const double frac = static_cast<double>(hits) / static_cast<double>(samples);
    return {frac * box, std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples)) * box};
}

} // namespace hvgan
