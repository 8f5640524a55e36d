#pragma once

// Shared helpers and independent oracles for the test suites.

#include "hvgan/moo.hpp"
#include "hvgan/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <random>
#include <vector>

namespace hvgan::testing {

inline auto make_set(std::initializer_list<std::vector<double>> rows, Orientation o = Orientation::Minimize)
    -> PointSet
{
    PointSet s;
    for (const auto& r : rows) {
        s.push_back(ObjectiveVector(r, o));
    }
    return s;
}

inline auto rel_diff(double a, double b) -> double
{
    return std::abs(a - b) / std::max({1e-300, std::abs(a), std::abs(b)});
}

/// Inclusion-exclusion over all nonempty subsets: the volume of the union of
/// boxes [p, ref] (minimization). Exponential; only for a handful of points.
inline auto hypervolume_inclusion_exclusion(const std::vector<std::vector<double>>& pts,
                                            const std::vector<double>& ref) -> double
{
    const std::size_t n = pts.size();
    const std::size_t d = ref.size();
    double total = 0.0;
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        std::vector<double> corner(d, -INFINITY);
        int bits = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (std::size_t{1} << i)) {
                ++bits;
                for (std::size_t k = 0; k < d; ++k) {
                    corner[k] = std::max(corner[k], pts[i][k]);
                }
            }
        }
        double vol = 1.0;
        for (std::size_t k = 0; k < d; ++k) {
            vol *= std::max(0.0, ref[k] - corner[k]);
        }
        total += (bits % 2 == 1) ? vol : -vol;
    }
    return total;
}

inline auto random_points(std::mt19937_64& rng, std::size_t count, std::size_t dim)
    -> std::vector<std::vector<double>>
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
    for (auto& p : pts) {
        for (double& v : p) {
            v = u(rng);
        }
    }
    return pts;
}

inline auto to_set(const std::vector<std::vector<double>>& pts, Orientation o = Orientation::Minimize) -> PointSet
{
    PointSet s;
    for (const auto& p : pts) {
        s.push_back(ObjectiveVector(p, o));
    }
    return s;
}

inline auto random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) -> Tensor
{
    std::uniform_real_distribution<double> u(lo, hi);
    Tensor t(std::move(shape));
    for (double& v : t.data()) {
        v = u(rng);
    }
    return t;
}

// Quadruple-loop reference convolution, stride 1, zero padding.
inline auto naive_conv(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t pad) -> Tensor
{
    const auto n = x.extent(0), c = x.extent(1), h = x.extent(2), wd = x.extent(3);
    const auto o = w.extent(0), k = w.extent(2);
    const auto oh = h + 2 * pad - k + 1, ow = wd + 2 * pad - k + 1;
    Tensor out({n, o, oh, ow});
    for (std::size_t in = 0; in < n; ++in)
        for (std::size_t oc = 0; oc < o; ++oc)
            for (std::size_t y = 0; y < oh; ++y)
                for (std::size_t xx = 0; xx < ow; ++xx) {
                    double s = b[oc];
                    for (std::size_t ic = 0; ic < c; ++ic)
                        for (std::size_t ky = 0; ky < k; ++ky)
                            for (std::size_t kx = 0; kx < k; ++kx) {
                                const long iy = long(y + ky) - long(pad);
                                const long ix = long(xx + kx) - long(pad);
                                if (iy < 0 || ix < 0 || iy >= long(h) || ix >= long(wd)) continue;
                                s += w[((oc * c + ic) * k + ky) * k + kx] * x.at(in, ic, iy, ix);
                            }
                    out.at(in, oc, y, xx) = s;
                }
    return out;
}

} // namespace hvgan::testing
