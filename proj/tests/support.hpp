#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "hvolt/certificate.hpp"
#include "hvolt/oracle.hpp"
#include "hvolt/problem.hpp"
#include "hvolt/solver.hpp"

namespace testsupport {

using namespace hvolt;

inline SquareMatrix two_state_conservative_generator() {
    SquareMatrix q(2);
    q(0, 0) = 1.0;
    q(0, 1) = -1.0;
    q(1, 0) = -1.0;
    q(1, 1) = 1.0;
    return q;
}

inline std::shared_ptr<const DiscreteMeasureSpace> two_point_space() {
    const double w[] = {0.5, 0.5};
    return std::make_shared<const DiscreteMeasureSpace>(build_finite_state_space(w));
}

inline std::shared_ptr<const DiscreteMeasureSpace> one_point_space() {
    const double w[] = {1.0};
    return std::make_shared<const DiscreteMeasureSpace>(build_finite_state_space(w));
}

// Canonical all-pass stochastic desk instance: 2-state conservative
// generator, G(u) = sqrt(u), mixture weight r=1 c=0.5 lambda0=0.5,
// g = 0.25, T = T0 = 5.
inline ProblemInstance desk_stochastic(std::size_t nt = 200, double horizon = 5.0,
                                       double ratio_c = 0.5, double scale = 0.0,
                                       double rate = 1.0) {
    auto space = two_point_space();
    auto grid = std::make_shared<const TimeGrid>(horizon, nt);
    Kernel kernel = matrix_semigroup_kernel(two_state_conservative_generator(), space);
    Nonlinearity g = power_nonlinearity(0.5);
    WeightField weight = mixture_weight(rate, ratio_c, {0.5, 0.5}, scale);
    SourceField source =
        SourceField::from_grid(GridFunction(space, grid, 0.25), horizon);
    return make_problem(space, grid, std::move(kernel), std::move(g), std::move(weight),
                        std::move(source));
}

// 1-state damped desk instance: base generator 0 damped by m=1, h = 1,
// g = 1, G(u) = sqrt(u); T = T0 = 2 unless overridden.
inline ProblemInstance desk_substochastic(std::size_t nt = 200, double horizon = 2.0) {
    auto space = one_point_space();
    auto grid = std::make_shared<const TimeGrid>(horizon, nt);
    SquareMatrix zero(1);
    Kernel kernel = damp(matrix_semigroup_kernel(zero, space), 1.0);
    Nonlinearity g = power_nonlinearity(0.5);
    WeightField weight = WeightField::constant(1.0);
    SourceField source =
        SourceField::from_grid(GridFunction(space, grid, 1.0), horizon);
    return make_problem(space, grid, std::move(kernel), std::move(g), std::move(weight),
                        std::move(source));
}

// Independent root reference: scan [lo, hi] in `steps` uniform intervals for
// the rightmost sign change of f (from <= 0 to > 0), then bisect inside it.
inline double scan_bisect_root(const std::function<double(double)>& f, double lo,
                               double hi, std::size_t steps) {
    double left = lo;
    double right = hi;
    bool found = false;
    double prev_x = lo;
    double prev_f = f(lo);
    for (std::size_t i = 1; i <= steps; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps);
        const double fx = f(x);
        if (prev_f <= 0.0 && fx > 0.0) {
            left = prev_x;
            right = x;
            found = true;
        }
        prev_x = x;
        prev_f = fx;
    }
    if (!found) {
        return std::nan("");
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (left + right);
        if (mid <= left || mid >= right) {
            break;
        }
        if (f(mid) > 0.0) {
            right = mid;
        } else {
            left = mid;
        }
    }
    return 0.5 * (left + right);
}

} // namespace testsupport
