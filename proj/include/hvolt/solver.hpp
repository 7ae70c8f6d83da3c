#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "hvolt/problem.hpp"

namespace hvolt {

struct ConvergenceCertificate;

enum class StartChoice { upper, lower, custom };

struct SolveOptions {
    StartChoice start = StartChoice::upper;
    std::optional<GridFunction> custom_start;
    double tol = 1e-10;
    std::size_t max_iter = 200;
    /// Skip the assumption gate (recorded on the Solution).
    bool force = false;
    /// Keep every iterate u_0..u_M for bound-domination studies.
    bool keep_iterates = false;
};

/// Converged (or flagged) outcome of the monotone Picard iteration.
struct Solution {
    GridFunction u;
    std::vector<double> history;        // sup |u_{m+1} - u_m| per sweep
    std::size_t iterations = 0;
    double residual = 0.0;
    /// max over sweeps and grid of (u_{m+1} - u_m); meaningful for the
    /// upper start, where the sequence must not increase.
    double monotonicity_violation = 0.0;
    bool converged = false;
    bool forced = false;
    StartChoice start = StartChoice::upper;
    double beta = 0.0;
    double start_threshold = 0.0;       // xi or eta behind the upper start
    std::vector<GridFunction> iterates; // filled when keep_iterates
    /// Attached by certificate-producing callers; solve() leaves it empty.
    std::shared_ptr<const ConvergenceCertificate> certificate;
};

/// Upper-start vs lower-start comparison: when the solution is unique the
/// decreasing and increasing limits coincide.
struct UniquenessReport {
    GridFunction upper;
    GridFunction lower;
    double sup_gap = 0.0;
    /// max over sweeps and grid of (lower_m - upper_m); order preservation
    /// keeps this at round-off level.
    double max_order_violation = 0.0;
    std::size_t upper_iterations = 0;
    std::size_t lower_iterations = 0;
    bool conclusive = false; // both branches converged
    bool pass = false;       // conclusive and sup_gap <= 10 tol
};

/// Duhamel construction of the inhomogeneous term:
///   g(x,t) = int K(x,y;t) u0(y) dmu(y)
///          + int_0^t int K(x,y;t-s) f(y,s) dmu(y) ds,
/// with g(.,0) = u0 exactly. T0 of the returned source defaults to the
/// grid horizon when t0 <= 0.
SourceField propagate_source(const Kernel& kernel, std::span<const double> u0,
                             const GridFunction& f, double t0 = 0.0);

/// One sweep of the fixed-point map
///   u_{m+1} = g + int_0^t int_X K(x,y;t-s) h(y,s) G(u_m(y,s)) dmu ds,
/// trapezoidal in s over grid nodes <= t; the t = 0 row equals g(.,0).
GridFunction picard_step(const ProblemInstance& problem, const GridFunction& u_m);

/// Iterates picard_step from the chosen start until the successive sup-gap
/// falls below tol or max_iter is reached (non-convergence is flagged on
/// the Solution, not thrown). The upper start is xi - beta + g, with eta in
/// place of xi in the substochastic regime.
Solution solve(const ProblemInstance& problem, const SolveOptions& options = {});

/// sup over the grid of |u - g - Volterra(K h G(u))|.
double residual(const ProblemInstance& problem, const GridFunction& u);

/// Runs the decreasing upper-start iteration against the increasing
/// lower-start iteration (w_0 = g) and reports the gap between their
/// limits.
UniquenessReport uniqueness_probe(const ProblemInstance& problem, double tol,
                                  std::size_t max_iter);

} // namespace hvolt
