#pragma once

#include <span>

#include "hvolt/problem.hpp"
#include "hvolt/solver.hpp"

namespace hvolt {

/// Brute-force reference for the finite-state semilinear system
///   du/dt = -Q u + h(t) .* G(u) + f(t),   u(0) = u0,
/// whose mild form is the integral equation with K = e^{-tQ}. Classical RK4
/// at step dt_fine (at least 4x finer than f's grid), sampled back onto f's
/// grid. Shares only problem data with the solver; no quadrature or kernel
/// code is reused.
GridFunction ode_reference(const SquareMatrix& generator, std::span<const double> u0,
                           const GridFunction& f, const WeightField& weight,
                           const Nonlinearity& g, double dt_fine);

/// Same fixed-point iteration at refine-x time resolution (refine >= 4) with
/// a proportionally larger iteration budget, restricted back to the coarse
/// grid. Only for small spaces (<= 4 points). `start` must match the start
/// of the solve being validated: when beta0 = 0 the equation can have
/// several fixed points and the two starts converge to different ones.
GridFunction volterra_reference(const ProblemInstance& problem, int refine,
                                double tol = 1e-12, std::size_t max_iter = 500,
                                StartChoice start = StartChoice::upper);

} // namespace hvolt
