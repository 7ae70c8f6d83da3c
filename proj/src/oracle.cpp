#include "hvolt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hvolt/errors.hpp"
#include "hvolt/solver.hpp"

namespace hvolt {

namespace {

// Piecewise-linear sampling of a grid function in time.
double interp_time(const GridFunction& f, std::size_t x, double t) {
    const auto& grid = *f.time();
    if (t <= 0.0) {
        return f(x, 0);
    }
    if (t >= grid.horizon()) {
        return f(x, grid.steps());
    }
    const double pos = t / grid.dt();
    const std::size_t j = std::min(static_cast<std::size_t>(pos), grid.steps() - 1);
    const double frac = pos - static_cast<double>(j);
    return (1.0 - frac) * f(x, j) + frac * f(x, j + 1);
}

} // namespace

GridFunction ode_reference(const SquareMatrix& generator, std::span<const double> u0,
                           const GridFunction& f, const WeightField& weight,
                           const Nonlinearity& g, double dt_fine) {
    const std::size_t n = u0.size();
    if (generator.n != n || f.n_points() != n) {
        throw std::invalid_argument("generator, u0 and f must share one space");
    }
    const auto& grid = *f.time();
    if (!(dt_fine > 0.0) || dt_fine > grid.dt() / 4.0 + 1e-15) {
        throw std::invalid_argument("oracle step must be at least 4x finer than the grid");
    }

    // Integer number of fine substeps per coarse interval so the sample
    // points land exactly on the coarse nodes.
    const auto substeps =
        static_cast<std::size_t>(std::ceil(grid.dt() / dt_fine - 1e-12));
    const double h_step = grid.dt() / static_cast<double>(substeps);

    std::vector<double> u(u0.begin(), u0.end());
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

    auto deriv = [&](double t, const std::vector<double>& state, std::vector<double>& out) {
        for (std::size_t x = 0; x < n; ++x) {
            double v = 0.0;
            for (std::size_t y = 0; y < n; ++y) {
                v -= generator(x, y) * state[y];
            }
            v += weight.h(x, t) * g(std::max(state[x], 0.0));
            v += interp_time(f, x, t);
            out[x] = v;
        }
    };

    GridFunction result(f.space(), f.time());
    for (std::size_t x = 0; x < n; ++x) {
        result.at(x, 0) = u[x];
    }

    for (std::size_t j = 1; j < grid.nodes(); ++j) {
        double t = grid.node(j - 1);
        for (std::size_t s = 0; s < substeps; ++s) {
            deriv(t, u, k1);
            for (std::size_t x = 0; x < n; ++x) {
                tmp[x] = u[x] + 0.5 * h_step * k1[x];
            }
            deriv(t + 0.5 * h_step, tmp, k2);
            for (std::size_t x = 0; x < n; ++x) {
                tmp[x] = u[x] + 0.5 * h_step * k2[x];
            }
            deriv(t + 0.5 * h_step, tmp, k3);
            for (std::size_t x = 0; x < n; ++x) {
                tmp[x] = u[x] + h_step * k3[x];
            }
            deriv(t + h_step, tmp, k4);
            for (std::size_t x = 0; x < n; ++x) {
                u[x] += h_step / 6.0 * (k1[x] + 2.0 * k2[x] + 2.0 * k3[x] + k4[x]);
                if (!std::isfinite(u[x]) || std::abs(u[x]) > 1e12) {
                    throw OracleFailure("ode reference blew up; instance is unstable");
                }
            }
            t += h_step;
        }
        for (std::size_t x = 0; x < n; ++x) {
            result.at(x, j) = u[x];
        }
    }
    return result;
}

GridFunction volterra_reference(const ProblemInstance& problem, int refine, double tol,
                                std::size_t max_iter, StartChoice start) {
    if (problem.space().size() > 4) {
        throw std::invalid_argument("volterra reference is limited to <= 4 spatial points");
    }
    if (refine < 4) {
        throw std::invalid_argument("volterra reference needs a refinement factor >= 4");
    }

    const auto& coarse = problem.time();
    auto fine = std::make_shared<const TimeGrid>(
        coarse.horizon(), coarse.steps() * static_cast<std::size_t>(refine));

    // Source resampled by linear interpolation (exact for the constant and
    // Duhamel-of-constant sources used at desk scale).
    const auto& g_coarse = problem.source().g();
    GridFunction g_fine(problem.space_ptr(), fine);
    for (std::size_t j = 0; j < fine->nodes(); ++j) {
        const double t = fine->node(j);
        for (std::size_t x = 0; x < problem.space().size(); ++x) {
            g_fine.at(x, j) = interp_time(g_coarse, x, t);
        }
    }

    ProblemInstance refined = make_problem(
        problem.space_ptr(), fine, problem.kernel(), problem.nonlinearity(),
        problem.weight(), SourceField::from_grid(std::move(g_fine), problem.source().T0()));

    SolveOptions options;
    options.start = start;
    options.tol = tol;
    options.max_iter = max_iter * static_cast<std::size_t>(refine);
    options.force = true; // caller vetted the instance; the oracle only refines it
    const Solution fine_solution = solve(refined, options);
    if (!fine_solution.converged) {
        throw OracleFailure("volterra reference did not converge at the fine level");
    }

    GridFunction restricted(problem.space_ptr(), problem.time_ptr());
    for (std::size_t j = 0; j < coarse.nodes(); ++j) {
        const std::size_t jf = j * static_cast<std::size_t>(refine);
        for (std::size_t x = 0; x < problem.space().size(); ++x) {
            restricted.at(x, j) = fine_solution.u(x, jf);
        }
    }
    return restricted;
}

} // namespace hvolt
