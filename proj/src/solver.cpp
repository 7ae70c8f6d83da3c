#include "hvolt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hvolt/errors.hpp"

namespace hvolt {

namespace {

constexpr double kNegativeClamp = -1e-12;

// Trapezoid weight for node i within [0, j].
inline double trapezoid_weight(std::size_t i, std::size_t j) {
    return (i == 0 || i == j) ? 0.5 : 1.0;
}

} // namespace

SourceField propagate_source(const Kernel& kernel, std::span<const double> u0,
                             const GridFunction& f, double t0) {
    const auto& space = *kernel.space();
    const std::size_t n = space.size();
    if (u0.size() != n) {
        throw std::invalid_argument("u0 length does not match the space");
    }
    if (f.n_points() != n) {
        throw std::invalid_argument("forcing grid does not match the space");
    }
    for (double v : u0) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("u0 must be non-negative");
        }
    }
    if (f.min_value() < kNegativeClamp) {
        throw std::invalid_argument("forcing must be non-negative");
    }

    const auto& grid = *f.time();
    const double dt = grid.dt();
    const KernelTable table(kernel, grid);

    GridFunction g(f.space(), f.time());
    for (std::size_t x = 0; x < n; ++x) {
        g.at(x, 0) = u0[x];
    }
    for (std::size_t j = 1; j < grid.nodes(); ++j) {
        const SquareMatrix& prop = table.at(j);
        for (std::size_t x = 0; x < n; ++x) {
            double v = 0.0;
            for (std::size_t y = 0; y < n; ++y) {
                v += prop(x, y) * u0[y] * space.weight(y);
            }
            double conv = 0.0;
            for (std::size_t i = 0; i <= j; ++i) {
                const SquareMatrix& k = table.at(j - i);
                double inner = 0.0;
                for (std::size_t y = 0; y < n; ++y) {
                    inner += k(x, y) * f(y, i) * space.weight(y);
                }
                conv += trapezoid_weight(i, j) * inner;
            }
            g.at(x, j) = v + dt * conv;
        }
    }
    return SourceField::from_grid(std::move(g),
                                  t0 > 0.0 ? t0 : grid.horizon());
}

GridFunction picard_step(const ProblemInstance& problem, const GridFunction& u_m) {
    const auto& space = problem.space();
    const auto& grid = problem.time();
    const std::size_t n = space.size();
    if (u_m.n_points() != n || u_m.n_nodes() != grid.nodes()) {
        throw std::invalid_argument("iterate does not match the problem grid");
    }
    if (u_m.min_value() < kNegativeClamp) {
        throw InvalidIterate("iterate carries negative values beyond round-off");
    }

    const auto& g_src = problem.source().g();
    const auto& table = problem.kernel_table();
    const auto& weight = problem.weight();
    const auto& g_fun = problem.nonlinearity();
    const double dt = grid.dt();

    // W(i, y) = weight(y) * h(y, t_i) * G(u_m(y, t_i)), the integrand of the
    // space quadrature at each node.
    std::vector<double> w(grid.nodes() * n);
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
        const double t = grid.node(i);
        for (std::size_t y = 0; y < n; ++y) {
            const double u = std::max(u_m(y, i), 0.0);
            w[i * n + y] = space.weight(y) * weight.h(y, t) * g_fun(u);
        }
    }

    GridFunction out(problem.space_ptr(), problem.time_ptr());
    for (std::size_t x = 0; x < n; ++x) {
        out.at(x, 0) = g_src(x, 0);
    }
    for (std::size_t j = 1; j < grid.nodes(); ++j) {
        for (std::size_t x = 0; x < n; ++x) {
            double acc = 0.0;
            for (std::size_t i = 0; i <= j; ++i) {
                const SquareMatrix& k = table.at(j - i);
                const double* wi = &w[i * n];
                double inner = 0.0;
                for (std::size_t y = 0; y < n; ++y) {
                    inner += k(x, y) * wi[y];
                }
                acc += trapezoid_weight(i, j) * inner;
            }
            out.at(x, j) = g_src(x, j) + dt * acc;
        }
    }
    return out;
}

namespace {

GridFunction make_start(const ProblemInstance& problem, const SolveOptions& options,
                        double* beta_out, double* threshold_out) {
    const auto& source = problem.source();
    *beta_out = source.beta();
    *threshold_out = 0.0;

    switch (options.start) {
    case StartChoice::lower:
        return source.g();
    case StartChoice::custom:
        if (!options.custom_start) {
            throw std::invalid_argument("custom start requested without a grid");
        }
        return *options.custom_start;
    case StartChoice::upper:
        break;
    }

    double threshold;
    if (problem.regime() == Regime::stochastic) {
        threshold = solve_xi(problem.nonlinearity(), source.beta());
    } else {
        threshold = solve_eta(problem.nonlinearity(), source.beta(),
                              problem.weight().sup_h(),
                              problem.kernel().lambda_minus());
    }
    *threshold_out = threshold;

    GridFunction start = source.g();
    const double offset = threshold - source.beta();
    for (std::size_t j = 0; j < start.n_nodes(); ++j) {
        for (double& v : start.slice(j)) {
            v += offset;
        }
    }
    return start;
}

} // namespace

Solution solve(const ProblemInstance& problem, const SolveOptions& options) {
    if (!options.force) {
        const AssumptionReport report = check_assumptions(problem);
        if (!report.existence_pass()) {
            std::string failing;
            for (const auto& e : report.entries) {
                if (!e.rate_only && !e.pass) {
                    failing += failing.empty() ? e.name : ", " + e.name;
                }
            }
            throw AssumptionFailure("existence assumptions fail: " + failing);
        }
    }

    double beta = 0.0;
    double threshold = 0.0;
    GridFunction current = make_start(problem, options, &beta, &threshold);

    Solution sol{GridFunction(problem.space_ptr(), problem.time_ptr()),
                 {},
                 0,
                 0.0,
                 0.0,
                 false,
                 options.force,
                 options.start,
                 beta,
                 threshold,
                 {},
                 nullptr};
    if (options.keep_iterates) {
        sol.iterates.push_back(current);
    }

    for (std::size_t m = 0; m < options.max_iter; ++m) {
        GridFunction next = picard_step(problem, current);
        const double gap = sup_abs_diff(next, current);
        sol.history.push_back(gap);
        if (options.start == StartChoice::upper) {
            sol.monotonicity_violation =
                std::max(sol.monotonicity_violation, max_signed_diff(next, current));
        }
        current = std::move(next);
        if (options.keep_iterates) {
            sol.iterates.push_back(current);
        }
        sol.iterations = m + 1;
        if (gap <= options.tol) {
            sol.converged = true;
            break;
        }
    }

    sol.u = std::move(current);
    sol.residual = residual(problem, sol.u);
    return sol;
}

double residual(const ProblemInstance& problem, const GridFunction& u) {
    return sup_abs_diff(u, picard_step(problem, u));
}

UniquenessReport uniqueness_probe(const ProblemInstance& problem, double tol,
                                  std::size_t max_iter) {
    double beta = 0.0;
    double threshold = 0.0;
    SolveOptions upper_opts;
    upper_opts.start = StartChoice::upper;
    GridFunction upper = make_start(problem, upper_opts, &beta, &threshold);
    GridFunction lower = problem.source().g();

    UniquenessReport report{upper, lower, 0.0, max_signed_diff(lower, upper), 0, 0,
                            false, false};

    bool upper_done = false;
    bool lower_done = false;
    for (std::size_t m = 0; m < max_iter && !(upper_done && lower_done); ++m) {
        if (!upper_done) {
            GridFunction next = picard_step(problem, upper);
            const double gap = sup_abs_diff(next, upper);
            upper = std::move(next);
            report.upper_iterations = m + 1;
            upper_done = gap <= tol;
        }
        if (!lower_done) {
            GridFunction next = picard_step(problem, lower);
            const double gap = sup_abs_diff(next, lower);
            lower = std::move(next);
            report.lower_iterations = m + 1;
            lower_done = gap <= tol;
        }
        report.max_order_violation =
            std::max(report.max_order_violation, max_signed_diff(lower, upper));
    }

    report.sup_gap = sup_abs_diff(upper, lower);
    report.upper = std::move(upper);
    report.lower = std::move(lower);
    report.conclusive = upper_done && lower_done;
    report.pass = report.conclusive && report.sup_gap <= 10.0 * tol;
    return report;
}

} // namespace hvolt
