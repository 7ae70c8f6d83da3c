#include "hvolt/config.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "hvolt/certificate.hpp"
#include "hvolt/errors.hpp"
#include "hvolt/oracle.hpp"
#include "hvolt/problem.hpp"
#include "hvolt/solver.hpp"

namespace hvolt::cli {

using nlohmann::json;

namespace {

std::string command_name(Command command) {
    switch (command) {
    case Command::check: return "check";
    case Command::solve: return "solve";
    case Command::certify: return "certify";
    case Command::probe: return "probe";
    case Command::compare_oracle: return "compare-oracle";
    }
    return "unknown";
}

const json& require(const json& j, const char* key, const char* section) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw ConfigError(std::string(section) + " is missing field '" + key + "'");
    }
    return *it;
}

double require_number(const json& j, const char* key, const char* section) {
    const json& v = require(j, key, section);
    if (!v.is_number()) {
        throw ConfigError(std::string(section) + "." + key + " must be a number");
    }
    return v.get<double>();
}

std::string require_string(const json& j, const char* key, const char* section) {
    const json& v = require(j, key, section);
    if (!v.is_string()) {
        throw ConfigError(std::string(section) + "." + key + " must be a string");
    }
    return v.get<std::string>();
}

double optional_number(const json& j, const char* key, double fallback) {
    auto it = j.find(key);
    if (it == j.end()) {
        return fallback;
    }
    if (!it->is_number()) {
        throw ConfigError(std::string("field '") + key + "' must be a number");
    }
    return it->get<double>();
}

std::vector<double> number_array(const json& v, const char* what) {
    if (!v.is_array() || v.empty()) {
        throw ConfigError(std::string(what) + " must be a non-empty array of numbers");
    }
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_number()) {
            throw ConfigError(std::string(what) + " must contain numbers only");
        }
        out.push_back(e.get<double>());
    }
    return out;
}

// Dense square matrix from nested rows or a flat row-major array.
SquareMatrix parse_matrix(const json& v, const char* what) {
    if (!v.is_array() || v.empty()) {
        throw ConfigError(std::string(what) + " must be an array");
    }
    SquareMatrix m;
    if (v.front().is_array()) {
        m.n = v.size();
        m.a.reserve(m.n * m.n);
        for (const auto& row : v) {
            if (!row.is_array() || row.size() != m.n) {
                throw ConfigError(std::string(what) + " must be square");
            }
            for (const auto& e : row) {
                if (!e.is_number()) {
                    throw ConfigError(std::string(what) + " must contain numbers only");
                }
                m.a.push_back(e.get<double>());
            }
        }
        return m;
    }
    std::vector<double> flat = number_array(v, what);
    const auto n = static_cast<std::size_t>(std::llround(std::sqrt(
        static_cast<double>(flat.size()))));
    if (n * n != flat.size()) {
        throw ConfigError(std::string(what) + " flat array length must be a square");
    }
    m.n = n;
    m.a = std::move(flat);
    return m;
}

struct OracleParams {
    double dt = 1e-3;
    int refine = 4;
    double tol = 1e-3;
};

struct Assembled {
    std::shared_ptr<const DiscreteMeasureSpace> space;
    std::shared_ptr<const TimeGrid> time;
    double t0 = 0.0;
    std::optional<Kernel> kernel;
    std::optional<SquareMatrix> generator; // matrix kernels only
    double damping = 0.0;
    std::optional<Nonlinearity> nonlinearity;
    std::optional<WeightField> weight;
    std::optional<SourceField> source;
    std::optional<std::vector<double>> duhamel_u0;
    std::optional<GridFunction> duhamel_f;
    std::optional<ProblemInstance> problem;
    SolveOptions solve_options;
    bool certificate_enabled = false;
    std::optional<double> epsilon;
    OracleParams oracle;
};

GridFunction parse_point_major_grid(const json& v,
                                    std::shared_ptr<const DiscreteMeasureSpace> space,
                                    std::shared_ptr<const TimeGrid> time,
                                    const char* what) {
    if (!v.is_array() || v.size() != space->size()) {
        throw ConfigError(std::string(what) + " must hold one row per space point");
    }
    GridFunction f(space, time);
    for (std::size_t x = 0; x < space->size(); ++x) {
        const auto& row = v[x];
        if (!row.is_array() || row.size() != time->nodes()) {
            throw ConfigError(std::string(what) + " rows must hold one value per time node");
        }
        for (std::size_t j = 0; j < time->nodes(); ++j) {
            if (!row[j].is_number()) {
                throw ConfigError(std::string(what) + " must contain numbers only");
            }
            f.at(x, j) = row[j].get<double>();
        }
    }
    if (!f.all_finite()) {
        throw ConfigError(std::string(what) + " must contain finite values");
    }
    return f;
}

Assembled assemble(const json& cfg) {
    Assembled a;

    // space
    {
        const json& s = require(cfg, "space", "config");
        const std::string type = require_string(s, "type", "space");
        if (type == "finite") {
            auto weights = number_array(require(s, "weights", "space"), "space.weights");
            a.space = std::make_shared<const DiscreteMeasureSpace>(
                build_finite_state_space(weights));
        } else if (type == "box") {
            const int dim = static_cast<int>(require_number(s, "dim", "space"));
            const int points = static_cast<int>(require_number(s, "points", "space"));
            const double length = require_number(s, "length", "space");
            a.space = std::make_shared<const DiscreteMeasureSpace>(
                build_box_space(dim, points, length));
        } else {
            throw ConfigError("space.type must be 'finite' or 'box'");
        }
    }

    // time
    {
        const json& t = require(cfg, "time", "config");
        const double horizon = require_number(t, "T", "time");
        const double nt = require_number(t, "nt", "time");
        if (nt < 1.0 || nt != std::floor(nt)) {
            throw ConfigError("time.nt must be a positive integer");
        }
        a.time = std::make_shared<const TimeGrid>(horizon, static_cast<std::size_t>(nt));
        a.t0 = optional_number(t, "T0", horizon);
    }

    // kernel
    {
        const json& k = require(cfg, "kernel", "config");
        const std::string type = require_string(k, "type", "kernel");
        if (type == "matrix") {
            a.generator = parse_matrix(require(k, "generator", "kernel"), "kernel.generator");
            a.kernel = matrix_semigroup_kernel(*a.generator, a.space);
        } else if (type == "neumann_box") {
            const double diffusivity = require_number(k, "diffusivity", "kernel");
            const int cutoff = static_cast<int>(require_number(k, "cutoff", "kernel"));
            a.kernel = neumann_box_kernel(a.space, diffusivity, cutoff);
        } else {
            throw ConfigError("kernel.type must be 'matrix' or 'neumann_box'");
        }
        a.damping = optional_number(k, "damping", 0.0);
        if (a.damping < 0.0) {
            throw ConfigError("kernel.damping must be >= 0");
        }
        if (a.damping > 0.0) {
            a.kernel = damp(*a.kernel, a.damping);
        }
    }

    // nonlinearity
    {
        const json& g = require(cfg, "nonlinearity", "config");
        const std::string type = require_string(g, "type", "nonlinearity");
        if (type == "power") {
            a.nonlinearity = power_nonlinearity(require_number(g, "alpha", "nonlinearity"));
        } else if (type == "saturating") {
            a.nonlinearity = saturating_nonlinearity(
                require_number(g, "gamma", "nonlinearity"),
                require_number(g, "alpha", "nonlinearity"));
        } else {
            throw ConfigError("nonlinearity.type must be 'power' or 'saturating'");
        }
    }

    // weight
    {
        const json& w = require(cfg, "weight", "config");
        const std::string type = require_string(w, "type", "weight");
        if (type == "mixture") {
            const double rate = require_number(w, "rate", "weight");
            const double ratio = require_number(w, "ratio", "weight");
            const double scale = optional_number(w, "scale", 0.0);
            std::vector<double> lambda0;
            const json& l = require(w, "lambda0", "weight");
            if (l.is_number()) {
                lambda0.assign(a.space->size(), l.get<double>());
            } else {
                lambda0 = number_array(l, "weight.lambda0");
                if (lambda0.size() != a.space->size()) {
                    throw ConfigError("weight.lambda0 length must match the space");
                }
            }
            a.weight = mixture_weight(rate, ratio, std::move(lambda0), scale);
        } else if (type == "constant") {
            a.weight = WeightField::constant(require_number(w, "value", "weight"));
        } else {
            throw ConfigError("weight.type must be 'mixture' or 'constant'");
        }
    }

    // source
    {
        const json& s = require(cfg, "source", "config");
        const std::string type = require_string(s, "type", "source");
        if (type == "constant") {
            const double value = require_number(s, "value", "source");
            GridFunction g(a.space, a.time, value);
            a.source = SourceField::from_grid(std::move(g), a.t0);
        } else if (type == "tabulated") {
            a.source = SourceField::from_grid(
                parse_point_major_grid(require(s, "array", "source"), a.space, a.time,
                                       "source.array"),
                a.t0);
        } else if (type == "duhamel") {
            const json& u0_json = require(s, "u0", "source");
            std::vector<double> u0;
            if (u0_json.is_number()) {
                u0.assign(a.space->size(), u0_json.get<double>());
            } else {
                u0 = number_array(u0_json, "source.u0");
                if (u0.size() != a.space->size()) {
                    throw ConfigError("source.u0 length must match the space");
                }
            }
            const json& f_json = require(s, "f", "source");
            GridFunction f = f_json.is_number()
                                 ? GridFunction(a.space, a.time, f_json.get<double>())
                                 : parse_point_major_grid(f_json, a.space, a.time,
                                                          "source.f");
            a.duhamel_u0 = u0;
            a.duhamel_f = f;
            a.source = propagate_source(*a.kernel, u0, f, a.t0);
        } else {
            throw ConfigError("source.type must be 'constant', 'tabulated' or 'duhamel'");
        }
    }

    // solver
    {
        const json& s = require(cfg, "solver", "config");
        a.solve_options.tol = optional_number(s, "tol", 1e-10);
        const double max_iter = optional_number(s, "max_iter", 200.0);
        if (max_iter < 1.0) {
            throw ConfigError("solver.max_iter must be >= 1");
        }
        a.solve_options.max_iter = static_cast<std::size_t>(max_iter);
        const auto it = s.find("start");
        std::string start = it == s.end() ? "upper" : it->get<std::string>();
        if (start == "upper") {
            a.solve_options.start = StartChoice::upper;
        } else if (start == "lower") {
            a.solve_options.start = StartChoice::lower;
        } else {
            throw ConfigError("solver.start must be 'upper' or 'lower'");
        }
    }

    // certificate
    if (auto it = cfg.find("certificate"); it != cfg.end()) {
        const json& c = *it;
        if (auto e = c.find("enabled"); e != c.end()) {
            a.certificate_enabled = e->get<bool>();
        }
        if (auto e = c.find("epsilon"); e != c.end() && e->is_number()) {
            a.epsilon = e->get<double>();
        }
    }

    // oracle comparison parameters
    if (auto it = cfg.find("oracle"); it != cfg.end()) {
        a.oracle.dt = optional_number(*it, "dt", 1e-3);
        a.oracle.refine = static_cast<int>(optional_number(*it, "refine", 4.0));
        a.oracle.tol = optional_number(*it, "tol", 1e-3);
    }

    a.problem = make_problem(a.space, a.time, *a.kernel, *a.nonlinearity, *a.weight,
                             *a.source);
    return a;
}

// ---------------------------------------------------------------------------
// artifact emission

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json entry_to_json(const AssumptionEntry& e) {
    return json{{"name", e.name},
                {"sampled", e.sampled},
                {"pass", e.pass},
                {"worst_violation", e.worst_violation},
                {"witness", e.witness},
                {"rate_only", e.rate_only}};
}

json report_to_json(const AssumptionReport& report) {
    json entries = json::array();
    for (const auto& e : report.entries) {
        entries.push_back(entry_to_json(e));
    }
    return json{{"pass", report.pass()},
                {"existence_pass", report.existence_pass()},
                {"beta", report.beta},
                {"beta0", report.beta0},
                {"threshold", report.threshold ? json(*report.threshold) : json()},
                {"entries", std::move(entries)}};
}

json certificate_to_json(const ConvergenceCertificate& c) {
    json out{{"regime", c.regime == Regime::stochastic ? "stochastic" : "substochastic"},
             {"threshold", c.threshold},
             {"beta", c.beta},
             {"beta0", c.beta0},
             {"T0", c.T0},
             {"epsilon", c.epsilon},
             {"k", c.k},
             {"C", c.C},
             {"degraded", c.degraded},
             {"bound_table", c.bound_table}};
    if (c.regime == Regime::stochastic) {
        out["sigma1"] = c.sigma1;
        out["sigma2"] = c.sigma2;
        out["sigma_star"] = c.sigma_star;
    } else {
        out["sigma_sharp"] = c.sigma_sharp;
        out["sigma_hash"] = c.sigma_hash;
    }
    return out;
}

json solution_to_json(const Solution& s) {
    return json{{"converged", s.converged},
                {"iterations", s.iterations},
                {"residual", s.residual},
                {"monotonicity_violation", s.monotonicity_violation},
                {"forced", s.forced},
                {"beta", s.beta},
                {"start_threshold", s.start_threshold},
                {"history", s.history}};
}

void write_solution_csv(const std::filesystem::path& path, const GridFunction& u) {
    std::ofstream out(path);
    const auto& space = *u.space();
    const auto& grid = *u.time();
    const int coords = space.box() ? space.box()->dim : 0;
    out << "point_index";
    if (coords >= 1) {
        out << ",x_coord";
    }
    if (coords >= 2) {
        out << ",y_coord";
    }
    out << ",t,u\n";
    for (std::size_t x = 0; x < space.size(); ++x) {
        for (std::size_t j = 0; j < grid.nodes(); ++j) {
            out << x;
            for (int ax = 0; ax < coords; ++ax) {
                out << ',' << fmt17(space.coordinate(x, ax));
            }
            out << ',' << fmt17(grid.node(j)) << ',' << fmt17(u(x, j)) << '\n';
        }
    }
}

void write_convergence_csv(const std::filesystem::path& path,
                           const std::vector<double>& measured,
                           const ConvergenceCertificate& cert) {
    std::ofstream out(path);
    out << "m,measured_gap,bound\n";
    const std::size_t rows = std::max(measured.size(), cert.bound_table.size());
    for (std::size_t m = 0; m < rows; ++m) {
        const double gap = m < measured.size() ? measured[m] : 0.0;
        out << m << ',' << fmt17(gap) << ',' << fmt17(error_bound(cert, m)) << '\n';
    }
}

void write_lfunction_csv(const std::filesystem::path& path, const ProblemInstance& problem,
                         double xi) {
    std::ofstream out(path);
    out << "t,L\n";
    const double t_ref =
        std::max({problem.time().horizon(), problem.source().T0(), 1.0});
    const double t_lo = 1e-4 * t_ref;
    const double t_hi = 40.0 * t_ref;
    const int samples = 200;
    for (int i = 0; i < samples; ++i) {
        const double t =
            t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (samples - 1));
        out << fmt17(t) << ',' << fmt17(l_function(problem, xi, t)) << '\n';
    }
}

// Gap-to-final per sweep: sup over the grid of (u_{m+1} - u_final).
std::vector<double> gaps_to_final(const Solution& solution, std::size_t limit) {
    std::vector<double> gaps;
    if (solution.iterates.size() < 2) {
        return gaps;
    }
    const GridFunction& final_u = solution.iterates.back();
    const std::size_t count = std::min(limit, solution.iterates.size() - 1);
    gaps.reserve(count);
    for (std::size_t m = 0; m + 1 < solution.iterates.size() && m < limit; ++m) {
        gaps.push_back(std::max(0.0, max_signed_diff(solution.iterates[m + 1], final_u)));
    }
    return gaps;
}

// Thrown after a failure has already been recorded in the summary.
struct Handled {};

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

} // namespace

Command parse_command(const std::string& name) {
    if (name == "check") return Command::check;
    if (name == "solve") return Command::solve;
    if (name == "certify") return Command::certify;
    if (name == "probe") return Command::probe;
    if (name == "compare-oracle") return Command::compare_oracle;
    throw ConfigError("unknown command '" + name + "'");
}

int run(Command command, const std::filesystem::path& config_path,
        const std::filesystem::path& out_dir, const RunOptions& options) {
    json summary;
    summary["command"] = command_name(command);
    json failures = json::array();
    json timings;
    int exit_status = 0;
    Timer total;

    auto fail = [&](const char* stage, const char* kind, const std::string& message,
                    int status) {
        failures.push_back(json{{"stage", stage}, {"error", kind}, {"message", message}});
        exit_status = std::max(exit_status, status);
    };

    try {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);

        json cfg;
        {
            std::ifstream in(config_path);
            if (!in) {
                throw ConfigError("cannot open config file " + config_path.string());
            }
            try {
                in >> cfg;
            } catch (const json::exception& e) {
                throw ConfigError(std::string("config is not valid JSON: ") + e.what());
            }
        }
        summary["config"] = cfg;

        Assembled a;
        Timer assemble_timer;
        try {
            a = assemble(cfg);
        } catch (const InvalidGenerator& e) {
            // The generator check is Assumption-K territory: report it as a
            // named failing entry rather than a config error.
            summary["assumptions"] =
                json{{"pass", false},
                     {"existence_pass", false},
                     {"entries", json::array({json{{"name", "kernel.generator"},
                                                   {"sampled", false},
                                                   {"pass", false},
                                                   {"worst_violation", 1.0},
                                                   {"witness", e.what()},
                                                   {"rate_only", false}}})}};
            fail("assemble", "invalid-generator", e.what(), 1);
            throw Handled{};
        }
        timings["assemble_ms"] = assemble_timer.ms();
        summary["regime"] =
            a.problem->regime() == Regime::stochastic ? "stochastic" : "substochastic";

        SampleControls controls;
        controls.seed = options.seed;
        Timer check_timer;
        const AssumptionReport report = check_assumptions(*a.problem, controls);
        timings["check_ms"] = check_timer.ms();
        summary["assumptions"] = report_to_json(report);

        const bool gate_ok = report.existence_pass();

        switch (command) {
        case Command::check: {
            if (!report.pass()) {
                fail("check", "assumption-failure", "one or more assumption entries fail", 1);
            }
            break;
        }

        case Command::solve:
        case Command::probe:
        case Command::certify: {
            if (!gate_ok && !options.force) {
                fail("gate", "assumption-failure",
                     "existence assumptions fail; rerun with --force to override", 1);
                break;
            }
            if (command == Command::certify && !report.pass() && !options.force) {
                fail("gate", "assumption-failure",
                     "rate assumptions fail; rerun with --force to override", 1);
                break;
            }

            if (command == Command::probe) {
                Timer probe_timer;
                const UniquenessReport probe = uniqueness_probe(
                    *a.problem, a.solve_options.tol, a.solve_options.max_iter);
                timings["probe_ms"] = probe_timer.ms();
                summary["probe"] = json{{"sup_gap", probe.sup_gap},
                                        {"max_order_violation", probe.max_order_violation},
                                        {"upper_iterations", probe.upper_iterations},
                                        {"lower_iterations", probe.lower_iterations},
                                        {"conclusive", probe.conclusive},
                                        {"pass", probe.pass}};
                write_solution_csv(out_dir / "solution.csv", probe.upper);
                if (!probe.conclusive) {
                    fail("probe", "probe-inconclusive",
                         "a probe branch did not converge within max_iter", 2);
                } else if (!probe.pass) {
                    fail("probe", "uniqueness-gap",
                         "upper and lower limits disagree beyond 10x tol", 1);
                }
                break;
            }

            SolveOptions solve_options = a.solve_options;
            solve_options.force = true; // the gate ran above
            solve_options.keep_iterates = command == Command::certify;
            Timer solve_timer;
            Solution solution = solve(*a.problem, solve_options);
            timings["solve_ms"] = solve_timer.ms();
            solution.forced = !gate_ok || (command == Command::certify && !report.pass());
            summary["solve"] = solution_to_json(solution);
            write_solution_csv(out_dir / "solution.csv", solution.u);
            if (!solution.converged) {
                fail("solve", "non-converged",
                     "max_iter reached before the tolerance", 2);
            }

            if (command == Command::solve && a.certificate_enabled) {
                try {
                    summary["certificate"] =
                        certificate_to_json(make_certificate(*a.problem, a.epsilon, 31));
                } catch (const CertificateFailure& e) {
                    fail("certificate", "certificate-failure", e.what(), 1);
                } catch (const NoRoot& e) {
                    fail("certificate", "no-root", e.what(), 1);
                } catch (const std::invalid_argument& e) {
                    // requested on an instance missing a rate hypothesis
                    fail("certificate", "certificate-failure", e.what(), 1);
                }
            }

            if (command == Command::certify) {
                Timer cert_timer;
                const ConvergenceCertificate cert = make_certificate(
                    *a.problem, a.epsilon, 31);
                timings["certify_ms"] = cert_timer.ms();
                solution.certificate = std::make_shared<const ConvergenceCertificate>(cert);
                summary["certificate"] = certificate_to_json(cert);

                const std::vector<double> measured =
                    gaps_to_final(solution, cert.bound_table.size());
                write_convergence_csv(out_dir / "convergence.csv", measured, cert);
                bool dominated = true;
                std::size_t first_violation = 0;
                for (std::size_t m = 0; m < measured.size(); ++m) {
                    if (measured[m] > error_bound(cert, m) + 1e-12) {
                        dominated = false;
                        first_violation = m;
                        break;
                    }
                }
                summary["certificate"]["bound_dominates"] = dominated;
                if (!dominated) {
                    std::ostringstream msg;
                    msg << "measured gap exceeds the bound at m=" << first_violation;
                    fail("certify", "certificate-failure", msg.str(), 1);
                }
                if (cert.regime == Regime::stochastic) {
                    write_lfunction_csv(out_dir / "lfunction.csv", *a.problem,
                                        cert.threshold);
                }
            }
            break;
        }

        case Command::compare_oracle: {
            if (!gate_ok && !options.force) {
                fail("gate", "assumption-failure",
                     "existence assumptions fail; rerun with --force to override", 1);
                break;
            }
            SolveOptions solve_options = a.solve_options;
            solve_options.force = true;
            Timer solve_timer;
            const Solution solution = solve(*a.problem, solve_options);
            timings["solve_ms"] = solve_timer.ms();
            summary["solve"] = solution_to_json(solution);
            write_solution_csv(out_dir / "solution.csv", solution.u);
            if (!solution.converged) {
                fail("solve", "non-converged", "max_iter reached before the tolerance", 2);
                break;
            }

            Timer oracle_timer;
            GridFunction reference(a.space, a.time);
            std::string method;
            if (a.generator) {
                // The damped semigroup e^{-mt} e^{-tQ} is generated by Q + mI.
                SquareMatrix q = *a.generator;
                for (std::size_t i = 0; i < q.n; ++i) {
                    q(i, i) += a.damping;
                }
                std::vector<double> u0;
                GridFunction f(a.space, a.time);
                if (a.duhamel_u0) {
                    u0 = *a.duhamel_u0;
                    f = *a.duhamel_f;
                } else {
                    // A constant source g = c matches u0 = c, f = c * (row sums).
                    const double c = a.source->g()(0, 0);
                    u0.assign(a.space->size(), c);
                    for (std::size_t x = 0; x < a.space->size(); ++x) {
                        double row_sum = 0.0;
                        for (std::size_t y = 0; y < q.n; ++y) {
                            row_sum += q(x, y);
                        }
                        for (std::size_t j = 0; j < a.time->nodes(); ++j) {
                            f.at(x, j) = c * row_sum;
                        }
                    }
                }
                reference = ode_reference(q, u0, f, *a.weight, *a.nonlinearity,
                                          a.oracle.dt);
                method = "ode_reference";
            } else {
                reference = volterra_reference(*a.problem, a.oracle.refine, 1e-12, 500,
                                               a.solve_options.start);
                method = "volterra_reference";
            }
            timings["oracle_ms"] = oracle_timer.ms();

            const double gap = sup_abs_diff(solution.u, reference);
            const bool ok = gap <= a.oracle.tol;
            summary["oracle"] = json{{"method", method},
                                     {"gap", gap},
                                     {"tol", a.oracle.tol},
                                     {"dt", a.oracle.dt},
                                     {"refine", a.oracle.refine},
                                     {"pass", ok}};
            if (!ok) {
                fail("compare-oracle", "oracle-mismatch",
                     "solver and reference disagree beyond the oracle tolerance", 1);
            }
            break;
        }
        }
    } catch (const Handled&) {
        // already recorded
    } catch (const ConfigError& e) {
        fail("config", "config-error", e.what(), 3);
    } catch (const AssumptionFailure& e) {
        fail("run", "assumption-failure", e.what(), 1);
    } catch (const CertificateFailure& e) {
        fail("run", "certificate-failure", e.what(), 1);
    } catch (const NoRoot& e) {
        fail("run", "no-root", e.what(), 1);
    } catch (const OracleFailure& e) {
        fail("run", "oracle-failure", e.what(), 2);
    } catch (const std::invalid_argument& e) {
        fail("config", "invalid-value", e.what(), 3);
    } catch (const std::exception& e) {
        fail("run", "internal-error", e.what(), 3);
    }

    timings["total_ms"] = total.ms();
    summary["timings"] = timings;
    summary["failures"] = failures;
    summary["exit_status"] = exit_status;

    std::ofstream out(out_dir / "summary.json");
    if (out) {
        out << summary.dump(2) << '\n';
    }
    return exit_status;
}

} // namespace hvolt::cli
