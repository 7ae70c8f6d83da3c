#include "hvolt/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hvolt/errors.hpp"
#include "hvolt/quadrature.hpp"

namespace hvolt {

Nonlinearity::Nonlinearity(std::function<double(double)> g,
                           std::function<double(double)> phi, std::string label)
    : g_(std::move(g)), phi_(std::move(phi)), label_(std::move(label)) {
    if (!g_) {
        throw std::invalid_argument("nonlinearity needs a callable G");
    }
}

double Nonlinearity::phi(double sigma) const {
    if (!phi_) {
        throw std::logic_error("nonlinearity has no concavity modulus");
    }
    return phi_(sigma);
}

Nonlinearity power_nonlinearity(double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw std::invalid_argument("power nonlinearity needs alpha in (0,1)");
    }
    std::ostringstream label;
    label << "power(alpha=" << alpha << ")";
    return Nonlinearity([alpha](double u) { return std::pow(u, alpha); },
                        [alpha](double s) { return std::pow(s, alpha); }, label.str());
}

Nonlinearity saturating_nonlinearity(double gamma, double alpha) {
    if (!(gamma > 1.0)) {
        throw std::invalid_argument("saturating nonlinearity needs gamma > 1");
    }
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw std::invalid_argument("saturating nonlinearity needs alpha in (0,1)");
    }
    std::ostringstream label;
    label << "saturating(gamma=" << gamma << ",alpha=" << alpha << ")";
    return Nonlinearity(
        [gamma, alpha](double u) { return gamma * (1.0 - std::exp(-std::pow(u, alpha))); },
        [alpha](double s) { return std::pow(s, alpha); }, label.str());
}

double RateFamily::operator()(double t) const { return scale * std::exp(-rate * t); }

double RateFamily::integral_to(double t) const {
    return scale / rate * (1.0 - std::exp(-rate * t));
}

double RateFamily::integral_total() const { return scale / rate; }

WeightField WeightField::mixture(RateFamily p1, RateFamily p2,
                                 std::vector<double> lambda0, std::string label) {
    if (!(p1.rate > 0.0) || !(p2.rate > 0.0)) {
        throw std::invalid_argument("rate families need positive rates");
    }
    if (p1.scale < 0.0 || !(p2.scale > 0.0)) {
        throw std::invalid_argument("rate families need non-negative amplitudes, p2 positive");
    }
    // p1 <= p2 for all t exactly when the amplitudes are ordered and p1
    // decays at least as fast.
    if (p1.scale > p2.scale || p1.rate < p2.rate) {
        throw std::invalid_argument("p1 must lie below p2 on all of (0,inf)");
    }
    if (lambda0.empty()) {
        throw std::invalid_argument("mixture weight needs lambda0 values");
    }
    for (double l : lambda0) {
        if (!(l >= 0.0) || !(l <= 1.0)) {
            throw std::invalid_argument("lambda0 must lie in [0,1]");
        }
    }
    WeightField w;
    w.kind_ = Kind::mixture;
    w.p1_ = p1;
    w.p2_ = p2;
    w.lambda0_ = std::move(lambda0);
    w.label_ = std::move(label);
    return w;
}

WeightField WeightField::constant(double value, std::string label) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        throw std::invalid_argument("constant weight must be non-negative and finite");
    }
    WeightField w;
    w.kind_ = Kind::constant;
    w.value_ = value;
    w.label_ = std::move(label);
    return w;
}

double WeightField::h(std::size_t x, double t) const {
    if (kind_ == Kind::constant) {
        return value_;
    }
    const double l = lambda0_[x];
    return p1_(t) * (1.0 - l) + p2_(t) * l;
}

double WeightField::p1(double t) const {
    if (kind_ != Kind::mixture) {
        throw std::logic_error("weight field has no envelopes");
    }
    return p1_(t);
}

double WeightField::p2(double t) const {
    if (kind_ != Kind::mixture) {
        throw std::logic_error("weight field has no envelopes");
    }
    return p2_(t);
}

double WeightField::P1(double t) const {
    if (kind_ != Kind::mixture) {
        throw std::logic_error("weight field has no envelopes");
    }
    return p1_.integral_to(t);
}

double WeightField::P2(double t) const {
    if (kind_ != Kind::mixture) {
        throw std::logic_error("weight field has no envelopes");
    }
    return p2_.integral_to(t);
}

double WeightField::P1_total() const {
    if (kind_ != Kind::mixture) {
        throw std::logic_error("weight field has no envelopes");
    }
    return p1_.integral_total();
}

double WeightField::P2_total() const {
    if (kind_ != Kind::mixture) {
        throw std::logic_error("weight field has no envelopes");
    }
    return p2_.integral_total();
}

std::optional<double> WeightField::limit_ratio0() const {
    if (kind_ != Kind::mixture || hide_analytics_) {
        return std::nullopt;
    }
    return p1_.scale / p2_.scale;
}

std::optional<double> WeightField::p2_total_analytic() const {
    if (kind_ != Kind::mixture || hide_analytics_) {
        return std::nullopt;
    }
    return p2_.integral_total();
}

double WeightField::sup_h() const {
    if (kind_ == Kind::constant) {
        return value_;
    }
    double sup = 0.0;
    for (double l : lambda0_) {
        sup = std::max(sup, p1_.scale * (1.0 - l) + p2_.scale * l);
    }
    return sup;
}

double WeightField::inf_h() const {
    if (kind_ == Kind::constant) {
        return value_;
    }
    return 0.0; // both envelopes decay to zero
}

WeightField WeightField::without_analytics() const {
    WeightField w = *this;
    w.hide_analytics_ = true;
    return w;
}

WeightField mixture_weight(double rate, double ratio_c, std::vector<double> lambda0,
                           double scale) {
    if (!(rate > 0.0)) {
        throw std::invalid_argument("mixture weight needs a positive rate");
    }
    if (!(ratio_c >= 0.0) || !(ratio_c <= 1.0)) {
        throw std::invalid_argument("mixture ratio must lie in [0,1]");
    }
    const double amplitude = scale > 0.0 ? scale : rate;
    RateFamily p2{rate, amplitude};
    RateFamily p1{rate, ratio_c * amplitude};
    std::ostringstream label;
    label << "mixture(r=" << rate << ",c=" << ratio_c << ")";
    return WeightField::mixture(p1, p2, std::move(lambda0), label.str());
}

SourceField::SourceField(GridFunction g, double beta, double beta0, double t0)
    : g_(std::move(g)), beta_(beta), beta0_(beta0), t0_(t0) {}

SourceField SourceField::from_grid(GridFunction g, double t0) {
    if (!(t0 > 0.0) || !std::isfinite(t0)) {
        throw std::invalid_argument("T0 must be positive and finite");
    }
    if (!g.all_finite()) {
        throw std::invalid_argument("source values must be finite");
    }
    const double min_v = g.min_value();
    if (min_v < -1e-12) {
        throw std::invalid_argument("source must be non-negative");
    }
    if (min_v < 0.0) {
        for (std::size_t j = 0; j < g.n_nodes(); ++j) {
            for (double& v : g.slice(j)) {
                v = std::max(v, 0.0);
            }
        }
    }

    const double beta = g.max_value();
    const auto& grid = *g.time();
    double beta0 = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 1; j < g.n_nodes(); ++j) {
        if (grid.node(j) > t0 * (1.0 + 1e-12)) {
            break;
        }
        any = true;
        for (double v : g.slice(j)) {
            beta0 = std::min(beta0, v);
        }
    }
    if (!any) {
        // T0 sits below the first positive node; sample that node alone.
        for (double v : g.slice(1)) {
            beta0 = std::min(beta0, v);
        }
    }
    return SourceField(std::move(g), beta, beta0, t0);
}

namespace {

bool compatible_space(const std::shared_ptr<const DiscreteMeasureSpace>& a,
                      const std::shared_ptr<const DiscreteMeasureSpace>& b) {
    if (a == b) {
        return true;
    }
    if (!a || !b || a->size() != b->size()) {
        return false;
    }
    for (std::size_t i = 0; i < a->size(); ++i) {
        if (a->weight(i) != b->weight(i)) {
            return false;
        }
    }
    return true;
}

bool compatible_time(const std::shared_ptr<const TimeGrid>& a,
                     const std::shared_ptr<const TimeGrid>& b) {
    if (a == b) {
        return true;
    }
    return a && b && a->steps() == b->steps() && a->horizon() == b->horizon();
}

} // namespace

ProblemInstance::ProblemInstance(std::shared_ptr<const DiscreteMeasureSpace> space,
                                 std::shared_ptr<const TimeGrid> time, Kernel kernel,
                                 Nonlinearity nonlinearity, WeightField weight,
                                 SourceField source, double shift_offset)
    : space_(std::move(space)),
      time_(std::move(time)),
      kernel_(std::move(kernel)),
      nonlinearity_(std::move(nonlinearity)),
      weight_(std::move(weight)),
      source_(std::move(source)),
      shift_offset_(shift_offset) {
    if (!space_ || !time_) {
        throw std::invalid_argument("problem needs a space and a time grid");
    }
    if (!compatible_space(kernel_.space(), space_)) {
        throw std::invalid_argument("kernel space does not match the problem space");
    }
    if (!compatible_space(source_.g().space(), space_) ||
        !compatible_time(source_.g().time(), time_)) {
        throw std::invalid_argument("source grid does not match the problem space/time");
    }
    if (weight_.has_envelopes() && weight_.lambda0_size() != space_->size()) {
        throw std::invalid_argument("lambda0 length does not match the space");
    }
    table_ = std::make_shared<const KernelTable>(kernel_, *time_);
}

ProblemInstance make_problem(std::shared_ptr<const DiscreteMeasureSpace> space,
                             std::shared_ptr<const TimeGrid> time, Kernel kernel,
                             Nonlinearity nonlinearity, WeightField weight,
                             SourceField source) {
    return ProblemInstance(std::move(space), std::move(time), std::move(kernel),
                           std::move(nonlinearity), std::move(weight), std::move(source),
                           0.0);
}

ProblemInstance shift_problem(std::shared_ptr<const DiscreteMeasureSpace> space,
                              std::shared_ptr<const TimeGrid> time, Kernel kernel,
                              WeightField weight, const GridFunction& g_tilde,
                              const std::function<double(double)>& g_shifted,
                              std::function<double(double)> phi, double beta0,
                              double t0) {
    if (!(beta0 >= 0.0) || !std::isfinite(beta0)) {
        throw std::invalid_argument("shift offset must be non-negative and finite");
    }
    if (std::abs(g_shifted(-beta0)) > 1e-9) {
        throw InvalidShift("shifted nonlinearity must vanish at -beta0");
    }

    std::vector<double> values(g_tilde.values().begin(), g_tilde.values().end());
    for (double& v : values) {
        v += beta0;
    }
    GridFunction g = GridFunction::from_values(g_tilde.space(), g_tilde.time(),
                                               std::move(values));

    auto shifted = g_shifted;
    Nonlinearity nonlinearity(
        [shifted, beta0](double u) { return shifted(u - beta0); }, std::move(phi),
        "shifted");
    return ProblemInstance(std::move(space), std::move(time), std::move(kernel),
                           std::move(nonlinearity), std::move(weight),
                           SourceField::from_grid(std::move(g), t0), beta0);
}

namespace {

// Bisection on [lo, hi] with F(lo) <= 0 < F(hi); converges to the point
// where F crosses from non-positive to positive.
double bisect_to_root(const std::function<double(double)>& f, double lo, double hi) {
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (f(mid) > 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) {
            break;
        }
    }
    return 0.5 * (lo + hi);
}

double rightmost_root(const std::function<double(double)>& f, double start,
                      const char* what) {
    double lo = start;
    double hi = std::max(1.0, 2.0 * start);
    const double ceiling = std::ldexp(1.0, 60) * std::max(1.0, start);
    while (f(hi) <= 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > ceiling) {
            throw NoRoot(std::string("no bracket for ") + what +
                         " below the search ceiling");
        }
    }
    return bisect_to_root(f, lo, hi);
}

} // namespace

double solve_xi(const Nonlinearity& g, double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw std::invalid_argument("beta must be non-negative and finite");
    }
    auto f = [&](double x) { return x - g(x) - beta; };
    return rightmost_root(f, beta, "xi");
}

double solve_eta(const Nonlinearity& g, double beta, double gamma, double lambda_minus) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw std::invalid_argument("beta must be non-negative and finite");
    }
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("gamma must be positive");
    }
    if (!(lambda_minus > 0.0)) {
        throw std::invalid_argument("lambda_minus must be positive");
    }
    auto f = [&](double x) { return (x - beta) * lambda_minus - gamma * g(x); };
    return rightmost_root(f, beta, "eta");
}

bool AssumptionReport::pass() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const AssumptionEntry& e) { return e.pass; });
}

bool AssumptionReport::existence_pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const AssumptionEntry& e) {
        return e.rate_only || e.pass;
    });
}

const AssumptionEntry* AssumptionReport::find(const std::string& name) const {
    for (const auto& e : entries) {
        if (e.name == name) {
            return &e;
        }
    }
    return nullptr;
}

namespace {

std::string format_witness(const char* key, double value) {
    std::ostringstream out;
    out << key << "=" << value;
    return out.str();
}

std::vector<double> positive_time_samples(const TimeGrid& grid, int count,
                                          std::mt19937& rng, int extra_random) {
    std::vector<double> ts;
    const std::size_t n = grid.steps();
    const std::size_t stride = std::max<std::size_t>(1, n / static_cast<std::size_t>(count));
    for (std::size_t j = 1; j <= n; j += stride) {
        ts.push_back(grid.node(j));
    }
    if (ts.empty() || ts.back() != grid.node(n)) {
        ts.push_back(grid.node(n));
    }
    std::uniform_real_distribution<double> dist(grid.dt() * 0.5, grid.horizon());
    for (int i = 0; i < extra_random; ++i) {
        ts.push_back(dist(rng));
    }
    return ts;
}

} // namespace

AssumptionReport check_assumptions(const ProblemInstance& problem,
                                   const SampleControls& controls) {
    const auto& g_fun = problem.nonlinearity();
    const auto& weight = problem.weight();
    const auto& source = problem.source();
    const auto& grid = problem.time();
    const std::size_t n = problem.space().size();
    const double tol = controls.tolerance;

    std::mt19937 rng(controls.seed);
    AssumptionReport report;
    report.regime = problem.regime();
    report.beta = source.beta();
    report.beta0 = source.beta0();

    auto add = [&](AssumptionEntry e) { report.entries.push_back(std::move(e)); };

    // Kernel mass sandwich (Assumption K(ii)) plus evaluator non-negativity.
    {
        std::vector<std::size_t> xs;
        if (n <= 16) {
            for (std::size_t i = 0; i < n; ++i) {
                xs.push_back(i);
            }
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            for (int i = 0; i < 16; ++i) {
                xs.push_back(pick(rng));
            }
        }
        std::vector<double> ts = {grid.dt(), 0.25 * grid.horizon(), grid.horizon()};
        std::uniform_real_distribution<double> dist(grid.dt(), grid.horizon());
        for (int i = 0; i < 4; ++i) {
            ts.push_back(dist(rng));
        }
        const double mass_tol = std::max(tol, 1e-6);
        MassReport mass = verify_kernel_bounds(problem.kernel(), xs, ts, mass_tol);
        const double violation =
            std::max({mass.worst_lower_violation, mass.worst_upper_violation,
                      -std::min(0.0, mass.min_kernel_value)});
        add({"kernel.mass_sandwich", true, mass.pass, std::max(0.0, violation),
             format_witness("min_kernel_value", mass.min_kernel_value), false});
    }

    // Threshold existence; also fixes the working range for the G checks.
    double threshold = std::max(1.0, 2.0 * source.beta());
    {
        AssumptionEntry entry;
        entry.sampled = false;
        if (problem.regime() == Regime::stochastic) {
            entry.name = "threshold.xi_exists";
            try {
                const double xi = solve_xi(g_fun, source.beta());
                threshold = xi;
                report.threshold = xi;
                entry.pass = true;
                entry.worst_violation = std::abs(xi - g_fun(xi) - source.beta());
                entry.witness = format_witness("xi", xi);
            } catch (const NoRoot& err) {
                entry.pass = false;
                entry.worst_violation = 1.0;
                entry.witness = err.what();
            }
        } else {
            entry.name = "threshold.eta_exists";
            const double lambda_minus = problem.kernel().lambda_minus();
            if (!(lambda_minus > 0.0)) {
                entry.pass = false;
                entry.worst_violation = 1.0;
                entry.witness = "lambda_minus must be positive";
            } else {
                try {
                    const double gamma = weight.sup_h();
                    const double eta = solve_eta(g_fun, source.beta(), gamma, lambda_minus);
                    threshold = eta;
                    report.threshold = eta;
                    entry.pass = true;
                    entry.worst_violation =
                        std::abs(gamma * g_fun(eta) - (eta - source.beta()) * lambda_minus);
                    entry.witness = format_witness("eta", eta);
                } catch (const NoRoot& err) {
                    entry.pass = false;
                    entry.worst_violation = 1.0;
                    entry.witness = err.what();
                }
            }
        }
        add(std::move(entry));
    }

    // G(0) = 0.
    {
        const double v = std::abs(g_fun(0.0));
        add({"G.zero_at_zero", false, v <= tol, v, "", false});
    }

    // Strict increase of G on the working range.
    {
        const int count = std::max(4, controls.value_samples);
        double min_inc = std::numeric_limits<double>::infinity();
        double at = 0.0;
        double prev = g_fun(0.0);
        for (int i = 1; i <= count; ++i) {
            const double u = threshold * static_cast<double>(i) / count;
            const double cur = g_fun(u);
            if (cur - prev < min_inc) {
                min_inc = cur - prev;
                at = u;
            }
            prev = cur;
        }
        add({"G.strictly_increasing", true, min_inc > 0.0, std::max(0.0, -min_inc),
             format_witness("u", at), false});
    }

    // Midpoint concavity of G.
    {
        std::uniform_real_distribution<double> dist(0.0, threshold);
        double worst = 0.0;
        double at = 0.0;
        for (int i = 0; i < controls.random_samples + controls.value_samples; ++i) {
            double a = dist(rng);
            double b = dist(rng);
            const double gap = 0.5 * (g_fun(a) + g_fun(b)) - g_fun(0.5 * (a + b));
            if (gap > worst) {
                worst = gap;
                at = 0.5 * (a + b);
            }
        }
        add({"G.midpoint_concavity", true, worst <= tol, worst, format_witness("u", at),
             false});
    }

    // Concavity modulus phi: boundary values, concavity, subhomogeneity.
    if (g_fun.has_phi()) {
        const double b0 = std::abs(g_fun.phi(0.0));
        const double b1 = std::abs(g_fun.phi(1.0) - 1.0);
        add({"phi.boundary", false, std::max(b0, b1) <= tol, std::max(b0, b1), "", true});

        std::uniform_real_distribution<double> dist(0.0, 1.0);
        double worst = 0.0;
        for (int i = 0; i < controls.random_samples + controls.value_samples; ++i) {
            const double a = dist(rng);
            const double b = dist(rng);
            worst = std::max(worst,
                             0.5 * (g_fun.phi(a) + g_fun.phi(b)) - g_fun.phi(0.5 * (a + b)));
        }
        add({"phi.midpoint_concavity", true, worst <= tol, worst, "", true});

        double sub_worst = 0.0;
        std::string sub_at;
        const int k = std::max(4, controls.value_samples / 2);
        for (int i = 0; i <= k; ++i) {
            for (int j = 0; j <= k; ++j) {
                const double sigma = static_cast<double>(i) / k;
                const double u = threshold * static_cast<double>(j) / k;
                const double gap = g_fun.phi(sigma) * g_fun(u) - g_fun(sigma * u);
                if (gap > sub_worst) {
                    sub_worst = gap;
                    std::ostringstream w;
                    w << "sigma=" << sigma << ",u=" << u;
                    sub_at = w.str();
                }
            }
        }
        add({"G.subhomogeneity", true, sub_worst <= tol, sub_worst, sub_at, true});
    } else {
        add({"phi.boundary", false, false, 1.0, "no concavity modulus declared", true});
    }

    // Source envelope constants.
    add({"g.beta_finite", false, std::isfinite(source.beta()), 0.0,
         format_witness("beta", source.beta()), false});
    add({"g.beta0_positive", false, source.beta0() > 0.0,
         std::max(0.0, -source.beta0()), format_witness("beta0", source.beta0()), true});

    if (problem.regime() == Regime::stochastic) {
        if (!weight.has_envelopes()) {
            add({"h.envelope_sandwich", false, false, 1.0,
                 "stochastic regime needs envelope functions p1, p2", false});
        } else {
            auto ts = positive_time_samples(grid, controls.time_samples, rng,
                                            controls.random_samples / 4);

            // p1 != p2 somewhere.
            double max_diff = 0.0;
            for (double t : ts) {
                max_diff = std::max(max_diff, weight.p2(t) - weight.p1(t));
            }
            add({"h.p1_neq_p2", true, max_diff > tol, max_diff > tol ? 0.0 : tol,
                 format_witness("max_p2_minus_p1", max_diff), false});

            // integral of p2 over (0, infinity) equals one.
            {
                AssumptionEntry entry;
                entry.name = "h.p2_normalized";
                entry.rate_only = false;
                if (auto total = weight.p2_total_analytic()) {
                    entry.sampled = false;
                    entry.worst_violation = std::abs(*total - 1.0);
                    entry.pass = entry.worst_violation <= 1e-9;
                    entry.witness = format_witness("integral", *total);
                } else {
                    entry.sampled = true;
                    // Quadrature with an exponential tail estimate from the
                    // measured log-slope.
                    double t_big = std::max(grid.horizon(), 1.0);
                    while (weight.p2(t_big) > 1e-16 && t_big < 1e6) {
                        t_big *= 2.0;
                    }
                    const double body = quad::adaptive_simpson(
                        [&](double t) { return weight.p2(t); }, 0.0, t_big, 1e-12);
                    const double pa = weight.p2(0.5 * t_big);
                    const double pb = weight.p2(t_big);
                    double tail = 0.0;
                    bool decays = pb < pa && pb >= 0.0;
                    if (decays && pb > 0.0) {
                        const double rate_est = (std::log(pa) - std::log(pb)) / (0.5 * t_big);
                        tail = pb / rate_est;
                    }
                    if (!decays) {
                        entry.pass = false;
                        entry.worst_violation = 1.0;
                        entry.witness = "p2 tail does not decay";
                    } else {
                        // the tail estimate bounds what the quadrature could
                        // not see
                        const double total = body + tail;
                        entry.worst_violation = std::abs(total - 1.0);
                        entry.pass = entry.worst_violation <= 1e-6 + tail;
                        entry.witness = format_witness("integral", total);
                    }
                }
                add(std::move(entry));
            }

            // Envelope sandwich p1 <= h <= p2.
            {
                double worst = 0.0;
                std::string at;
                for (double t : ts) {
                    const double lo = weight.p1(t);
                    const double hi = weight.p2(t);
                    for (std::size_t x = 0; x < n; ++x) {
                        const double v = weight.h(x, t);
                        const double gap = std::max(lo - v, v - hi);
                        if (gap > worst) {
                            worst = gap;
                            std::ostringstream w;
                            w << "x=" << x << ",t=" << t;
                            at = w.str();
                        }
                    }
                }
                add({"h.envelope_sandwich", true, worst <= tol, std::max(0.0, worst), at,
                     false});
            }

            // Positive limit of p1/p2 at 0+.
            {
                AssumptionEntry entry;
                entry.name = "h.limit_ratio_positive";
                entry.rate_only = true;
                if (auto limit = weight.limit_ratio0()) {
                    entry.sampled = false;
                    entry.pass = *limit > 0.0;
                    entry.worst_violation = entry.pass ? 0.0 : 1.0;
                    entry.witness = format_witness("limit", *limit);
                } else {
                    entry.sampled = true;
                    const double t1 = grid.node(1);
                    const double t2 = grid.node(2);
                    const double r1 = weight.p1(t1) / weight.p2(t1);
                    const double r2 = weight.p1(t2) / weight.p2(t2);
                    const double agree = std::abs(r1 - r2);
                    if (agree > 0.05 * std::max({r1, r2, 1e-300})) {
                        entry.pass = false;
                        entry.worst_violation = agree;
                        entry.witness = "ratio samples disagree beyond 5%";
                    } else {
                        entry.pass = r1 > 0.0;
                        entry.worst_violation = entry.pass ? 0.0 : 1.0;
                        entry.witness = format_witness("limit", r1);
                    }
                }
                add(std::move(entry));
            }
        }
    } else {
        // Substochastic regime: uniform bounds on h.
        const double alpha = weight.inf_h();
        add({"h.alpha_positive", false, alpha > 0.0, alpha > 0.0 ? 0.0 : 1.0,
             format_witness("alpha", alpha), true});
        const double gamma = weight.sup_h();
        add({"h.gamma_finite", false, std::isfinite(gamma) && gamma > 0.0, 0.0,
             format_witness("gamma", gamma), false});
    }

    return report;
}

} // namespace hvolt
