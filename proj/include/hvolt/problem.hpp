#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hvolt/kernel.hpp"
#include "hvolt/space.hpp"

namespace hvolt {

/// Concave nonlinearity G on [0, infinity) with an optional concavity
/// modulus phi on [0,1] satisfying G(sigma u) >= phi(sigma) G(u) on the
/// working range.
class Nonlinearity {
public:
    Nonlinearity(std::function<double(double)> g,
                 std::function<double(double)> phi, std::string label);

    double operator()(double u) const { return g_(u); }
    bool has_phi() const { return static_cast<bool>(phi_); }
    double phi(double sigma) const;
    const std::string& label() const { return label_; }

private:
    std::function<double(double)> g_;
    std::function<double(double)> phi_;
    std::string label_;
};

/// G(u) = u^alpha with phi(sigma) = sigma^alpha, alpha in (0,1).
Nonlinearity power_nonlinearity(double alpha);

/// G(u) = gamma (1 - e^{-u^alpha}) with phi(sigma) = sigma^alpha; strongly
/// concave, so the thresholds xi and eta always exist.
Nonlinearity saturating_nonlinearity(double gamma, double alpha);

/// Exponential rate density p(t) = scale * e^{-rate t}.
struct RateFamily {
    double rate = 1.0;
    double scale = 1.0;

    double operator()(double t) const;
    double integral_to(double t) const;    // from 0
    double integral_total() const;         // over (0, infinity)
};

/// Weight field h(x,t). Either a two-envelope mixture
/// h = p1 (1 - lambda0) + p2 lambda0 of exponential rate families, or a
/// constant field for the substochastic regime.
class WeightField {
public:
    static WeightField mixture(RateFamily p1, RateFamily p2,
                               std::vector<double> lambda0, std::string label = "mixture");
    static WeightField constant(double value, std::string label = "constant");

    double h(std::size_t x, double t) const;

    bool has_envelopes() const { return kind_ == Kind::mixture; }
    double p1(double t) const;
    double p2(double t) const;
    double P1(double t) const;     // cumulative integral of p1 from 0
    double P2(double t) const;
    double P1_total() const;
    double P2_total() const;

    /// lim_{t->0+} p1/p2; analytic for the exponential families unless
    /// hidden for testing.
    std::optional<double> limit_ratio0() const;
    /// Analytic ∫ p2 over (0, infinity), when not hidden.
    std::optional<double> p2_total_analytic() const;

    double sup_h() const; // over X x (0, infinity)
    double inf_h() const;

    std::size_t lambda0_size() const { return lambda0_.size(); }
    const std::string& label() const { return label_; }

    /// Copy that pretends to have no analytic metadata, forcing the sampled
    /// checker paths.
    WeightField without_analytics() const;

private:
    enum class Kind { mixture, constant };
    WeightField() = default;

    Kind kind_ = Kind::constant;
    RateFamily p1_{};
    RateFamily p2_{};
    std::vector<double> lambda0_;
    double value_ = 0.0;
    bool hide_analytics_ = false;
    std::string label_;
};

/// Canonical family of the mixture weight: p2 = r e^{-r t} (unit total
/// mass), p1 = c p2 with c in (0,1). `scale` overrides the p2 amplitude
/// (default r); any other value breaks the normalization on purpose.
WeightField mixture_weight(double rate, double ratio_c, std::vector<double> lambda0,
                           double scale = 0.0);

/// Non-negative inhomogeneous term g with its grid-domain envelope
/// constants: beta = sup g, beta0 = inf of g over X x (0, T0].
class SourceField {
public:
    static SourceField from_grid(GridFunction g, double t0);

    const GridFunction& g() const { return g_; }
    double beta() const { return beta_; }
    double beta0() const { return beta0_; }
    double T0() const { return t0_; }

private:
    SourceField(GridFunction g, double beta, double beta0, double t0);

    GridFunction g_;
    double beta_;
    double beta0_;
    double t0_;
};

/// The assembled integral equation
///   u = g + int_0^t int_X K(x,y;t-s) h(y,s) G(u(y,s)) dmu(y) ds
/// on a discrete space and uniform time grid, with the kernel snapshot
/// table built eagerly at all grid time-differences.
class ProblemInstance {
public:
    const DiscreteMeasureSpace& space() const { return *space_; }
    const TimeGrid& time() const { return *time_; }
    const std::shared_ptr<const DiscreteMeasureSpace>& space_ptr() const { return space_; }
    const std::shared_ptr<const TimeGrid>& time_ptr() const { return time_; }
    const Kernel& kernel() const { return kernel_; }
    const KernelTable& kernel_table() const { return *table_; }
    const Nonlinearity& nonlinearity() const { return nonlinearity_; }
    const WeightField& weight() const { return weight_; }
    const SourceField& source() const { return source_; }
    Regime regime() const { return kernel_.regime(); }

    /// Vertical shift recorded by shift_problem; solutions of the original
    /// shifted equation are u - shift_offset(). Zero for plain instances.
    double shift_offset() const { return shift_offset_; }

    friend ProblemInstance make_problem(std::shared_ptr<const DiscreteMeasureSpace>,
                                        std::shared_ptr<const TimeGrid>, Kernel,
                                        Nonlinearity, WeightField, SourceField);
    friend ProblemInstance shift_problem(std::shared_ptr<const DiscreteMeasureSpace>,
                                         std::shared_ptr<const TimeGrid>, Kernel,
                                         WeightField, const GridFunction&,
                                         const std::function<double(double)>&,
                                         std::function<double(double)>, double, double);

private:
    ProblemInstance(std::shared_ptr<const DiscreteMeasureSpace> space,
                    std::shared_ptr<const TimeGrid> time, Kernel kernel,
                    Nonlinearity nonlinearity, WeightField weight, SourceField source,
                    double shift_offset);

    std::shared_ptr<const DiscreteMeasureSpace> space_;
    std::shared_ptr<const TimeGrid> time_;
    Kernel kernel_;
    Nonlinearity nonlinearity_;
    WeightField weight_;
    SourceField source_;
    std::shared_ptr<const KernelTable> table_;
    double shift_offset_;
};

ProblemInstance make_problem(std::shared_ptr<const DiscreteMeasureSpace> space,
                             std::shared_ptr<const TimeGrid> time, Kernel kernel,
                             Nonlinearity nonlinearity, WeightField weight,
                             SourceField source);

/// Vertical shift: from a shifted source g~ (possibly with zero infimum) and
/// a shifted nonlinearity G~ on [-beta0, infinity) with G~(-beta0) = 0,
/// build the equivalent unshifted instance with g = g~ + beta0 and
/// G(u) = G~(u - beta0). The back-map v = u - beta0 is recorded on the
/// instance. The concavity modulus transfers unchanged.
ProblemInstance shift_problem(std::shared_ptr<const DiscreteMeasureSpace> space,
                              std::shared_ptr<const TimeGrid> time, Kernel kernel,
                              WeightField weight, const GridFunction& g_tilde,
                              const std::function<double(double)>& g_shifted,
                              std::function<double(double)> phi, double beta0,
                              double t0);

/// Rightmost root of xi - G(xi) = beta, found by doubling an upper bracket
/// and bisecting. Guaranteed to exist for strongly concave G.
double solve_xi(const Nonlinearity& g, double beta);

/// Root eta > beta of gamma G(eta) = (eta - beta) lambda_minus.
double solve_eta(const Nonlinearity& g, double beta, double gamma, double lambda_minus);

struct SampleControls {
    int time_samples = 64;       // per positive-time sampling pass
    int value_samples = 48;      // u / sigma grids
    int random_samples = 64;     // extra seeded samples
    unsigned seed = 12345;
    double tolerance = 1e-9;
};

struct AssumptionEntry {
    std::string name;
    bool sampled = true;          // checked by sampling vs analytic
    bool pass = false;
    double worst_violation = 0.0;
    std::string witness;          // where the worst violation happened
    bool rate_only = false;       // needed for the geometric rate, not existence
};

/// Aggregate checker outcome; overall pass requires every entry to pass,
/// existence_pass only the entries needed for the monotone iteration to
/// converge (the rate_only entries additionally back the geometric bound).
struct AssumptionReport {
    Regime regime = Regime::stochastic;
    std::vector<AssumptionEntry> entries;
    double beta = 0.0;
    double beta0 = 0.0;
    std::optional<double> threshold; // xi or eta, when found

    bool pass() const;
    bool existence_pass() const;
    const AssumptionEntry* find(const std::string& name) const;
};

AssumptionReport check_assumptions(const ProblemInstance& problem,
                                   const SampleControls& controls = {});

} // namespace hvolt
