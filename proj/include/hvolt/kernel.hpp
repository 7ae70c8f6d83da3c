#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hvolt/space.hpp"

namespace hvolt {

/// Dense row-major square matrix, the exchange format for generators and
/// kernel snapshots.
struct SquareMatrix {
    std::size_t n = 0;
    std::vector<double> a; // row-major, size n*n

    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t size) : n(size), a(size * size, 0.0) {}

    static SquareMatrix identity(std::size_t size);

    double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
    double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    std::span<const double> row(std::size_t i) const { return {a.data() + i * n, n}; }
};

enum class Regime { stochastic, substochastic };

/// Evaluation interface behind a Kernel. Implementations are immutable and
/// safe for concurrent evaluation.
class KernelBackend {
public:
    virtual ~KernelBackend() = default;
    virtual double eval(std::size_t x, std::size_t y, double t) const = 0;
    /// Writes the full matrix K(x, y; t) into `out` (resized as needed).
    virtual void fill(double t, SquareMatrix& out) const;
    virtual std::size_t size() const = 0;
};

/// Evaluable heat kernel K(x,y;t) with declared mass bounds: for a.e. x, t
/// the mass integral lies in [e^{-t lambda_plus}, e^{-t lambda_minus}].
class Kernel {
public:
    Kernel(std::shared_ptr<const DiscreteMeasureSpace> space,
           std::shared_ptr<const KernelBackend> backend,
           double lambda_minus, double lambda_plus, Regime regime,
           std::string label);

    double operator()(std::size_t x, std::size_t y, double t) const {
        return backend_->eval(x, y, t);
    }
    void fill(double t, SquareMatrix& out) const { backend_->fill(t, out); }

    double lambda_minus() const { return lambda_minus_; }
    double lambda_plus() const { return lambda_plus_; }
    Regime regime() const { return regime_; }
    const std::shared_ptr<const DiscreteMeasureSpace>& space() const { return space_; }
    const std::shared_ptr<const KernelBackend>& backend() const { return backend_; }
    const std::string& label() const { return label_; }

private:
    std::shared_ptr<const DiscreteMeasureSpace> space_;
    std::shared_ptr<const KernelBackend> backend_;
    double lambda_minus_;
    double lambda_plus_;
    Regime regime_;
    std::string label_;
};

/// Outcome of sampling the mass-bound sandwich on a kernel.
struct MassReport {
    struct Sample {
        std::size_t point;
        double t;
        double mass;
    };
    std::vector<Sample> samples;
    double worst_lower_violation = 0.0; // max over samples of (e^{-t l+} - mass)+
    double worst_upper_violation = 0.0; // max over samples of (mass - e^{-t l-})+
    double min_kernel_value = std::numeric_limits<double>::infinity();
    double tolerance = 0.0;
    bool pass = false;
};

/// Finite-state kernel e^{-tQ} scaled by the point weights so that the mass
/// integral equals the row sums of e^{-tQ}. Q must have non-positive
/// off-diagonal entries and non-negative row sums; all row sums zero gives
/// the stochastic regime, otherwise lambda_minus/lambda_plus come from the
/// min/max row sums.
Kernel matrix_semigroup_kernel(const SquareMatrix& generator,
                               std::shared_ptr<const DiscreteMeasureSpace> space);

/// Truncated cosine eigenfunction expansion of the Neumann heat kernel on a
/// box space built by build_box_space. The reflecting boundary keeps the
/// kernel exactly stochastic; the cutoff is the largest mode index kept per
/// axis.
Kernel neumann_box_kernel(std::shared_ptr<const DiscreteMeasureSpace> space,
                          double diffusivity, int series_cutoff);

/// Damping wrapper realizing the mass-term reduction: multiplies the kernel
/// by e^{-mt} and shifts both mass bounds by m.
Kernel damp(const Kernel& base, double m);

/// Quadrature of K(x, . ; t) against mu. Requires t > 0.
double kernel_mass(const Kernel& kernel, std::size_t x, double t);

/// Samples the two-sided mass bound and kernel non-negativity at the given
/// points and times. Failures are carried in the report, never thrown.
MassReport verify_kernel_bounds(const Kernel& kernel,
                                std::span<const std::size_t> x_samples,
                                std::span<const double> t_samples,
                                double tolerance);

/// Upper bound on the per-axis cosine-series tail dropped by a Neumann box
/// kernel at time t; meaningful for kernels built by neumann_box_kernel
/// (returns 0 for others).
double neumann_tail_bound(const Kernel& kernel, double t);

/// Dense kernel snapshots at all distinct grid time-differences d*dt,
/// d = 0..n_t, built eagerly so a Picard sweep never re-evaluates the
/// kernel. Immutable after construction.
class KernelTable {
public:
    KernelTable(const Kernel& kernel, const TimeGrid& grid);

    const SquareMatrix& at(std::size_t difference) const { return tables_[difference]; }
    std::size_t differences() const { return tables_.size(); }

private:
    std::vector<SquareMatrix> tables_;
};

} // namespace hvolt
