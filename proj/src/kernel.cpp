#include "hvolt/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "hvolt/errors.hpp"

namespace hvolt {

SquareMatrix SquareMatrix::identity(std::size_t size) {
    SquareMatrix m(size);
    for (std::size_t i = 0; i < size; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

void KernelBackend::fill(double t, SquareMatrix& out) const {
    const std::size_t n = size();
    if (out.n != n) {
        out = SquareMatrix(n);
    }
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) {
            out(x, y) = eval(x, y, t);
        }
    }
}

Kernel::Kernel(std::shared_ptr<const DiscreteMeasureSpace> space,
               std::shared_ptr<const KernelBackend> backend,
               double lambda_minus, double lambda_plus, Regime regime,
               std::string label)
    : space_(std::move(space)),
      backend_(std::move(backend)),
      lambda_minus_(lambda_minus),
      lambda_plus_(lambda_plus),
      regime_(regime),
      label_(std::move(label)) {
    if (!space_ || !backend_) {
        throw std::invalid_argument("kernel needs a space and a backend");
    }
    if (space_->size() != backend_->size()) {
        throw std::invalid_argument("kernel backend size does not match the space");
    }
    if (lambda_minus_ < 0.0 || lambda_plus_ < lambda_minus_) {
        throw std::invalid_argument("mass bounds need lambda_plus >= lambda_minus >= 0");
    }
}

namespace {

class MatrixSemigroupBackend final : public KernelBackend {
public:
    MatrixSemigroupBackend(Eigen::MatrixXd generator, std::vector<double> weights)
        : generator_(std::move(generator)), weights_(std::move(weights)) {}

    double eval(std::size_t x, std::size_t y, double t) const override {
        const Eigen::MatrixXd p = ((-t) * generator_).exp();
        return p(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) / weights_[y];
    }

    void fill(double t, SquareMatrix& out) const override {
        const std::size_t n = weights_.size();
        if (out.n != n) {
            out = SquareMatrix(n);
        }
        const Eigen::MatrixXd p = ((-t) * generator_).exp();
        for (std::size_t x = 0; x < n; ++x) {
            for (std::size_t y = 0; y < n; ++y) {
                out(x, y) = p(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) /
                            weights_[y];
            }
        }
    }

    std::size_t size() const override { return weights_.size(); }

private:
    Eigen::MatrixXd generator_;
    std::vector<double> weights_;
};

class NeumannBoxBackend final : public KernelBackend {
public:
    NeumannBoxBackend(const DiscreteMeasureSpace& space, double diffusivity, int cutoff)
        : box_(*space.box()), diffusivity_(diffusivity), cutoff_(cutoff), n_(space.size()) {
        coords_.resize(n_ * static_cast<std::size_t>(box_.dim));
        for (std::size_t i = 0; i < n_; ++i) {
            for (int ax = 0; ax < box_.dim; ++ax) {
                coords_[i * static_cast<std::size_t>(box_.dim) + static_cast<std::size_t>(ax)] =
                    space.coordinate(i, ax);
            }
        }
    }

    double eval(std::size_t x, std::size_t y, double t) const override {
        double v = 1.0;
        for (int ax = 0; ax < box_.dim; ++ax) {
            v *= axis_eval(coord(x, ax), coord(y, ax), t);
        }
        return v;
    }

    std::size_t size() const override { return n_; }

    /// Tail of the dropped per-axis series at time t: sum over k > cutoff of
    /// (2/L) e^{-D (k pi / L)^2 t}, bounded by the geometric-ratio estimate.
    double axis_tail_bound(double t) const {
        const double length = box_.side_length;
        const double a = diffusivity_ * std::pow(std::numbers::pi / length, 2) * t;
        const double k1 = static_cast<double>(cutoff_ + 1);
        const double first = (2.0 / length) * std::exp(-a * k1 * k1);
        const double ratio = std::exp(-a * (2.0 * k1 + 1.0));
        if (ratio >= 1.0) {
            return std::numeric_limits<double>::infinity();
        }
        return first / (1.0 - ratio);
    }

private:
    double coord(std::size_t point, int axis) const {
        return coords_[point * static_cast<std::size_t>(box_.dim) + static_cast<std::size_t>(axis)];
    }

    double axis_eval(double x, double y, double t) const {
        const double length = box_.side_length;
        double v = 1.0 / length;
        for (int k = 1; k <= cutoff_; ++k) {
            const double freq = static_cast<double>(k) * std::numbers::pi / length;
            v += (2.0 / length) * std::exp(-diffusivity_ * freq * freq * t) *
                 std::cos(freq * x) * std::cos(freq * y);
        }
        return v;
    }

    DiscreteMeasureSpace::Box box_;
    double diffusivity_;
    int cutoff_;
    std::size_t n_;
    std::vector<double> coords_;
};

class DampedBackend final : public KernelBackend {
public:
    DampedBackend(std::shared_ptr<const KernelBackend> base, double m)
        : base_(std::move(base)), m_(m) {}

    double eval(std::size_t x, std::size_t y, double t) const override {
        return std::exp(-m_ * t) * base_->eval(x, y, t);
    }

    void fill(double t, SquareMatrix& out) const override {
        base_->fill(t, out);
        const double factor = std::exp(-m_ * t);
        for (double& v : out.a) {
            v *= factor;
        }
    }

    std::size_t size() const override { return base_->size(); }

private:
    std::shared_ptr<const KernelBackend> base_;
    double m_;
};

} // namespace

Kernel matrix_semigroup_kernel(const SquareMatrix& generator,
                               std::shared_ptr<const DiscreteMeasureSpace> space) {
    if (!space) {
        throw std::invalid_argument("matrix kernel needs a space");
    }
    const std::size_t n = space->size();
    if (generator.n != n || generator.a.size() != n * n) {
        throw std::invalid_argument("generator size does not match the space");
    }

    double scale = 0.0;
    for (double v : generator.a) {
        if (!std::isfinite(v)) {
            throw InvalidGenerator("generator entries must be finite");
        }
        scale = std::max(scale, std::abs(v));
    }
    const double tol = 1e-12 * std::max(1.0, scale);

    double min_row_sum = std::numeric_limits<double>::infinity();
    double max_row_sum = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double q = generator(i, j);
            if (i != j && q > 0.0) {
                throw InvalidGenerator("generator off-diagonal entries must be <= 0");
            }
            row_sum += q;
        }
        if (row_sum < -tol) {
            throw InvalidGenerator("generator row sums must be non-negative");
        }
        min_row_sum = std::min(min_row_sum, row_sum);
        max_row_sum = std::max(max_row_sum, row_sum);
    }

    Eigen::MatrixXd q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = generator(i, j);
        }
    }

    std::vector<double> weights(space->weights().begin(), space->weights().end());
    auto backend = std::make_shared<MatrixSemigroupBackend>(std::move(q), std::move(weights));

    const bool conservative = max_row_sum <= tol;
    const double lambda_minus = conservative ? 0.0 : std::max(0.0, min_row_sum);
    const double lambda_plus = conservative ? 0.0 : max_row_sum;
    const Regime regime = conservative ? Regime::stochastic : Regime::substochastic;
    return Kernel(std::move(space), std::move(backend), lambda_minus, lambda_plus, regime,
                  "matrix_semigroup");
}

Kernel neumann_box_kernel(std::shared_ptr<const DiscreteMeasureSpace> space,
                          double diffusivity, int series_cutoff) {
    if (!space || !space->box()) {
        throw std::invalid_argument("neumann kernel needs a box space");
    }
    if (!(diffusivity > 0.0)) {
        throw std::invalid_argument("diffusivity must be positive");
    }
    if (series_cutoff < 0) {
        throw std::invalid_argument("series cutoff must be non-negative");
    }
    auto backend = std::make_shared<NeumannBoxBackend>(*space, diffusivity, series_cutoff);
    return Kernel(std::move(space), std::move(backend), 0.0, 0.0, Regime::stochastic,
                  "neumann_box");
}

Kernel damp(const Kernel& base, double m) {
    if (!(m > 0.0)) {
        throw std::invalid_argument("damping mass must be positive");
    }
    auto backend = std::make_shared<DampedBackend>(base.backend(), m);
    return Kernel(base.space(), std::move(backend), base.lambda_minus() + m,
                  base.lambda_plus() + m, Regime::substochastic, base.label() + "+damp");
}

double kernel_mass(const Kernel& kernel, std::size_t x, double t) {
    if (!(t > 0.0)) {
        throw std::invalid_argument("kernel mass requires t > 0");
    }
    const auto& space = *kernel.space();
    if (x >= space.size()) {
        throw std::out_of_range("point index out of range");
    }
    SquareMatrix snapshot;
    kernel.fill(t, snapshot);
    double mass = 0.0;
    for (std::size_t y = 0; y < space.size(); ++y) {
        mass += snapshot(x, y) * space.weight(y);
    }
    return mass;
}

MassReport verify_kernel_bounds(const Kernel& kernel,
                                std::span<const std::size_t> x_samples,
                                std::span<const double> t_samples,
                                double tolerance) {
    if (x_samples.empty() || t_samples.empty()) {
        throw std::invalid_argument("verification needs non-empty sample sets");
    }
    const auto& space = *kernel.space();
    MassReport report;
    report.tolerance = tolerance;

    SquareMatrix snapshot;
    for (double t : t_samples) {
        kernel.fill(t, snapshot);
        double min_entry = std::numeric_limits<double>::infinity();
        for (double v : snapshot.a) {
            min_entry = std::min(min_entry, v);
        }
        report.min_kernel_value = std::min(report.min_kernel_value, min_entry);

        const double lower = std::exp(-t * kernel.lambda_plus());
        const double upper = std::exp(-t * kernel.lambda_minus());
        for (std::size_t x : x_samples) {
            double mass = 0.0;
            for (std::size_t y = 0; y < space.size(); ++y) {
                mass += snapshot(x, y) * space.weight(y);
            }
            report.samples.push_back({x, t, mass});
            report.worst_lower_violation =
                std::max(report.worst_lower_violation, lower - mass);
            report.worst_upper_violation =
                std::max(report.worst_upper_violation, mass - upper);
        }
    }
    report.pass = report.worst_lower_violation <= tolerance &&
                  report.worst_upper_violation <= tolerance &&
                  report.min_kernel_value >= -tolerance;
    return report;
}

double neumann_tail_bound(const Kernel& kernel, double t) {
    if (!(t > 0.0)) {
        throw std::invalid_argument("tail bound requires t > 0");
    }
    const auto* backend = dynamic_cast<const NeumannBoxBackend*>(kernel.backend().get());
    if (backend == nullptr) {
        return 0.0;
    }
    return backend->axis_tail_bound(t);
}

KernelTable::KernelTable(const Kernel& kernel, const TimeGrid& grid) {
    tables_.resize(grid.nodes());
    for (std::size_t d = 0; d < tables_.size(); ++d) {
        kernel.fill(grid.node(d), tables_[d]);
    }
}

} // namespace hvolt
