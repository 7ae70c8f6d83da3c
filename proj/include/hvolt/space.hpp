#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hvolt {

/// Finite quadrature representation of a measure space (X, mu): one abstract
/// point per entry, weight(i) = mu-mass of point i. Immutable after
/// construction.
class DiscreteMeasureSpace {
public:
    struct Box {
        int dim = 0;              // 1 or 2
        int points_per_axis = 0;
        double side_length = 0.0;
    };

    DiscreteMeasureSpace(std::vector<double> weights, std::string label);
    DiscreteMeasureSpace(std::vector<double> weights, std::string label,
                         Box box, std::vector<double> coordinates);

    std::size_t size() const { return weights_.size(); }
    double weight(std::size_t i) const { return weights_[i]; }
    std::span<const double> weights() const { return weights_; }
    double total_mass() const;
    const std::string& label() const { return label_; }

    /// Tensor-grid metadata, present for spaces built by build_box_space.
    const std::optional<Box>& box() const { return box_; }
    /// Coordinate of point i along the given axis (box spaces only).
    double coordinate(std::size_t point, int axis) const;

private:
    std::vector<double> weights_;
    std::string label_;
    std::optional<Box> box_;
    std::vector<double> coordinates_; // point-major, box()->dim per point
};

/// Uniform grid 0 = t_0 < ... < t_n = T used to truncate the time axis.
/// The Volterra structure makes the solution on [0,T] independent of
/// anything beyond T.
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t steps);

    double horizon() const { return horizon_; }
    std::size_t steps() const { return steps_; }      // n_t
    std::size_t nodes() const { return steps_ + 1; }
    double dt() const { return dt_; }
    double node(std::size_t j) const { return static_cast<double>(j) * dt_; }

private:
    double horizon_;
    std::size_t steps_;
    double dt_;
};

/// Values over (space point x time node). Solutions, iterates and sources
/// all use this layout; storage is time-major so one time slice is
/// contiguous.
class GridFunction {
public:
    GridFunction(std::shared_ptr<const DiscreteMeasureSpace> space,
                 std::shared_ptr<const TimeGrid> time, double fill = 0.0);

    /// Adopts `values` laid out time-major: values[j * n_points + i].
    /// Rejects size mismatches and non-finite entries.
    static GridFunction from_values(std::shared_ptr<const DiscreteMeasureSpace> space,
                                    std::shared_ptr<const TimeGrid> time,
                                    std::vector<double> values);

    std::size_t n_points() const { return space_->size(); }
    std::size_t n_nodes() const { return time_->nodes(); }

    double operator()(std::size_t point, std::size_t node) const {
        return values_[node * space_->size() + point];
    }
    double& at(std::size_t point, std::size_t node) {
        return values_[node * space_->size() + point];
    }

    std::span<const double> slice(std::size_t node) const;
    std::span<double> slice(std::size_t node);
    std::span<const double> values() const { return values_; }

    const std::shared_ptr<const DiscreteMeasureSpace>& space() const { return space_; }
    const std::shared_ptr<const TimeGrid>& time() const { return time_; }

    double max_value() const;
    double min_value() const;
    bool all_finite() const;

private:
    std::shared_ptr<const DiscreteMeasureSpace> space_;
    std::shared_ptr<const TimeGrid> time_;
    std::vector<double> values_;
};

/// sup over the grid of |a - b|. Shapes must match.
double sup_abs_diff(const GridFunction& a, const GridFunction& b);
/// max over the grid of (a - b), signed.
double max_signed_diff(const GridFunction& a, const GridFunction& b);

/// One abstract point per weight. Rejects empty or non-positive lists.
DiscreteMeasureSpace build_finite_state_space(std::span<const double> weights,
                                              std::string label = "finite");

/// Tensor grid on [0, L]^dim with trapezoidal mu-weights (boundary points
/// carry half weight per axis), so integrating the constant 1 gives the box
/// volume exactly. dim must be 1 or 2.
DiscreteMeasureSpace build_box_space(int dim, int points_per_axis, double side_length);

/// Quadrature realizing the integral of f over X: sum of f(i) * weight(i).
double integrate(const DiscreteMeasureSpace& space, std::span<const double> f);

} // namespace hvolt
