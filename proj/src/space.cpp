#include "hvolt/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hvolt {

namespace {

void validate_weights(const std::vector<double>& weights) {
    if (weights.empty()) {
        throw std::invalid_argument("measure space needs at least one point");
    }
    for (double w : weights) {
        if (!(w > 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("measure space weights must be strictly positive");
        }
    }
}

} // namespace

DiscreteMeasureSpace::DiscreteMeasureSpace(std::vector<double> weights, std::string label)
    : weights_(std::move(weights)), label_(std::move(label)) {
    validate_weights(weights_);
}

DiscreteMeasureSpace::DiscreteMeasureSpace(std::vector<double> weights, std::string label,
                                           Box box, std::vector<double> coordinates)
    : weights_(std::move(weights)),
      label_(std::move(label)),
      box_(box),
      coordinates_(std::move(coordinates)) {
    validate_weights(weights_);
    if (coordinates_.size() != weights_.size() * static_cast<std::size_t>(box.dim)) {
        throw std::invalid_argument("box coordinates do not match point count");
    }
}

double DiscreteMeasureSpace::total_mass() const {
    return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

double DiscreteMeasureSpace::coordinate(std::size_t point, int axis) const {
    if (!box_) {
        throw std::logic_error("coordinate() is only available on box spaces");
    }
    if (point >= size() || axis < 0 || axis >= box_->dim) {
        throw std::out_of_range("coordinate index out of range");
    }
    return coordinates_[point * static_cast<std::size_t>(box_->dim) + static_cast<std::size_t>(axis)];
}

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::invalid_argument("time horizon must be positive and finite");
    }
    if (steps == 0) {
        throw std::invalid_argument("time grid needs at least one step");
    }
    dt_ = horizon / static_cast<double>(steps);
}

GridFunction::GridFunction(std::shared_ptr<const DiscreteMeasureSpace> space,
                           std::shared_ptr<const TimeGrid> time, double fill)
    : space_(std::move(space)), time_(std::move(time)) {
    if (!space_ || !time_) {
        throw std::invalid_argument("grid function needs a space and a time grid");
    }
    values_.assign(space_->size() * time_->nodes(), fill);
}

GridFunction GridFunction::from_values(std::shared_ptr<const DiscreteMeasureSpace> space,
                                       std::shared_ptr<const TimeGrid> time,
                                       std::vector<double> values) {
    GridFunction f(std::move(space), std::move(time));
    if (values.size() != f.values_.size()) {
        throw std::invalid_argument("grid function values do not match space x time shape");
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("grid function values must be finite");
        }
    }
    f.values_ = std::move(values);
    return f;
}

std::span<const double> GridFunction::slice(std::size_t node) const {
    return {values_.data() + node * space_->size(), space_->size()};
}

std::span<double> GridFunction::slice(std::size_t node) {
    return {values_.data() + node * space_->size(), space_->size()};
}

double GridFunction::max_value() const {
    return *std::max_element(values_.begin(), values_.end());
}

double GridFunction::min_value() const {
    return *std::min_element(values_.begin(), values_.end());
}

bool GridFunction::all_finite() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](double v) { return std::isfinite(v); });
}

namespace {

void require_same_shape(const GridFunction& a, const GridFunction& b) {
    if (a.n_points() != b.n_points() || a.n_nodes() != b.n_nodes()) {
        throw std::invalid_argument("grid functions have different shapes");
    }
}

} // namespace

double sup_abs_diff(const GridFunction& a, const GridFunction& b) {
    require_same_shape(a, b);
    double sup = 0.0;
    auto va = a.values();
    auto vb = b.values();
    for (std::size_t i = 0; i < va.size(); ++i) {
        sup = std::max(sup, std::abs(va[i] - vb[i]));
    }
    return sup;
}

double max_signed_diff(const GridFunction& a, const GridFunction& b) {
    require_same_shape(a, b);
    double worst = -std::numeric_limits<double>::infinity();
    auto va = a.values();
    auto vb = b.values();
    for (std::size_t i = 0; i < va.size(); ++i) {
        worst = std::max(worst, va[i] - vb[i]);
    }
    return worst;
}

DiscreteMeasureSpace build_finite_state_space(std::span<const double> weights, std::string label) {
    return DiscreteMeasureSpace(std::vector<double>(weights.begin(), weights.end()),
                                std::move(label));
}

DiscreteMeasureSpace build_box_space(int dim, int points_per_axis, double side_length) {
    if (dim != 1 && dim != 2) {
        throw std::invalid_argument("box spaces support dim 1 or 2 only");
    }
    if (points_per_axis < 2) {
        throw std::invalid_argument("box spaces need at least 2 points per axis");
    }
    if (!(side_length > 0.0)) {
        throw std::invalid_argument("box side length must be positive");
    }

    const int p = points_per_axis;
    const double spacing = side_length / static_cast<double>(p - 1);
    std::vector<double> axis_w(static_cast<std::size_t>(p), spacing);
    axis_w.front() = 0.5 * spacing;
    axis_w.back() = 0.5 * spacing;
    std::vector<double> axis_x(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) {
        axis_x[static_cast<std::size_t>(i)] = spacing * static_cast<double>(i);
    }

    DiscreteMeasureSpace::Box box{dim, points_per_axis, side_length};
    if (dim == 1) {
        return DiscreteMeasureSpace(axis_w, "box1d", box, axis_x);
    }

    const std::size_t n = static_cast<std::size_t>(p) * static_cast<std::size_t>(p);
    std::vector<double> weights(n);
    std::vector<double> coords(2 * n);
    for (int ix = 0; ix < p; ++ix) {
        for (int iy = 0; iy < p; ++iy) {
            const std::size_t idx = static_cast<std::size_t>(ix) * static_cast<std::size_t>(p) +
                                    static_cast<std::size_t>(iy);
            weights[idx] = axis_w[static_cast<std::size_t>(ix)] * axis_w[static_cast<std::size_t>(iy)];
            coords[2 * idx] = axis_x[static_cast<std::size_t>(ix)];
            coords[2 * idx + 1] = axis_x[static_cast<std::size_t>(iy)];
        }
    }
    return DiscreteMeasureSpace(std::move(weights), "box2d", box, std::move(coords));
}

double integrate(const DiscreteMeasureSpace& space, std::span<const double> f) {
    if (f.size() != space.size()) {
        throw std::invalid_argument("integrand length does not match the space");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        acc += f[i] * space.weight(i);
    }
    return acc;
}

} // namespace hvolt
