#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "hvolt/errors.hpp"
#include "hvolt/kernel.hpp"
#include "support.hpp"

using namespace hvolt;
using namespace testsupport;

namespace {

// Random generator matrix with non-positive off-diagonals; conservative when
// defect == 0, otherwise row sums in (0, defect].
SquareMatrix random_generator(std::mt19937& rng, std::size_t n, double defect) {
    std::uniform_real_distribution<double> rate(0.0, 1.0);
    SquareMatrix q(n);
    for (std::size_t i = 0; i < n; ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) {
                continue;
            }
            const double a = rate(rng);
            q(i, j) = -a;
            off += a;
        }
        q(i, i) = off + (defect > 0.0 ? defect * (0.1 + 0.9 * rate(rng)) : 0.0);
    }
    return q;
}

} // namespace

TEST_CASE("one-state zero generator is conservative") {
    auto space = one_point_space();
    Kernel k = matrix_semigroup_kernel(SquareMatrix(1), space);
    CHECK(k.regime() == Regime::stochastic);
    for (double t : {0.1, 1.0, 10.0}) {
        CHECK(kernel_mass(k, 0, t) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("two-state conservative generator keeps mass one") {
    auto space = two_point_space();
    Kernel k = matrix_semigroup_kernel(two_state_conservative_generator(), space);
    CHECK(k.regime() == Regime::stochastic);
    CHECK(k.lambda_minus() == 0.0);
    CHECK(k.lambda_plus() == 0.0);
    for (double t : {0.1, 1.0, 10.0}) {
        CHECK(std::abs(kernel_mass(k, 0, t) - 1.0) < 1e-12);
        CHECK(std::abs(kernel_mass(k, 1, t) - 1.0) < 1e-12);
    }
}

TEST_CASE("matrix exponential matches the closed form for the symmetric flip") {
    // e^{-tQ} for Q = [[1,-1],[-1,1]] has entries (1 +- e^{-2t})/2.
    auto space = two_point_space();
    Kernel k = matrix_semigroup_kernel(two_state_conservative_generator(), space);
    for (double t : {0.05, 0.7, 3.0}) {
        const double diag = 0.5 * (1.0 + std::exp(-2.0 * t));
        const double off = 0.5 * (1.0 - std::exp(-2.0 * t));
        // the evaluator divides by the target weight 0.5
        CHECK(k(0, 0, t) == doctest::Approx(diag / 0.5).epsilon(1e-13));
        CHECK(k(0, 1, t) == doctest::Approx(off / 0.5).epsilon(1e-13));
        CHECK(k(1, 0, t) == doctest::Approx(off / 0.5).epsilon(1e-13));
    }
}

TEST_CASE("scalar generator reproduces the scalar exponential") {
    auto space = one_point_space();
    SquareMatrix q(1);
    q(0, 0) = 0.5;
    Kernel k = matrix_semigroup_kernel(q, space);
    CHECK(k.regime() == Regime::substochastic);
    CHECK(k.lambda_minus() == doctest::Approx(0.5));
    CHECK(k.lambda_plus() == doctest::Approx(0.5));
    CHECK(kernel_mass(k, 0, 2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
}

TEST_CASE("invalid generators are rejected") {
    auto space = two_point_space();
    SquareMatrix pos_off(2);
    pos_off(0, 0) = 1.0;
    pos_off(0, 1) = 0.5; // positive off-diagonal
    pos_off(1, 0) = -1.0;
    pos_off(1, 1) = 1.0;
    CHECK_THROWS_AS(matrix_semigroup_kernel(pos_off, space), InvalidGenerator);

    SquareMatrix neg_row(2);
    neg_row(0, 0) = -0.5; // row sum -0.5
    neg_row(0, 1) = 0.0;
    neg_row(1, 0) = -1.0;
    neg_row(1, 1) = 1.0;
    CHECK_THROWS_AS(matrix_semigroup_kernel(neg_row, space), InvalidGenerator);

    SquareMatrix wrong_size(3);
    CHECK_THROWS_AS(matrix_semigroup_kernel(wrong_size, space), std::invalid_argument);
}

TEST_CASE("semigroup property holds at grid times") {
    std::mt19937 rng(7);
    auto weights = std::vector<double>{0.4, 0.9, 1.7};
    auto space = std::make_shared<const DiscreteMeasureSpace>(
        build_finite_state_space(weights));
    for (int trial = 0; trial < 20; ++trial) {
        const double defect = trial % 2 == 0 ? 0.0 : 0.6;
        Kernel k = matrix_semigroup_kernel(random_generator(rng, 3, defect), space);
        const double s = 0.3;
        const double t = 0.8;
        // e^{-(s+t)Q}(x,z)/w_z == sum_y e^{-sQ}(x,y) e^{-tQ}(y,z) / w_z
        for (std::size_t x = 0; x < 3; ++x) {
            for (std::size_t z = 0; z < 3; ++z) {
                double composed = 0.0;
                for (std::size_t y = 0; y < 3; ++y) {
                    composed += k(x, y, s) * weights[y] * k(y, z, t);
                }
                CHECK(k(x, z, s + t) == doctest::Approx(composed).epsilon(1e-11));
            }
        }
    }
}

TEST_CASE("random kernels respect the mass sandwich and non-negativity") {
    std::mt19937 rng(11);
    auto weights = std::vector<double>{1.0, 0.5, 2.0, 0.25};
    auto space = std::make_shared<const DiscreteMeasureSpace>(
        build_finite_state_space(weights));
    const std::size_t xs_arr[] = {0, 1, 2, 3};
    const double ts_arr[] = {0.05, 0.3, 1.2, 6.0};
    for (int trial = 0; trial < 20; ++trial) {
        const double defect = trial % 2 == 0 ? 0.0 : 1.1;
        Kernel k = matrix_semigroup_kernel(random_generator(rng, 4, defect), space);
        MassReport r = verify_kernel_bounds(k, xs_arr, ts_arr, 1e-10);
        CHECK(r.pass);
        CHECK(r.min_kernel_value >= -1e-12);
    }
}

TEST_CASE("damp scales the mass exactly") {
    auto space = two_point_space();
    Kernel base = matrix_semigroup_kernel(two_state_conservative_generator(), space);
    Kernel damped = damp(base, 0.5);
    CHECK(damped.regime() == Regime::substochastic);
    CHECK(damped.lambda_minus() == doctest::Approx(0.5));
    CHECK(damped.lambda_plus() == doctest::Approx(0.5));
    CHECK(kernel_mass(damped, 0, 2.0) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-11));
    for (double t : {0.2, 1.0, 4.0}) {
        CHECK(kernel_mass(damped, 1, t) ==
              doctest::Approx(std::exp(-0.5 * t) * kernel_mass(base, 1, t)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(damp(base, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(damp(base, -1.0), std::invalid_argument);
}

TEST_CASE("damping twice equals one damp with the summed mass") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> mdist(0.1, 2.0);
    auto space = two_point_space();
    Kernel base = matrix_semigroup_kernel(two_state_conservative_generator(), space);
    for (int trial = 0; trial < 20; ++trial) {
        const double m1 = mdist(rng);
        const double m2 = mdist(rng);
        Kernel twice = damp(damp(base, m1), m2);
        Kernel once = damp(base, m1 + m2);
        for (double t : {0.1, 0.9, 3.7}) {
            for (std::size_t x = 0; x < 2; ++x) {
                for (std::size_t y = 0; y < 2; ++y) {
                    CHECK(twice(x, y, t) ==
                          doctest::Approx(once(x, y, t)).epsilon(1e-13));
                }
            }
        }
        CHECK(twice.lambda_plus() == doctest::Approx(once.lambda_plus()));
    }
}

TEST_CASE("kernel_mass rejects non-positive times") {
    auto space = one_point_space();
    Kernel k = matrix_semigroup_kernel(SquareMatrix(1), space);
    CHECK_THROWS_AS(kernel_mass(k, 0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(kernel_mass(k, 0, -1.0), std::invalid_argument);
}

TEST_CASE("verify flags a kernel declared with wrong mass bounds") {
    auto space = two_point_space();
    Kernel damped = damp(matrix_semigroup_kernel(two_state_conservative_generator(), space),
                         1.0);
    // Re-declare the damped backend as stochastic: the measured mass e^{-t}
    // then sits below the claimed lower bound e^{-t*0} = 1.
    Kernel wrong(damped.space(), damped.backend(), 0.0, 0.0, Regime::stochastic,
                 "mislabeled");
    const std::size_t xs_arr[] = {0, 1};
    const double ts_arr[] = {0.5, 1.0, 2.0};
    MassReport r = verify_kernel_bounds(wrong, xs_arr, ts_arr, 1e-10);
    CHECK_FALSE(r.pass);
    CHECK(r.worst_lower_violation > 0.1); // e^{-0.5} well below 1
    CHECK(r.worst_upper_violation <= 1e-12);
}

TEST_CASE("neumann kernel constant mode only") {
    auto space = std::make_shared<const DiscreteMeasureSpace>(build_box_space(1, 9, 2.0));
    Kernel k = neumann_box_kernel(space, 1.0, 0);
    CHECK(k.regime() == Regime::stochastic);
    for (double t : {0.01, 1.0}) {
        CHECK(k(0, 5, t) == doctest::Approx(0.5)); // 1 / volume
        CHECK(kernel_mass(k, 3, t) == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("neumann kernel flattens to 1/volume at large times") {
    auto space = std::make_shared<const DiscreteMeasureSpace>(build_box_space(1, 17, 1.0));
    Kernel k = neumann_box_kernel(space, 1.0, 16);
    for (std::size_t x : {std::size_t{0}, std::size_t{8}, std::size_t{16}}) {
        for (std::size_t y : {std::size_t{0}, std::size_t{4}, std::size_t{16}}) {
            CHECK(k(x, y, 5.0) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("neumann kernel mass stays within quadrature tolerance") {
    auto space = std::make_shared<const DiscreteMeasureSpace>(build_box_space(1, 33, 1.0));
    Kernel k = neumann_box_kernel(space, 1.0, 64);
    for (double t : {0.1, 1.0, 10.0}) {
        for (std::size_t x = 0; x < space->size(); x += 4) {
            CHECK(std::abs(kernel_mass(k, x, t) - 1.0) < 1e-6);
        }
    }
    CHECK(neumann_tail_bound(k, 0.1) < 1e-9);
}

TEST_CASE("2d neumann kernel is the tensor product with unit mass") {
    auto space = std::make_shared<const DiscreteMeasureSpace>(build_box_space(2, 9, 1.0));
    Kernel k = neumann_box_kernel(space, 0.5, 8);
    CHECK(kernel_mass(k, 0, 0.2) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(kernel_mass(k, 40, 0.2) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("too-small cutoff fails verification with negative samples") {
    auto space = std::make_shared<const DiscreteMeasureSpace>(build_box_space(1, 33, 1.0));
    Kernel k = neumann_box_kernel(space, 1.0, 1);
    // With only the first cosine mode, K(0, L; t) = 1 - 2 e^{-pi^2 t} < 0 for
    // small t.
    CHECK(k(0, 32, 0.01) < 0.0);
    const std::size_t xs_arr[] = {0, 16, 32};
    const double ts_arr[] = {0.01, 0.1};
    MassReport r = verify_kernel_bounds(k, xs_arr, ts_arr, 1e-8);
    CHECK_FALSE(r.pass);
    CHECK(r.min_kernel_value < -0.5);
}

TEST_CASE("neumann kernel rejects non-box spaces") {
    auto space = two_point_space();
    CHECK_THROWS_AS(neumann_box_kernel(space, 1.0, 4), std::invalid_argument);
}

TEST_CASE("kernel table matches direct evaluation at grid differences") {
    auto space = two_point_space();
    Kernel k = damp(matrix_semigroup_kernel(two_state_conservative_generator(), space), 0.3);
    TimeGrid grid(2.0, 8);
    KernelTable table(k, grid);
    REQUIRE(table.differences() == 9);
    for (std::size_t d = 0; d < 9; ++d) {
        for (std::size_t x = 0; x < 2; ++x) {
            for (std::size_t y = 0; y < 2; ++y) {
                CHECK(table.at(d)(x, y) ==
                      doctest::Approx(k(x, y, grid.node(d))).epsilon(1e-14));
            }
        }
    }
}
