#include <doctest.h>

#include "ssesam/common.hpp"
#include "ssesam/landscape.hpp"
#include "ssesam/theory.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace ssesam;

namespace {

QuadraticLandscape seeded_saddle(uint64_t seed, double depth = -60.0) {
    SaddleSpec spec;
    spec.positive_eigenvalues = {0.3, 1.0, 2.5};
    spec.negative_eigenvalues = {depth, -0.2};
    spec.rotation_seed = seed;
    spec.gradient_scale = 1.0;
    return make_saddle(spec);
}

}  // namespace

TEST_CASE("escape threshold frozen value, sign, and rho monotonicity") {
    CHECK(escape_threshold(1.0, 0.1, 0.05, 1.0) ==
          doctest::Approx(-51.622776601683793).epsilon(1e-15));
    Rng rng(1);
    for (int rep = 0; rep < 30; ++rep) {
        const double mu = rng.uniform(1.0, 4.0);
        const double eta = rng.uniform(0.001, 0.3);
        const double rho = rng.uniform(0.001, 0.3);
        const double L = rng.uniform(0.1, 10.0);
        const double thr = escape_threshold(mu, eta, rho, L);
        CHECK(thr < 0.0);
        CHECK(escape_threshold(mu, eta, rho * 1.5, L) > thr);  // easier at larger rho
    }
    CHECK_THROWS_AS(escape_threshold(0.5, 0.1, 0.05, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(escape_threshold(1.0, 0.0, 0.05, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(escape_threshold(1.0, 0.1, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(escape_threshold(1.0, 0.1, 0.05, 0.0), std::invalid_argument);
}

TEST_CASE("partial-perturbation threshold reduces to the full one at r = 1") {
    Rng rng(2);
    for (int rep = 0; rep < 20; ++rep) {
        const double mu = rng.uniform(1.0, 3.0);
        const double eta = rng.uniform(0.01, 0.2);
        const double rho = rng.uniform(0.01, 0.2);
        const double L = rng.uniform(0.5, 5.0);
        CHECK(imbalance_threshold(mu, eta, rho, 1.0, L) == escape_threshold(mu, eta, rho, L));
        double prev = imbalance_threshold(mu, eta, rho, 0.05, L);
        for (double r = 0.1; r <= 1.0; r += 0.05) {
            const double cur = imbalance_threshold(mu, eta, rho, r, L);
            CHECK(cur > prev);  // strictly easier as more mass is perturbed
            prev = cur;
        }
    }
    CHECK_THROWS_AS(imbalance_threshold(1.0, 0.1, 0.05, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(imbalance_threshold(1.0, 0.1, 0.05, 1.5, 1.0), std::invalid_argument);
}

TEST_CASE("quadratic sgd simulation follows the closed form") {
    Matrix h = Matrix::Zero(3, 3);
    h.diagonal() << 0.5, -1.0, 2.0;
    const QuadraticLandscape land(h, Vector::Zero(3), Vector::Zero(3), 0.0);
    Vector w0(3);
    w0 << 1.0, -0.5, 2.0;
    const double eta = 0.05;
    const int steps = 20;
    const QuadraticTrajectory traj =
        simulate_quadratic(land, w0, OptimKind::sgd, eta, 0.0, steps);
    REQUIRE(traj.weights.size() == static_cast<size_t>(steps + 1));
    for (int t = 0; t <= steps; ++t) {
        for (int i = 0; i < 3; ++i) {
            const double expect = std::pow(1.0 - eta * h(i, i), t) * w0[i];
            CHECK(std::abs(traj.weights[static_cast<size_t>(t)][i] - expect) <=
                  1e-9 * std::max(1.0, std::abs(expect)));
        }
    }
}

TEST_CASE("escape instances satisfy the amplification inequality") {
    for (uint64_t seed = 0; seed < 8; ++seed) {
        const double mu = (seed % 2 == 0) ? 1.0 : 2.0;
        const EscapeInstance inst = make_escape_instance(20, mu, 2 + static_cast<int>(seed % 5),
                                                         derive_seed(4242, seed));
        const EscapeReport rep = verify_escape(inst);
        CHECK(rep.condition_met);
        CHECK_FALSE(rep.degenerate);
        CHECK(rep.holds);
        CHECK(rep.lhs >= rep.rhs - 1e-8 * std::abs(rep.rhs));
        CHECK(rep.lambda_min <= rep.threshold);
        CHECK(rep.traj_grad_bound > 0.0);
    }
}

TEST_CASE("sgd keeps the projected gradient on its geometric schedule") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        const QuadraticLandscape land = seeded_saddle(seed);
        Rng rng(derive_seed(77, seed));
        const Vector w0 = 0.5 * rng.normal_vector(land.dim());
        const double eta = rng.uniform(0.001, 0.01);
        const int t = 1 + static_cast<int>(seed % 20);
        CHECK(sgd_projection_error(land, w0, eta, t) < 1e-9);
    }
}

TEST_CASE("sam growth bound applies and holds on escape instances") {
    for (uint64_t seed = 0; seed < 6; ++seed) {
        const EscapeInstance inst =
            make_escape_instance(20, 1.0, 2 + static_cast<int>(seed % 5), derive_seed(88, seed));
        const GrowthReport rep =
            verify_sam_growth(inst.landscape, inst.w0, inst.eta, inst.rho, inst.steps);
        CHECK(rep.applicable);
        CHECK(rep.reason == "applicable");
        CHECK_FALSE(rep.degenerate);
        CHECK(rep.holds);
        CHECK(rep.lhs >= rep.rhs * (1.0 - 1e-8));
        CHECK(rep.growth_factor > 0.0);
    }
}

TEST_CASE("sam growth bound reports each inapplicability reason") {
    const QuadraticLandscape land = seeded_saddle(5);
    Rng rng(6);
    const Vector w0 = 0.5 * rng.normal_vector(land.dim());

    const GrowthReport no_rho = verify_sam_growth(land, w0, 0.01, 0.0, 4);
    CHECK_FALSE(no_rho.applicable);
    CHECK(no_rho.reason == "rho must be positive: the escape threshold diverges as rho -> 0");

    Matrix h = Matrix::Zero(2, 2);
    h.diagonal() << 1.0, -0.3;
    const QuadraticLandscape flat(h, Vector::Zero(2), Vector::Zero(2), 0.0);
    const GrowthReport no_grad = verify_sam_growth(flat, Vector::Zero(2), 0.01, 0.05, 4);
    CHECK_FALSE(no_grad.applicable);
    CHECK(no_grad.reason == "gradient vanishes along the trajectory");

    // Shallow curvature cannot clear the mu = 1 threshold at these scales.
    const QuadraticLandscape shallow = seeded_saddle(7, -0.05);
    const Vector w1 = 0.5 * Rng(8).normal_vector(shallow.dim());
    const GrowthReport above = verify_sam_growth(shallow, w1, 0.001, 0.001, 4);
    CHECK_FALSE(above.applicable);
    CHECK(above.reason == "lambda_min above the mu = 1 escape threshold");
}

TEST_CASE("second moment of a summed gaussian group is exact") {
    Vector mean(2), var(2);
    mean << 1.0, 2.0;
    var << 0.5, 0.25;
    CHECK(sum_second_moment(1, mean, var) == 5.75);    // ||mu||^2 + tr
    CHECK(sum_second_moment(3, mean, var) == 47.25);   // 9*5 + 3*0.75
    CHECK_THROWS_AS(sum_second_moment(0, mean, var), std::invalid_argument);
}

TEST_CASE("monte carlo group-norm ratio tracks the moment formula") {
    Rng rng(9);
    Vector mean_head(4), var_head(4), mean_tail(4), var_tail(4);
    for (int i = 0; i < 4; ++i) {
        mean_head[i] = rng.uniform(-1.0, 1.0);
        var_head[i] = rng.uniform(0.3, 1.5);
        mean_tail[i] = rng.uniform(-1.0, 1.0);
        var_tail[i] = rng.uniform(0.3, 1.5);
    }
    const RatioReport rep =
        verify_sum_ratio(100, 10, mean_head, var_head, mean_tail, var_tail, 10000, 11);
    CHECK(std::abs(rep.relative_error) <= 0.05);
    CHECK(rep.exact_ratio > 0.0);
    const RatioReport again =
        verify_sum_ratio(100, 10, mean_head, var_head, mean_tail, var_tail, 10000, 11);
    CHECK(again.empirical_ratio == rep.empirical_ratio);  // seeded determinism
    CHECK_THROWS_AS(
        verify_sum_ratio(100, 10, mean_head, var_head, mean_tail, var_tail, 999, 11),
        std::invalid_argument);
}

TEST_CASE("perturbation angles obey both closed-form guarantees") {
    for (int i = 0; i <= 9; ++i) {
        const double r = 1e-3 * std::pow(100.0, i / 9.0);
        for (int j = 0; j < 36; ++j) {
            const double psi = std::numbers::pi * j / 36.0;
            const AngleReport rep = perturbation_angles(r, psi);
            CHECK(rep.within_bounds);
            CHECK(rep.head_gap <= rep.head_bound + 1e-15);
            CHECK(rep.tail_gap <= rep.tail_bound + 1e-15);
            CHECK(rep.cross_check_error <= 1e-10);
        }
    }
    const AngleReport limit = perturbation_angles(0.0, 1.0);
    CHECK(limit.cos_head == 1.0);
    CHECK(limit.head_gap == 0.0);
    CHECK(limit.within_bounds);
    CHECK_THROWS_AS(perturbation_angles(1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(perturbation_angles(-0.1, 0.5), std::invalid_argument);
}

TEST_CASE("window instances separate full from tail-only escape") {
    int found = 0;
    for (uint64_t seed = 0; seed < 5; ++seed) {
        const WindowInstance wi = make_window_instance(20, 2.0, 8, derive_seed(3131, seed));
        if (!wi.found) continue;
        ++found;
        const ImbalanceReport rep =
            verify_imbalance_escape(wi.base.landscape, wi.tail_fraction, wi.base.w0, wi.base.eta,
                                    wi.base.rho, wi.base.mu, wi.base.steps);
        CHECK(rep.window);
        CHECK(rep.part1_applicable);
        CHECK(rep.part1_holds);
        CHECK(rep.sam_escapes);
        CHECK_FALSE(rep.imbsam_escapes);
        CHECK(rep.thresholds_ordered);
        CHECK(rep.lambda_r < rep.lambda_one);
    }
    CHECK(found >= 4);  // the factory fails only in rare geometry
}

TEST_CASE("shallow saddles block both optimizers in the same direction") {
    for (uint64_t seed = 0; seed < 5; ++seed) {
        const EscapeInstance inst = make_shallow_instance(12, derive_seed(3232, seed));
        const ImbalanceReport rep = verify_imbalance_escape(inst.landscape, 0.1, inst.w0,
                                                            inst.eta, inst.rho, inst.mu,
                                                            inst.steps);
        CHECK(rep.part2_applicable);
        CHECK(rep.part2_holds);
        CHECK_FALSE(rep.sam_escapes);
        CHECK_FALSE(rep.imbsam_escapes);
        CHECK(rep.thresholds_ordered);
    }
}

TEST_CASE("generalization bound matches the high-precision oracle") {
    struct Tuple {
        double train_loss, rho;
        int dim;
        double lambda_max_ball, cap;
        int n;
        double w_norm, delta, expected;
    };
    // Reference values computed with 50-digit interval arithmetic and frozen.
    const std::vector<Tuple> tuples = {
        {1.918, 0.0173, 36050, 122.446, 7.837, 107475, 27.068, 0.4472, 5.0169308266149898},
        {0.261, 0.1324, 3907, 46.848, 12.4, 631264, 1.061, 0.1074, 14.839032904034143},
        {1.95, 0.168, 28895, 224.605, 14.631, 911529, 0.26, 0.4049, 306.0447970682164},
        {2.094, 0.1087, 20381, 107.657, 38.411, 107177, 3.71, 0.0574, 54.021195173828086},
        {2.542, 0.1851, 5697, 364.866, 27.275, 967098, 15.141, 0.2805, 268.85771308202827},
        {2.488, 0.1894, 47402, 288.676, 35.524, 48052, 26.451, 0.3888, 640.22364598404046},
        {2.956, 0.258, 13240, 190.063, 23.217, 874630, 14.593, 0.1914, 413.81042512832992},
        {0.629, 0.0874, 89595, 324.018, 30.847, 179453, 21.366, 0.13, 210.86645838396196},
        {1.387, 0.0883, 83888, 344.081, 11.761, 340037, 33.714, 0.3902, 221.45766902637217},
        {0.687, 0.0193, 41349, 200.582, 4.243, 957494, 37.716, 0.4394, 5.3822009086409105},
        {0.944, 0.2001, 51858, 442.342, 32.5, 149813, 10.595, 0.1308, 1139.6307396293047},
        {1.684, 0.0862, 76624, 214.217, 29.593, 379582, 8.773, 0.4988, 126.70893215656114},
        {1.529, 0.0364, 6177, 430.551, 8.489, 167755, 31.683, 0.2169, 14.551909646936335},
        {0.191, 0.1207, 61350, 264.557, 48.583, 902594, 37.697, 0.3433, 269.98446815985768},
        {0.344, 0.2666, 98421, 133.413, 32.407, 116972, 11.74, 0.0875, 840.88702329584629},
        {0.01, 0.2194, 94331, 131.695, 25.529, 187332, 20.307, 0.0621, 550.38150122003029},
        {1.876, 0.2541, 66542, 304.485, 8.489, 799552, 6.462, 0.4772, 1432.8533877133135},
        {2.767, 0.2764, 78506, 162.078, 1.954, 974232, 14.519, 0.4928, 981.86257545849267},
        {0.5, 0.05, 10, 0.0, 5.0, 100, 2.0, 0.1, 1.6441970104519113},
        {0.5, 0.05, 10, 3.0, 5.0, 100, 0.0, 0.1, 1.4567094876794625},
    };
    for (const Tuple& t : tuples) {
        BoundInputs in;
        in.train_loss = t.train_loss;
        in.rho = t.rho;
        in.dim = t.dim;
        in.lambda_max_ball = t.lambda_max_ball;
        in.loss_cap = t.cap;
        in.sample_count = t.n;
        in.weight_norm = t.w_norm;
        in.delta = t.delta;
        const double got = generalization_bound(in);
        CHECK(std::abs(got - t.expected) <= 1e-12 * std::abs(t.expected));
    }
}

TEST_CASE("generalization bound is monotone and validates its domain") {
    BoundInputs in;
    in.train_loss = 0.8;
    in.rho = 0.05;
    in.dim = 512;
    in.lambda_max_ball = 12.0;
    in.loss_cap = 6.0;
    in.sample_count = 4000;
    in.weight_norm = 9.0;
    in.delta = 0.05;
    const double base = generalization_bound(in);

    BoundInputs up = in;
    up.lambda_max_ball = 20.0;
    CHECK(generalization_bound(up) > base);
    up = in;
    up.loss_cap = 9.0;
    CHECK(generalization_bound(up) > base);
    up = in;
    up.train_loss = 1.4;
    CHECK(generalization_bound(up) > base);

    BoundInputs bad = in;
    bad.sample_count = 1;
    CHECK_THROWS_AS(generalization_bound(bad), std::invalid_argument);
    bad = in;
    bad.rho = 0.0;
    CHECK_THROWS_AS(generalization_bound(bad), std::invalid_argument);
    bad = in;
    bad.delta = 0.0;
    CHECK_THROWS_AS(generalization_bound(bad), std::invalid_argument);
    bad = in;
    bad.delta = 1.0;
    CHECK_THROWS_AS(generalization_bound(bad), std::invalid_argument);
    bad = in;
    bad.dim = 0;
    CHECK_THROWS_AS(generalization_bound(bad), std::invalid_argument);
}

TEST_CASE("single seeded bound trial holds end to end") {
    const BoundTrial trial = empirical_bound_trial(0);
    CHECK(trial.holds);
    CHECK(trial.population_loss <= trial.bound_value);
    CHECK(trial.inputs.sample_count == 200);
    CHECK(trial.inputs.rho == 0.05);
    CHECK(trial.inputs.delta == 0.1);
    CHECK(trial.inputs.lambda_max_ball > 0.0);
    CHECK(trial.inputs.loss_cap > 0.0);
    CHECK(std::isfinite(trial.bound_value));
}
