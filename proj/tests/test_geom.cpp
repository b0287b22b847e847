#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ssml/geom.hpp"
#include "ssml/lstsq.hpp"
#include "ssml/random.hpp"

using namespace ssml;

namespace {
DenseMatrix uniform_points(index_t n, index_t d, std::uint64_t seed) {
    RngState s{seed, 0, 0};
    DenseMatrix p(n, d);
    for (index_t i = 0; i < p.size(); ++i) p.data()[i] = next_u01(s);
    return p;
}
}  // namespace

TEST_CASE("greedy cover: hand-simulated line example") {
    const DenseMatrix pts{{0.0}, {0.5}, {1.0}};
    const auto cover = greedy_epsilon_cover(pts, 0.6);
    CHECK(cover.center_indices == std::vector<index_t>{0, 2});
    verify_cover(pts, cover);

    const auto whole = greedy_epsilon_cover(pts, 1.5);  // epsilon > diameter
    CHECK(whole.size() == 1);
    verify_cover(pts, whole);

    CHECK_THROWS_AS(greedy_epsilon_cover(DenseMatrix(0, 1), 0.5), error);
    CHECK_THROWS_AS(greedy_epsilon_cover(pts, 0.0), error);
}

TEST_CASE("greedy cover: packing bound and validity on the unit square") {
    const DenseMatrix pts = uniform_points(200, 2, 31);
    const auto cover = greedy_epsilon_cover(pts, 0.2);
    verify_cover(pts, cover);
    const double bound = std::pow(2.0 * std::sqrt(2.0) / 0.2, 2.0);
    CHECK(static_cast<double>(cover.size()) <= bound);
}

TEST_CASE("greedy cover: embedding metric routes through V_hat") {
    // V_hat collapses the second coordinate; points differing only there
    // should all be covered by one center.
    DenseMatrix pts(5, 2);
    for (index_t i = 0; i < 5; ++i) {
        pts(i, 0) = 1.0;
        pts(i, 1) = static_cast<double>(i);
    }
    DenseMatrix v(2, 1);
    v(0, 0) = 1.0;
    const auto cover = greedy_epsilon_cover(pts, 0.1, CoverMetric::embedding, &v);
    CHECK(cover.size() == 1);
    verify_cover(pts, cover, &v);
    CHECK_THROWS_AS(greedy_epsilon_cover(pts, 0.1, CoverMetric::embedding, nullptr), error);
}

TEST_CASE("covering_curve: segment bound and monotonicity") {
    const DenseMatrix one{{0.3}};
    const auto trivial = covering_curve(one, {0.5, 0.25});
    for (const auto& [eps, size] : trivial) CHECK(size == 1);

    const DenseMatrix seg = uniform_points(400, 1, 32);
    const std::vector<double> grid{0.5, 0.25, 0.125};
    const auto curve = covering_curve(seg, grid);
    for (const auto& [eps, size] : curve)
        CHECK(static_cast<double>(size) <= 2.0 / eps);
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].second >= curve[i - 1].second);

    const DenseMatrix plane = uniform_points(300, 2, 33);
    const auto curve2 = covering_curve(plane, {0.4, 0.2, 0.1});
    for (std::size_t i = 1; i < curve2.size(); ++i) CHECK(curve2[i].second >= curve2[i - 1].second);

    CHECK_THROWS_AS(covering_curve(seg, {0.25, 0.5}), error);  // ascending grid
    CHECK_THROWS_AS(covering_curve(seg, {}), error);
}

TEST_CASE("doubling_dim_estimate: exact power law, plane sample, constant curve") {
    std::vector<std::pair<double, index_t>> powerlaw;
    for (double eps : {0.5, 0.25, 0.125})
        powerlaw.emplace_back(eps, static_cast<index_t>(2.0 / eps));
    const auto est = doubling_dim_estimate(powerlaw);
    CHECK(est.slope == Catch::Approx(1.0).margin(1e-12));
    CHECK_FALSE(est.degenerate);

    const DenseMatrix plane = uniform_points(1500, 2, 34);
    const auto curve = covering_curve(plane, {0.4, 0.2, 0.1});
    const auto planar = doubling_dim_estimate(curve);
    CHECK(planar.slope >= 1.5);
    CHECK(planar.slope <= 2.5);

    std::vector<std::pair<double, index_t>> flat{{0.5, 3}, {0.25, 3}};
    const auto fest = doubling_dim_estimate(flat);
    CHECK(fest.slope == 0.0);
    CHECK(fest.degenerate);

    CHECK_THROWS_AS(doubling_dim_estimate({{0.5, 1}}), error);
}

TEST_CASE("bound_rhs_1nn: vanishing limits and hand-checked value") {
    BoundInputs b;
    b.q = 1;
    b.n = 1024;
    b.lipschitz = 0.0;
    b.v_frobenius = 2.0;
    b.doubling_dim = 3.0;
    b.k = 1;
    b.bayes_errors = {0.0};
    CHECK(bound_rhs_1nn(b) == 0.0);

    b.bayes_errors = {0.1};
    b.lipschitz = 1.0;
    const double expected = 0.2 + 6.0 / std::pow(1024.0, 0.25);
    CHECK(bound_rhs_1nn(b) == Catch::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(expected - 1.2607) <= 5e-4);

    BoundInputs big = b;
    big.n = 4096;
    CHECK(bound_rhs_1nn(big) < bound_rhs_1nn(b));

    BoundInputs bad = b;
    bad.doubling_dim = 0.0;
    CHECK_THROWS_AS(bound_rhs_1nn(bad), error);
}

TEST_CASE("bound_rhs_knn: factor arithmetic") {
    BoundInputs b;
    b.q = 1;
    b.n = 10000;
    b.lipschitz = 0.0;
    b.v_frobenius = 0.0;
    b.doubling_dim = 4.0;
    b.bayes_errors = {0.25};

    // k = 8: the bayes factor is exactly 2
    b.k = 8;
    const double rate_term = 1.0 * 8.0 / std::pow(10000.0, 1.0 / 5.0);
    CHECK(bound_rhs_knn(b) == 2.0 * 0.25 + rate_term);

    // k -> infinity: factor approaches 1
    b.k = 1000000;
    BoundInputs zero = b;
    zero.bayes_errors = {0.0};
    const double factor = (bound_rhs_knn(b) - bound_rhs_knn(zero)) / 0.25;
    CHECK(std::abs(factor - 1.0) <= 1e-2);
}

TEST_CASE("bound_rhs_knn: oracle agreement on random inputs and bayes lower bound") {
    RngState s{35, 0, 0};
    for (int trial = 0; trial < 20; ++trial) {
        BoundInputs b;
        b.q = 1 + next_bounded(s, 6);
        b.n = 10 + next_bounded(s, 100000);
        b.lipschitz = next_u01(s) * 3.0;
        b.v_frobenius = next_u01(s) * 5.0;
        b.doubling_dim = 0.5 + next_u01(s) * 6.0;
        b.k = 1 + next_bounded(s, 50);
        for (index_t i = 0; i < b.q; ++i) b.bayes_errors.push_back(next_u01(s) * 0.5);

        // test-local reimplementation with a different evaluation order
        long double acc = 0.0L;
        for (index_t i = 0; i < b.q; ++i)
            acc += (1.0L + std::sqrt(8.0L / b.k)) * b.bayes_errors[i];
        acc += static_cast<long double>(b.q) * (6.0L * b.lipschitz * b.v_frobenius + b.k) /
               std::pow(static_cast<long double>(b.n), 1.0L / (b.doubling_dim + 1.0L));
        CHECK(bound_rhs_knn(b) == Catch::Approx(static_cast<double>(acc)).epsilon(1e-12));

        long double acc1 = 0.0L;
        for (index_t i = 0; i < b.q; ++i) acc1 += 2.0L * b.bayes_errors[i];
        acc1 += 3.0L * static_cast<long double>(b.q) * b.lipschitz * b.v_frobenius /
                std::pow(static_cast<long double>(b.n), 1.0L / (b.doubling_dim + 1.0L));
        CHECK(bound_rhs_1nn(b) == Catch::Approx(static_cast<double>(acc1)).epsilon(1e-12));

        double bayes_sum = 0.0;
        for (double e : b.bayes_errors) bayes_sum += e;
        CHECK(bound_rhs_knn(b) >= bayes_sum);
    }
}

TEST_CASE("normalize_diameter: rescales to diameter one") {
    const DenseMatrix pts = uniform_points(50, 3, 36);
    const auto [scaled, diam] = normalize_diameter(pts);
    CHECK(diam > 0.0);
    double new_diam = 0.0;
    for (index_t a = 0; a < scaled.rows(); ++a)
        for (index_t b = a + 1; b < scaled.rows(); ++b) {
            double d = 0.0;
            for (index_t j = 0; j < 3; ++j) {
                const double diff = scaled(a, j) - scaled(b, j);
                d += diff * diff;
            }
            new_diam = std::max(new_diam, std::sqrt(d));
        }
    CHECK(new_diam == Catch::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(normalize_diameter(DenseMatrix(2, 2)), error);
}
