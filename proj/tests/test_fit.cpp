#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "ksep/fit.hpp"
#include "oracles.hpp"

using namespace ksep;
using fixtures::vec2;

namespace {

SampleSet synthetic_samples(const BasisSpec& spec, const Vector& u0, int count,
                            std::uint64_t seed) {
    SampleSet set;
    set.seed.center = Vector::Zero(2);
    set.seed.p = Matrix::Identity(2, 2);
    set.seed.eps1 = 1.0;
    set.lambda_u = 1.0;
    set.w = vec2(1, 0);
    set.rng_seed = seed;
    std::mt19937_64 eng(seed);
    for (int k = 0; k < count; ++k) {
        Vector x = oracles::random_vector(eng, 2);
        set.points.push_back(x);
        set.values.push_back(eval_basis(spec, x).dot(u0));
        set.stop_times.push_back(0.0);
    }
    return set;
}

SampleSet speed_samples(double eps1 = 0.2, int count = 500, double horizon = 10.0) {
    auto s = fixtures::speed_saddle();
    EllipsoidSeed seed = seed_ellipsoid(s.eq, s.pair, eps1);
    BackwardSamplingConfig cfg;
    cfg.count = count;
    cfg.horizon = horizon;
    cfg.rng_seed = 2024;
    return generate_samples_backward(s.model, s.eq, s.pair, seed, fixtures::unit_box2(), cfg);
}

}  // namespace

TEST_CASE("dictionary sizes and ordering") {
    BasisSpec lin;
    lin.max_degree = 1;
    CHECK(basis_size(lin, 2) == 3);
    Vector at = eval_basis(lin, vec2(2.0, 3.0));
    CHECK(at[0] == 1.0);  // constant first
    CHECK(at[1] == 2.0);  // then x1
    CHECK(at[2] == 3.0);  // then x2

    BasisSpec quad;
    quad.max_degree = 2;
    CHECK(basis_size(quad, 2) == 6);
    Vector q = eval_basis(quad, vec2(2.0, 3.0));
    CHECK(q[3] == 4.0);   // x1^2
    CHECK(q[4] == 6.0);   // x1 x2
    CHECK(q[5] == 9.0);   // x2^2

    BasisSpec power;
    power.kind = BasisSpec::Kind::mixed;
    power.max_degree = 1;
    power.trig_coords = {0, 2};
    power.trig_pairs = {{0, 2}};
    CHECK(basis_size(power, 4) == 1 + 4 + 4 + 2);

    BasisSpec no_const = lin;
    no_const.include_constant = false;
    CHECK(basis_size(no_const, 2) == 2);
}

TEST_CASE("trig dictionary evaluates sin/cos of coordinates and differences") {
    BasisSpec spec;
    spec.kind = BasisSpec::Kind::trigonometric;
    spec.trig_coords = {1};
    spec.trig_pairs = {{0, 1}};
    spec.include_constant = false;
    Vector x = vec2(0.4, 1.3);
    Vector b = eval_basis(spec, x);
    REQUIRE(b.size() == 4);
    CHECK(b[0] == doctest::Approx(std::sin(1.3)).epsilon(1e-15));
    CHECK(b[1] == doctest::Approx(std::cos(1.3)).epsilon(1e-15));
    CHECK(b[2] == doctest::Approx(std::sin(0.4 - 1.3)).epsilon(1e-15));
    CHECK(b[3] == doctest::Approx(std::cos(0.4 - 1.3)).epsilon(1e-15));
}

TEST_CASE("exact synthetic recovery") {
    BasisSpec spec;
    spec.max_degree = 3;
    const int n_basis = basis_size(spec, 2);
    std::mt19937_64 eng(4);
    Vector u0 = oracles::random_vector(eng, n_basis, 2.0);
    SampleSet set = synthetic_samples(spec, u0, 200, 10);
    FittedEigenfunction fe = fit_least_squares(spec, set);
    CHECK((fe.coeffs - u0).norm() <= 1e-10);
    CHECK(fe.diagnostics.rank_g == n_basis);
    CHECK(fe.diagnostics.rms_residual <= 1e-12);
    // eval_fitted reproduces the dictionary combination anywhere.
    Vector probe = vec2(0.37, -0.81);
    CHECK(eval_fitted(fe, probe) == doctest::Approx(eval_basis(spec, probe).dot(u0)).epsilon(1e-12));
}

TEST_CASE("linear system fit recovers the left eigenvector") {
    auto s = fixtures::linear_saddle();
    EllipsoidSeed seed = seed_ellipsoid(s.eq, s.pair, 0.05);
    BackwardSamplingConfig cfg;
    cfg.count = 100;
    cfg.horizon = 6.0;
    cfg.rng_seed = 3;
    SampleSet set = generate_samples_backward(s.model, s.eq, s.pair, seed, fixtures::unit_box2(),
                                              cfg);
    BasisSpec spec;
    spec.max_degree = 1;
    FittedEigenfunction fe = fit_least_squares(spec, set);
    CHECK(std::abs(fe.coeffs[0]) <= 1e-8);
    CHECK(std::abs(fe.coeffs[1] - s.pair.w[0]) <= 1e-8);
    CHECK(std::abs(fe.coeffs[2] - s.pair.w[1]) <= 1e-8);
}

TEST_CASE("degree-5 fit of the benchmark samples") {
    SampleSet set = speed_samples();
    BasisSpec spec;
    spec.max_degree = 5;
    FittedEigenfunction fe = fit_least_squares(spec, set);

    double cmax = 0;
    for (double v : set.values) cmax = std::max(cmax, std::abs(v));

    // Regression bounds from an independent reference computation: the
    // sample values carry an intrinsic scatter from the finite seed size, so
    // the residual floor sits near 6e-3 at every polynomial degree.
    CHECK(fe.diagnostics.rms_residual <= 1e-2);
    CHECK(fe.diagnostics.rms_residual <= 0.25 * cmax);
    CHECK(fe.diagnostics.rank_g == fe.diagnostics.num_basis);

    // The zero level passes through the saddle to within 1e-2 along the
    // transverse direction.
    const Vector& xs = fe.equilibrium;
    double plus = eval_fitted(fe, xs + 1e-2 * set.w);
    double minus = eval_fitted(fe, xs - 1e-2 * set.w);
    CHECK(plus * minus < 0);

    // |phi(x_star)| stays within a few residuals of zero.
    CHECK(std::abs(eval_fitted(fe, xs)) <= 10.0 * fe.diagnostics.rms_residual);

    // Sign split across the boundary near the saddle.
    double right = eval_fitted(fe, vec2(-0.21135 + 0.1, 0));
    double left = eval_fitted(fe, vec2(-0.21135 - 0.1, 0));
    CHECK(right * left < 0);

    // Extrapolation flag.
    CHECK_FALSE(eval_fitted_checked(fe, xs).extrapolated);
    CHECK(eval_fitted_checked(fe, vec2(50, 50)).extrapolated);
}

TEST_CASE("minimum-norm solution on a rank-deficient dictionary") {
    // Points on the diagonal make the x1 and x2 columns identical.
    BasisSpec spec;
    spec.max_degree = 1;
    spec.include_constant = false;
    SampleSet set;
    set.seed.center = Vector::Zero(2);
    set.seed.p = Matrix::Identity(2, 2);
    set.seed.eps1 = 1.0;
    set.w = vec2(1, 0);
    for (int k = 1; k <= 40; ++k) {
        double t = 0.05 * k;
        set.points.push_back(vec2(t, t));
        set.values.push_back(2.0 * t);
        set.stop_times.push_back(0.0);
    }
    FittedEigenfunction fe = fit_least_squares(spec, set);
    CHECK(fe.diagnostics.rank_g == 1);
    // Any (u1, u2) with u1 + u2 = 2 solves exactly; minimum norm is (1, 1).
    CHECK(fe.coeffs[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fe.coeffs[1] == doctest::Approx(1.0).epsilon(1e-10));
    // An alternative exact solution has a larger norm.
    Vector alt = vec2(2.0, 0.0);
    CHECK(fe.coeffs.norm() < alt.norm());
    CHECK(fe.diagnostics.rms_residual <= 1e-12);
}

TEST_CASE("enlarging a nested dictionary never hurts the residual") {
    SampleSet set = speed_samples(0.2, 200, 8.0);
    BasisSpec small;
    small.max_degree = 1;
    BasisSpec big;
    big.max_degree = 3;
    double r_small = fit_least_squares(small, set).diagnostics.rms_residual;
    double r_big = fit_least_squares(big, set).diagnostics.rms_residual;
    CHECK(r_big <= r_small + 1e-12);
}

TEST_CASE("PDE residual does not explode on held-out samples") {
    auto s = fixtures::speed_saddle();
    SampleSet set = speed_samples();
    const int total = set.size();

    std::vector<int> order(total);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 eng(55);
    std::shuffle(order.begin(), order.end(), eng);
    const int train_count = (total * 9) / 10;

    SampleSet train = set;
    train.points.clear();
    train.values.clear();
    train.stop_times.clear();
    for (int i = 0; i < train_count; ++i) {
        train.points.push_back(set.points[order[i]]);
        train.values.push_back(set.values[order[i]]);
        train.stop_times.push_back(set.stop_times[order[i]]);
    }

    BasisSpec spec;
    spec.max_degree = 5;
    FittedEigenfunction fe = fit_least_squares(spec, train);
    auto pde_residual = [&](const Vector& x) {
        Vector grad = oracles::fd_gradient([&](const Vector& y) { return eval_fitted(fe, y); }, x);
        return std::abs(grad.dot(s.model.f(x)) - set.lambda_u * eval_fitted(fe, x));
    };

    double train_mean = 0, held_mean = 0;
    const int probe = 400;
    for (int i = 0; i < probe; ++i) train_mean += pde_residual(set.points[order[i]]);
    for (int i = 0; i < probe; ++i) {
        held_mean += pde_residual(set.points[order[train_count + i]]);
    }
    train_mean /= probe;
    held_mean /= probe;
    CHECK(held_mean <= 5.0 * train_mean);
}

TEST_CASE("convergence study on exact data has zero drift") {
    BasisSpec spec;
    spec.max_degree = 2;
    std::mt19937_64 eng(8);
    Vector u0 = oracles::random_vector(eng, basis_size(spec, 2), 1.0);
    SampleSet set = synthetic_samples(spec, u0, 400, 21);
    auto entries = convergence_study(spec, set, {0.25, 0.5, 1.0});
    REQUIRE(entries.size() == 3);
    for (const auto& e : entries) {
        CHECK(e.drift <= 1e-9);
        CHECK(e.rms <= 1e-10);
    }
}

TEST_CASE("convergence study drift shrinks with more samples") {
    SampleSet set = speed_samples();
    BasisSpec spec;
    spec.max_degree = 5;
    auto entries = convergence_study(spec, set, {0.05, 0.15, 0.4, 1.0});
    REQUIRE(entries.size() == 4);
    CHECK(entries.back().drift == 0.0);
    // Monotone decay with 20% slack.
    for (std::size_t i = 1; i + 1 < entries.size(); ++i) {
        CHECK(entries[i].drift <= 1.2 * entries[i - 1].drift);
    }
}

TEST_CASE("single-fraction study is the trivial reference") {
    BasisSpec spec;
    spec.max_degree = 1;
    SampleSet set = synthetic_samples(spec, vec2(0.5, -1.5).homogeneous(), 50, 33);
    auto entries = convergence_study(spec, set, {1.0});
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].num_samples == 50);
    CHECK(entries[0].drift == 0.0);
}

TEST_CASE("non-finite values are rejected") {
    BasisSpec spec;
    spec.max_degree = 1;
    SampleSet set = synthetic_samples(spec, Vector::Ones(3), 10, 2);
    set.values[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(fit_least_squares(spec, set), FitError);
}

TEST_CASE("fraction validation") {
    BasisSpec spec;
    spec.max_degree = 1;
    SampleSet set = synthetic_samples(spec, Vector::Ones(3), 50, 2);
    CHECK_THROWS_AS(convergence_study(spec, set, {}), ConfigError);
    CHECK_THROWS_AS(convergence_study(spec, set, {0.5, 0.5}), ConfigError);
    CHECK_THROWS_AS(convergence_study(spec, set, {0.5, 1.5}), ConfigError);
}
