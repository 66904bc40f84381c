#include <doctest.h>

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "fixtures.hpp"
#include "ksep/boundary.hpp"
#include "ksep/equilibria.hpp"
#include "ksep/fit.hpp"
#include "ksep/koopman.hpp"
#include "ksep/parallel.hpp"

using namespace ksep;

namespace {

bool bitwise_equal(const Vector& a, const Vector& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("for_index covers every index exactly once under both policies") {
    for (Exec exec : {Exec::serial, Exec::openmp}) {
        std::vector<int> hits(1000, 0);
        for_index(exec, 1000, [&](std::ptrdiff_t i) { hits[i] += 1; });
        for (int h : hits) CHECK(h == 1);
    }
}

TEST_CASE("for_index rethrows the lowest-index exception") {
    for (Exec exec : {Exec::serial, Exec::openmp}) {
        try {
            for_index(exec, 64, [&](std::ptrdiff_t i) {
                if (i % 7 == 3) throw std::runtime_error("boom at " + std::to_string(i));
            });
            FAIL("expected an exception");
        } catch (const std::runtime_error& e) {
            if (exec == Exec::serial) {
                CHECK(std::string(e.what()) == "boom at 3");
            } else {
                CHECK(std::string(e.what()).rfind("boom at", 0) == 0);
            }
        }
    }
}

TEST_CASE("equilibria search is bitwise identical across policies") {
    SystemModel m = builtin_system("two_gen_power");
    Vector lo(4), hi(4);
    lo << -3.6, -0.5, -3.6, -0.5;
    hi << 3.6, 0.5, 3.6, 0.5;
    DomainBox box(lo, hi);
    auto serial = find_equilibria(m, box, 5, NewtonOptions{}, Exec::serial);
    auto openmp = find_equilibria(m, box, 5, NewtonOptions{}, Exec::openmp);
    REQUIRE(serial.size() == openmp.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(bitwise_equal(serial[i].x_star, openmp[i].x_star));
        CHECK(serial[i].classification == openmp[i].classification);
    }
}

TEST_CASE("backward sampling is bitwise identical across policies") {
    auto s = fixtures::speed_saddle();
    EllipsoidSeed seed = seed_ellipsoid(s.eq, s.pair, 0.2);
    BackwardSamplingConfig cfg;
    cfg.count = 60;
    cfg.horizon = 6.0;
    cfg.rng_seed = 21;
    DomainBox box = fixtures::unit_box2();
    SampleSet a = generate_samples_backward(s.model, s.eq, s.pair, seed, box, cfg, Exec::serial);
    SampleSet b = generate_samples_backward(s.model, s.eq, s.pair, seed, box, cfg, Exec::openmp);
    REQUIRE(a.size() == b.size());
    for (int k = 0; k < a.size(); ++k) {
        CHECK(bitwise_equal(a.points[k], b.points[k]));
        CHECK(std::memcmp(&a.values[k], &b.values[k], sizeof(double)) == 0);
        CHECK(std::memcmp(&a.stop_times[k], &b.stop_times[k], sizeof(double)) == 0);
    }
}

TEST_CASE("least-squares fit is bitwise identical across policies") {
    auto s = fixtures::speed_saddle();
    EllipsoidSeed seed = seed_ellipsoid(s.eq, s.pair, 0.2);
    BackwardSamplingConfig cfg;
    cfg.count = 80;
    cfg.horizon = 6.0;
    cfg.rng_seed = 4;
    SampleSet set = generate_samples_backward(s.model, s.eq, s.pair, seed, fixtures::unit_box2(),
                                              cfg);
    BasisSpec spec;
    spec.max_degree = 4;
    FittedEigenfunction a = fit_least_squares(spec, set, Exec::serial);
    FittedEigenfunction b = fit_least_squares(spec, set, Exec::openmp);
    CHECK(bitwise_equal(a.coeffs, b.coeffs));
    CHECK(a.diagnostics.rms_residual == b.diagnostics.rms_residual);
}

TEST_CASE("contour extraction is bitwise identical across policies") {
    auto s = fixtures::speed_saddle();
    EllipsoidSeed seed = seed_ellipsoid(s.eq, s.pair, 0.2);
    BackwardSamplingConfig cfg;
    cfg.count = 80;
    cfg.horizon = 6.0;
    cfg.rng_seed = 4;
    SampleSet set = generate_samples_backward(s.model, s.eq, s.pair, seed, fixtures::unit_box2(),
                                              cfg);
    BasisSpec spec;
    spec.max_degree = 3;
    FittedEigenfunction fe = fit_least_squares(spec, set);
    auto a = grid_contour_2d(fe, fixtures::unit_box2(), 101, {}, Exec::serial);
    auto b = grid_contour_2d(fe, fixtures::unit_box2(), 101, {}, Exec::openmp);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(bitwise_equal(a[i].a, b[i].a));
        CHECK(bitwise_equal(a[i].b, b[i].b));
    }
}
