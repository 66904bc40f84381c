#pragma once

#include <cstdint>
#include <vector>

#include "ksep/equilibria.hpp"
#include "ksep/integrate.hpp"
#include "ksep/parallel.hpp"
#include "ksep/sysmodel.hpp"
#include "ksep/types.hpp"

namespace ksep {

/// Points of the backward-reachable set paired with path-integral
/// eigenfunction values. stop_times[k] is the backward time at which
/// points[k] was emitted.
struct SampleSet {
    std::vector<Vector> points;
    std::vector<double> values;
    std::vector<double> stop_times;
    EllipsoidSeed seed;
    double lambda_u = 0.0;
    Vector w;
    std::uint64_t rng_seed = 0;

    int size() const { return static_cast<int>(points.size()); }
};

struct PathIntegralResult {
    double value = 0.0;          // linear_part + integral_part, exactly
    double linear_part = 0.0;    // w'(x - x_star)
    double integral_part = 0.0;
    double t_of_x = 0.0;         // forward time to the stopping region
    bool converged = false;      // entered the seed ellipsoid before t_max
};

/// F_n(z) = f(x_star + z) - A z, the vector field minus its linearization at
/// the equilibrium (equilibrium shifted to the origin).
Vector nonlinear_residual(const SystemModel& model, const EquilibriumPoint& eq, const Vector& z);

/// P = aspect * w w' + (I - w w'): n-1 unit eigenvectors span {z : w'z = 0},
/// one eigenvector along w, so the ellipsoid is thinner along the unstable
/// left eigenvector by sqrt(aspect).
EllipsoidSeed seed_ellipsoid(const EquilibriumPoint& eq, const UnstableEigenpair& pair,
                             double eps1, double aspect = 100.0);

/// count points uniform in the ellipsoid, deterministic given rng_seed.
std::vector<Vector> sample_seed(const EllipsoidSeed& seed, int count, std::uint64_t rng_seed);

/// Path-integral value at x: integrate forward with quadrature integrand
/// exp(-lambda*t) w'F_n until first entry into the seed ellipsoid (or t_max).
PathIntegralResult eigenfunction_forward(const SystemModel& model, const EquilibriumPoint& eq,
                                         const UnstableEigenpair& pair, const EllipsoidSeed& seed,
                                         const Vector& x, const IntegratorConfig& cfg);

struct BackwardSamplingConfig {
    int count = 500;          // seed points
    double horizon = 10.0;    // backward time T
    int stride = 1;           // emit every stride-th accepted step
    std::uint64_t rng_seed = 0;
    IntegratorConfig integrator{};  // t_max is taken from horizon
};

/// Backward-propagates seed points over [0, T], accumulating
/// J(s) = int_0^s exp(lambda*u) w'F_n(y(u)) du, and emits samples with value
/// w'(y - x_star) + exp(-lambda*s) J(s); substituting u = s - tau in the
/// forward path integral shows this equals the forward formula stopped at the
/// seed point. Trajectories stop early on leaving the box; samples outside
/// the box are skipped. Requires lambda_u * horizon <= 30 so the exp(lambda*u)
/// weight stays well-scaled. Output order is by seed index, so any Exec gives
/// identical results.
SampleSet generate_samples_backward(const SystemModel& model, const EquilibriumPoint& eq,
                                    const UnstableEigenpair& pair, const EllipsoidSeed& seed,
                                    const DomainBox& box, const BackwardSamplingConfig& cfg,
                                    Exec exec = Exec::openmp);

}  // namespace ksep
