#include "ksep/koopman.hpp"

#include <cmath>

#include "ksep/rng.hpp"

namespace ksep {

Vector nonlinear_residual(const SystemModel& model, const EquilibriumPoint& eq, const Vector& z) {
    return eval_vector_field(model, eq.x_star + z) - eq.jacobian * z;
}

namespace {

// Integrand-side variant: non-finite values propagate into the step error so
// the solver rejects the step instead of unwinding through the parallel loop.
Vector raw_nonlinear_residual(const SystemModel& model, const EquilibriumPoint& eq,
                              const Vector& z) {
    return model.f(eq.x_star + z) - eq.jacobian * z;
}

}  // namespace

EllipsoidSeed seed_ellipsoid(const EquilibriumPoint& eq, const UnstableEigenpair& pair,
                             double eps1, double aspect) {
    if (eps1 <= 0) throw ConfigError("eps1 must be positive");
    if (aspect < 1) throw ConfigError("aspect must be >= 1");
    const int n = static_cast<int>(pair.w.size());
    Vector w_hat = pair.w.normalized();
    Matrix proj = w_hat * w_hat.transpose();
    EllipsoidSeed seed;
    seed.center = eq.x_star;
    seed.p = aspect * proj + (Matrix::Identity(n, n) - proj);
    seed.eps1 = eps1;
    return seed;
}

std::vector<Vector> sample_seed(const EllipsoidSeed& seed, int count, std::uint64_t rng_seed) {
    if (count < 1) throw ConfigError("sample count must be >= 1");
    const int n = static_cast<int>(seed.center.size());
    Eigen::LLT<Matrix> llt(seed.p / seed.eps1);
    if (llt.info() != Eigen::Success) {
        throw ConfigError("seed ellipsoid matrix is not positive definite");
    }
    Matrix l = llt.matrixL();
    Rng rng(rng_seed);
    std::vector<Vector> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        Vector g(n);
        for (int i = 0; i < n; ++i) g[i] = rng.normal();
        double r = std::pow(rng.uniform_open(), 1.0 / n);
        Vector y = (r / g.norm()) * g;
        // z solves L' z = y, so z' (P/eps1) z = y'y <= 1.
        Vector z = l.transpose().triangularView<Eigen::Upper>().solve(y);
        out.push_back(seed.center + z);
    }
    return out;
}

PathIntegralResult eigenfunction_forward(const SystemModel& model, const EquilibriumPoint& eq,
                                         const UnstableEigenpair& pair, const EllipsoidSeed& seed,
                                         const Vector& x, const IntegratorConfig& cfg) {
    PathIntegralResult res;
    Vector z0 = x - eq.x_star;
    res.linear_part = pair.w.dot(z0);

    if (seed.contains(x)) {
        res.integral_part = 0.0;
        res.value = res.linear_part;
        res.t_of_x = 0.0;
        res.converged = true;
        return res;
    }

    const double lambda = pair.lambda_u;
    QuadIntegrand integrand = [&](double t, const Vector& y) {
        return std::exp(-lambda * t) * pair.w.dot(raw_nonlinear_residual(model, eq, y - eq.x_star));
    };
    QuadTrajectory qt = integrate_with_quadrature(model, x, Direction::forward, cfg, integrand,
                                                  EventSpec::enter_ellipsoid(seed));
    if (qt.trajectory.terminated_by == Termination::numerical_failure) {
        throw PathIntegralError("integration failed before reaching the stopping region");
    }
    res.integral_part = qt.quad.back();
    res.value = res.linear_part + res.integral_part;
    res.t_of_x = qt.trajectory.times.back();
    res.converged = qt.trajectory.terminated_by == Termination::event;
    return res;
}

SampleSet generate_samples_backward(const SystemModel& model, const EquilibriumPoint& eq,
                                    const UnstableEigenpair& pair, const EllipsoidSeed& seed,
                                    const DomainBox& box, const BackwardSamplingConfig& cfg,
                                    Exec exec) {
    if (cfg.horizon <= 0) throw ConfigError("backward horizon must be positive");
    if (cfg.stride < 1) throw ConfigError("stride must be >= 1");
    if (pair.lambda_u * cfg.horizon > 30.0) {
        throw ConfigError("lambda*T > 30: the exp(lambda*u) quadrature weight would overflow; "
                          "shrink the backward horizon or rescale the system");
    }

    std::vector<Vector> seeds = sample_seed(seed, cfg.count, cfg.rng_seed);

    IntegratorConfig icfg = cfg.integrator;
    icfg.t_max = cfg.horizon;
    const double lambda = pair.lambda_u;

    struct PerSeed {
        std::vector<Vector> points;
        std::vector<double> values;
        std::vector<double> stop_times;
    };
    std::vector<PerSeed> partial(seeds.size());

    for_index(exec, static_cast<std::ptrdiff_t>(seeds.size()), [&](std::ptrdiff_t s) {
        QuadIntegrand integrand = [&](double u, const Vector& y) {
            return std::exp(lambda * u) *
                   pair.w.dot(raw_nonlinear_residual(model, eq, y - eq.x_star));
        };
        QuadTrajectory qt = integrate_with_quadrature(model, seeds[s], Direction::backward, icfg,
                                                      integrand, EventSpec::exit_box(box));
        PerSeed& mine = partial[s];
        for (int k = 0; k < qt.trajectory.size(); k += cfg.stride) {
            const Vector& y = qt.trajectory.states[k];
            if (!box.contains(y)) continue;
            const double sigma = qt.trajectory.times[k];
            const double value = pair.w.dot(y - eq.x_star) + std::exp(-lambda * sigma) * qt.quad[k];
            if (!std::isfinite(value)) continue;
            mine.points.push_back(y);
            mine.values.push_back(value);
            mine.stop_times.push_back(sigma);
        }
    });

    SampleSet set;
    set.seed = seed;
    set.lambda_u = pair.lambda_u;
    set.w = pair.w;
    set.rng_seed = cfg.rng_seed;
    for (const auto& p : partial) {
        set.points.insert(set.points.end(), p.points.begin(), p.points.end());
        set.values.insert(set.values.end(), p.values.begin(), p.values.end());
        set.stop_times.insert(set.stop_times.end(), p.stop_times.begin(), p.stop_times.end());
    }
    if (set.points.empty()) {
        throw EmptySampleSetError("no backward samples landed inside the domain box");
    }
    return set;
}

}  // namespace ksep
