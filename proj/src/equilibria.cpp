#include "ksep/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "ksep/boundary.hpp"

namespace ksep {

std::string to_string(EqClass c) {
    switch (c) {
        case EqClass::stable: return "stable";
        case EqClass::type_one: return "type_one";
        case EqClass::source: return "source";
        case EqClass::other_unstable: return "other_unstable";
    }
    return "?";
}

EqClass eq_class_from_string(const std::string& s) {
    if (s == "stable") return EqClass::stable;
    if (s == "type_one") return EqClass::type_one;
    if (s == "source") return EqClass::source;
    if (s == "other_unstable") return EqClass::other_unstable;
    throw ConfigError("unknown equilibrium class '" + s + "'");
}

std::string to_string(BoundaryVerdict v) {
    switch (v) {
        case BoundaryVerdict::on_boundary: return "on_boundary";
        case BoundaryVerdict::not_on_boundary: return "not_on_boundary";
        case BoundaryVerdict::undecided: return "undecided";
    }
    return "?";
}

EquilibriumPoint make_equilibrium(const SystemModel& model, const Vector& x_star,
                                  double hyperbolicity_tol) {
    EquilibriumPoint eq;
    eq.x_star = x_star;
    eq.residual = eval_vector_field(model, x_star).norm();
    eq.jacobian = eval_jacobian(model, x_star);
    Eigen::EigenSolver<Matrix> es(eq.jacobian);
    if (es.info() != Eigen::Success) {
        throw HyperbolicityError("eigenvalue computation failed at candidate equilibrium");
    }
    eq.eigenvalues = es.eigenvalues();

    int positive = 0;
    double min_abs_re = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < eq.eigenvalues.size(); ++i) {
        double re = eq.eigenvalues[i].real();
        min_abs_re = std::min(min_abs_re, std::abs(re));
        if (re > 0) ++positive;
    }
    if (min_abs_re <= hyperbolicity_tol) {
        throw HyperbolicityError("equilibrium is not hyperbolic (|Re(lambda)| <= tol)");
    }
    const int n = model.dim;
    if (positive == 0) {
        eq.classification = EqClass::stable;
    } else if (positive == 1) {
        eq.classification = EqClass::type_one;
    } else if (positive == n) {
        eq.classification = EqClass::source;
    } else {
        eq.classification = EqClass::other_unstable;
    }
    return eq;
}

namespace {

std::optional<Vector> newton_from(const SystemModel& model, Vector x, const NewtonOptions& opt,
                                  double escape_norm) {
    for (int it = 0; it < opt.max_iter; ++it) {
        Vector fx;
        try {
            fx = model.f(x);
        } catch (...) {
            return std::nullopt;
        }
        if (!fx.allFinite()) return std::nullopt;
        if (fx.norm() < opt.tol) return x;
        Matrix j;
        try {
            j = eval_jacobian(model, x);
        } catch (const Error&) {
            return std::nullopt;
        }
        Eigen::PartialPivLU<Matrix> lu(j);
        Vector dx = lu.solve(fx);
        if (!dx.allFinite()) return std::nullopt;
        x -= dx;
        if (!x.allFinite() || x.norm() > escape_norm) return std::nullopt;
    }
    Vector fx;
    try {
        fx = model.f(x);
    } catch (...) {
        return std::nullopt;
    }
    if (fx.allFinite() && fx.norm() < opt.tol) return x;
    return std::nullopt;
}

}  // namespace

std::vector<EquilibriumPoint> find_equilibria(const SystemModel& model, const DomainBox& box,
                                              int grid_per_dim, const NewtonOptions& newton,
                                              Exec exec) {
    if (grid_per_dim < 2) throw ConfigError("grid_per_dim must be >= 2");
    if (box.dim() != model.dim) throw ConfigError("box dimension does not match the model");

    const int n = model.dim;
    long total = 1;
    for (int i = 0; i < n; ++i) total *= grid_per_dim;

    // Roots a bit outside the seeded box are kept: grid search near the box
    // boundary routinely converges just across it.
    const DomainBox accept = box.inflated(0.1);
    const double escape_norm = 1e6 * (1.0 + box.upper.norm() + box.lower.norm());

    std::vector<std::optional<Vector>> roots(total);
    for_index(exec, total, [&](std::ptrdiff_t s) {
        Vector seed(n);
        long rem = s;
        for (int i = 0; i < n; ++i) {
            int gi = static_cast<int>(rem % grid_per_dim);
            rem /= grid_per_dim;
            seed[i] = box.lower[i] +
                      (box.upper[i] - box.lower[i]) * gi / static_cast<double>(grid_per_dim - 1);
        }
        auto root = newton_from(model, seed, newton, escape_norm);
        if (root && accept.contains(*root)) roots[s] = std::move(root);
    });

    std::vector<Vector> found;
    for (auto& r : roots) {
        if (r) found.push_back(std::move(*r));
    }
    std::sort(found.begin(), found.end(), [](const Vector& a, const Vector& b) {
        for (Eigen::Index i = 0; i < a.size(); ++i) {
            if (a[i] != b[i]) return a[i] < b[i];
        }
        return false;
    });

    const double dedup = 1e-6 * box.diameter();
    std::vector<Vector> unique;
    for (const auto& r : found) {
        bool dup = false;
        for (const auto& u : unique) {
            if ((r - u).norm() <= dedup) {
                dup = true;
                break;
            }
        }
        if (!dup) unique.push_back(r);
    }

    std::vector<EquilibriumPoint> out;
    for (const auto& r : unique) {
        // Final polishing step before classification.
        Vector x = r;
        try {
            Matrix j = eval_jacobian(model, x);
            Vector dx = Eigen::PartialPivLU<Matrix>(j).solve(model.f(x));
            if (dx.allFinite()) x -= dx;
            out.push_back(make_equilibrium(model, x));
        } catch (const Error&) {
            // Non-hyperbolic or numerically degenerate root: skipped.
        }
    }
    return out;
}

UnstableEigenpair unstable_left_eigenpair(const EquilibriumPoint& eq) {
    if (eq.classification != EqClass::type_one) {
        throw NotTypeOneError("left eigenpair requires a type-one equilibrium");
    }
    UnstableEigenpair pair;
    pair.lambda_stable_min = std::numeric_limits<double>::infinity();
    int unstable_index = -1;
    for (Eigen::Index i = 0; i < eq.eigenvalues.size(); ++i) {
        double re = eq.eigenvalues[i].real();
        if (re > 0) {
            unstable_index = static_cast<int>(i);
        } else {
            pair.lambda_stable_min = std::min(pair.lambda_stable_min, std::abs(re));
        }
    }
    const auto lambda = eq.eigenvalues[unstable_index];
    if (std::abs(lambda.imag()) > 1e-9 * (1.0 + std::abs(lambda.real()))) {
        throw UnsupportedSpectrumError("unstable eigenvalue has a nonzero imaginary part");
    }
    pair.lambda_u = lambda.real();

    // Left eigenvector: w' A = lambda w'  <=>  A' w = lambda w.
    Eigen::EigenSolver<Matrix> es(eq.jacobian.transpose());
    if (es.info() != Eigen::Success) {
        throw UnsupportedSpectrumError("eigenvector computation failed");
    }
    int best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        double d = std::abs(es.eigenvalues()[i] - lambda);
        if (d < best_dist) {
            best_dist = d;
            best = static_cast<int>(i);
        }
    }
    Eigen::VectorXcd wc = es.eigenvectors().col(best);
    if (wc.imag().norm() > 1e-8 * wc.norm()) {
        throw UnsupportedSpectrumError("left eigenvector is not real");
    }
    Vector w = wc.real();
    w.normalize();
    Eigen::Index imax;
    w.cwiseAbs().maxCoeff(&imax);
    if (w[imax] < 0) w = -w;
    pair.w = w;

    double check = (pair.w.transpose() * eq.jacobian - pair.lambda_u * pair.w.transpose()).norm();
    if (check > 1e-8) {
        throw UnsupportedSpectrumError("left eigenpair residual exceeds 1e-8");
    }
    return pair;
}

Vector unstable_right_eigenvector(const EquilibriumPoint& eq) {
    if (eq.classification != EqClass::type_one) {
        throw NotTypeOneError("right eigenvector requires a type-one equilibrium");
    }
    Eigen::EigenSolver<Matrix> es(eq.jacobian);
    int best = -1;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        if (es.eigenvalues()[i].real() > 0) best = static_cast<int>(i);
    }
    Eigen::VectorXcd vc = es.eigenvectors().col(best);
    if (vc.imag().norm() > 1e-8 * vc.norm()) {
        throw UnsupportedSpectrumError("unstable right eigenvector is not real");
    }
    Vector v = vc.real();
    v.normalize();
    Eigen::Index imax;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0) v = -v;
    return v;
}

BoundaryVerdict on_stability_boundary(const SystemModel& model, const EquilibriumPoint& uep,
                                      const EquilibriumPoint& sep, const ShootingConfig& cfg,
                                      const std::vector<Vector>& other_attractors) {
    if (uep.classification != EqClass::type_one) {
        throw NotTypeOneError("boundary test requires a type-one equilibrium");
    }
    if (sep.classification != EqClass::stable) {
        throw ConfigError("boundary test requires a stable target equilibrium");
    }
    Vector v = unstable_right_eigenvector(uep);

    std::vector<Vector> attractors;
    attractors.push_back(sep.x_star);
    for (const auto& a : other_attractors) attractors.push_back(a);

    ClassifyConfig ccfg;
    ccfg.capture_radius = cfg.capture_radius;
    ccfg.t_max = cfg.t_max;
    ccfg.integrator = cfg.integrator;

    bool any_other = false, any_undecided = false;
    for (double side : {+1.0, -1.0}) {
        Vector x0 = uep.x_star + side * cfg.offset * v;
        Classification c = classify_point(model, x0, sep.x_star, attractors, ccfg);
        if (c.kind == Classification::Kind::in_basin) return BoundaryVerdict::on_boundary;
        if (c.kind == Classification::Kind::other_basin) any_other = true;
        if (c.kind == Classification::Kind::undecided) any_undecided = true;
    }
    if (any_undecided || !any_other) return BoundaryVerdict::undecided;
    return BoundaryVerdict::not_on_boundary;
}

}  // namespace ksep
