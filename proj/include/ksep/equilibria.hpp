#pragma once

#include <string>
#include <vector>

#include "ksep/integrate.hpp"
#include "ksep/parallel.hpp"
#include "ksep/sysmodel.hpp"
#include "ksep/types.hpp"

namespace ksep {

enum class EqClass { stable, type_one, source, other_unstable };

std::string to_string(EqClass c);
EqClass eq_class_from_string(const std::string& s);

struct EquilibriumPoint {
    Vector x_star;
    Matrix jacobian;
    Eigen::VectorXcd eigenvalues;
    EqClass classification = EqClass::stable;
    double residual = 0.0;  // ||f(x_star)||
};

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 50;
};

/// Classifies x_star by the eigenvalue real parts of the Jacobian there.
/// Throws HyperbolicityError when some |Re(lambda)| <= hyperbolicity_tol.
EquilibriumPoint make_equilibrium(const SystemModel& model, const Vector& x_star,
                                  double hyperbolicity_tol = 1e-6);

/// Newton iteration from every node of a grid_per_dim^n lattice over the box.
/// Converged roots are kept if they land inside the box inflated by 10% per
/// side, deduplicated at distance 1e-6*diam(box), polished with one extra
/// Newton step, and classified. Non-hyperbolic roots and seeds with singular
/// Jacobians are discarded. Deterministic under any Exec (roots are sorted
/// lexicographically before dedup).
std::vector<EquilibriumPoint> find_equilibria(const SystemModel& model, const DomainBox& box,
                                              int grid_per_dim, const NewtonOptions& newton = {},
                                              Exec exec = Exec::openmp);

struct UnstableEigenpair {
    double lambda_u = 0.0;      // the unique eigenvalue with positive real part
    Vector w;                   // unit left eigenvector, largest-|component| positive
    double lambda_stable_min = 0.0;  // smallest |Re| among the stable eigenvalues
};

/// Left eigenpair of the unstable eigenvalue of a type-one equilibrium.
/// Throws NotTypeOneError / UnsupportedSpectrumError.
UnstableEigenpair unstable_left_eigenpair(const EquilibriumPoint& eq);

/// Unit right eigenvector of the unstable eigenvalue (shooting direction).
Vector unstable_right_eigenvector(const EquilibriumPoint& eq);

enum class BoundaryVerdict { on_boundary, not_on_boundary, undecided };

std::string to_string(BoundaryVerdict v);

struct ShootingConfig {
    double offset = 1e-4;
    double t_max = 200.0;
    double capture_radius = 1e-2;
    IntegratorConfig integrator{};  // t_max is taken from this struct's t_max
};

/// Tests Theorem-style boundary membership by shooting from both sides of the
/// unstable eigenvector and following the flow until capture by sep, capture
/// by one of other_attractors, or timeout.
BoundaryVerdict on_stability_boundary(const SystemModel& model, const EquilibriumPoint& uep,
                                      const EquilibriumPoint& sep, const ShootingConfig& cfg,
                                      const std::vector<Vector>& other_attractors = {});

}  // namespace ksep
