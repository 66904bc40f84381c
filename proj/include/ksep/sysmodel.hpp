#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ksep/types.hpp"

namespace ksep {

using VectorFieldFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Matrix(const Vector&)>;

/// Autonomous vector field with named parameters. Immutable after
/// construction; safe to evaluate from many threads.
struct SystemModel {
    std::string name;
    int dim = 0;
    std::map<std::string, double> params;
    VectorFieldFn f;
    JacobianFn jacobian;  // empty -> eval_jacobian falls back to finite differences
    DomainBox default_box;

    bool has_analytic_jacobian() const { return static_cast<bool>(jacobian); }
};

/// Evaluates f(x); throws NumericalDomainError on non-finite output.
Vector eval_vector_field(const SystemModel& model, const Vector& x);

/// Analytic Jacobian when provided, else central finite differences with per-
/// coordinate step max(1e-6, 1e-6*|x[i]|).
Matrix eval_jacobian(const SystemModel& model, const Vector& x);

/// Central-difference Jacobian, always; used to validate analytic Jacobians.
Matrix finite_difference_jacobian(const SystemModel& model, const Vector& x);

/// Builtin benchmark systems: toggle_switch, speed_control, two_gen_power,
/// two_gen_power_fault. Overrides replace named parameters; for the power
/// models Pm defaults to the value that makes the stated operating point an
/// equilibrium of the post-fault system.
SystemModel builtin_system(const std::string& name,
                           const std::map<std::string, double>& overrides = {});

std::vector<std::string> builtin_system_names();

/// x' = a x, equilibrium at the origin.
SystemModel linear_system(const Matrix& a);

}  // namespace ksep
