#pragma once

#include "ksep/equilibria.hpp"
#include "ksep/koopman.hpp"
#include "ksep/sysmodel.hpp"

namespace fixtures {

using namespace ksep;

struct SaddleSetup {
    SystemModel model;
    EquilibriumPoint eq;
    UnstableEigenpair pair;
};

inline Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

inline SaddleSetup speed_saddle() {
    SaddleSetup s;
    s.model = builtin_system("speed_control");
    NewtonOptions newton;
    // Polish from the reported location.
    Vector x = vec2(-0.21135, 0.0);
    for (int i = 0; i < 20; ++i) {
        x -= Eigen::PartialPivLU<Matrix>(eval_jacobian(s.model, x)).solve(s.model.f(x));
    }
    s.eq = make_equilibrium(s.model, x);
    s.pair = unstable_left_eigenpair(s.eq);
    return s;
}

// A linear 2-D saddle with distinct dynamics along each axis-mixing mode.
inline SaddleSetup linear_saddle() {
    SaddleSetup s;
    Matrix a(2, 2);
    a << 0.4, 0.1, 0.05, -1.0;
    s.model = linear_system(a);
    s.eq = make_equilibrium(s.model, vec2(0, 0));
    s.pair = unstable_left_eigenpair(s.eq);
    return s;
}

inline DomainBox unit_box2() { return DomainBox(vec2(-1, -1), vec2(1, 1)); }

}  // namespace fixtures
