#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ksep/sysmodel.hpp"
#include "ksep/types.hpp"

namespace ksep {

struct IntegratorConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_step = 0.0;   // 0 = no cap beyond the remaining horizon
    double t_max = 0.0;      // integration horizon, must be > 0
    double event_tol = 1e-10;  // event localization window in time
};

enum class Direction { forward, backward };

enum class Termination { t_max_reached, event, domain_exit, numerical_failure };

/// Every accepted solver step, in internal (nonnegative) time. For backward
/// runs states[k] = s_{-times[k]}(x0).
struct Trajectory {
    std::vector<double> times;
    std::vector<Vector> states;
    Termination terminated_by = Termination::t_max_reached;

    int size() const { return static_cast<int>(times.size()); }
    const Vector& back() const { return states.back(); }
};

/// Terminal condition. Region kinds (ellipsoid_entry, domain_exit) fire as
/// soon as the signed observable becomes <= 0, including at t = 0;
/// scalar_zero_crossing fires on the first sign change between accepted steps.
struct EventSpec {
    enum class Kind { scalar_zero_crossing, ellipsoid_entry, domain_exit };

    Kind kind = Kind::scalar_zero_crossing;
    std::function<double(const Vector&)> observable;
    std::optional<EllipsoidSeed> ellipsoid;
    std::optional<DomainBox> box;

    static EventSpec zero_crossing(std::function<double(const Vector&)> g);
    static EventSpec enter_ellipsoid(EllipsoidSeed seed);
    static EventSpec exit_box(DomainBox box);

    /// Signed value driving the event logic.
    double eval(const Vector& x) const;
};

/// Adaptive Dormand-Prince 5(4) with PI step control. Records every accepted
/// step; an event is localized in time to within cfg.event_tol by bisecting
/// the bracketing step (trial states are single RK steps from the bracket
/// start). Backward integration runs y' = -f(y) in positive internal time.
/// Step-size underflow ends the trajectory with numerical_failure rather than
/// throwing.
Trajectory integrate(const SystemModel& model, const Vector& x0, Direction direction,
                     const IntegratorConfig& cfg, const std::optional<EventSpec>& event = {});

/// Endpoint of the flow s_t(x0); negative t flows backward. cfg.t_max is
/// ignored (taken from |t|).
Vector flow(const SystemModel& model, const Vector& x0, double t, IntegratorConfig cfg = {});

using QuadIntegrand = std::function<double(double, const Vector&)>;

struct QuadTrajectory {
    Trajectory trajectory;
    std::vector<double> quad;  // quad[k] = integral of the integrand over [0, times[k]]
};

/// Same solver with the running integral of integrand(t, x(t)) carried as an
/// extra state component, so its error is controlled by the step tolerances.
QuadTrajectory integrate_with_quadrature(const SystemModel& model, const Vector& x0,
                                         Direction direction, const IntegratorConfig& cfg,
                                         const QuadIntegrand& integrand,
                                         const std::optional<EventSpec>& event = {});

}  // namespace ksep
