#include "ksep/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ksep {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
// b5 - b4, for the embedded error estimate.
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;

constexpr long kMaxSteps = 10'000'000;

using Rhs = std::function<Vector(double, const Vector&)>;

struct StepOut {
    Vector y_new;
    Vector k_last;  // f(t+h, y_new), the FSAL stage
    double err = 0.0;
};

StepOut rk_step(const Rhs& rhs, double t, const Vector& y, const Vector& k1, double h,
                double rel_tol, double abs_tol) {
    StepOut out;
    Vector k2 = rhs(t + kC[1] * h, y + h * (kA21 * k1));
    Vector k3 = rhs(t + kC[2] * h, y + h * (kA31 * k1 + kA32 * k2));
    Vector k4 = rhs(t + kC[3] * h, y + h * (kA41 * k1 + kA42 * k2 + kA43 * k3));
    Vector k5 = rhs(t + kC[4] * h, y + h * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4));
    Vector k6 =
        rhs(t + kC[5] * h, y + h * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5));
    out.y_new = y + h * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
    out.k_last = rhs(t + h, out.y_new);
    Vector err_vec =
        h * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * out.k_last);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        double sc = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(out.y_new[i]));
        double q = err_vec[i] / sc;
        acc += q * q;
    }
    out.err = std::sqrt(acc / static_cast<double>(y.size()));
    return out;
}

// Hairer-style initial step size guess.
double initial_step(const Rhs& rhs, const Vector& y0, const Vector& f0, double rel_tol,
                    double abs_tol, double h_cap) {
    double d0 = 0.0, d1 = 0.0;
    for (Eigen::Index i = 0; i < y0.size(); ++i) {
        double sc = abs_tol + rel_tol * std::abs(y0[i]);
        d0 += (y0[i] / sc) * (y0[i] / sc);
        d1 += (f0[i] / sc) * (f0[i] / sc);
    }
    d0 = std::sqrt(d0 / y0.size());
    d1 = std::sqrt(d1 / y0.size());
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, h_cap);
    Vector y1 = y0 + h0 * f0;
    Vector f1 = rhs(h0, y1);
    if (!f1.allFinite()) return h0 * 1e-3;
    double d2 = 0.0;
    for (Eigen::Index i = 0; i < y0.size(); ++i) {
        double sc = abs_tol + rel_tol * std::abs(y0[i]);
        double q = (f1[i] - f0[i]) / sc;
        d2 += q * q;
    }
    d2 = std::sqrt(d2 / y0.size()) / h0;
    double m = std::max(d1, d2);
    double h1 = (m <= 1e-15) ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 0.2);
    return std::min({100.0 * h0, h1, h_cap});
}

struct EventState {
    const EventSpec* spec = nullptr;
    double g_prev = 0.0;

    bool region() const {
        return spec->kind == EventSpec::Kind::ellipsoid_entry ||
               spec->kind == EventSpec::Kind::domain_exit;
    }
    bool fired(double g_prev_v, double g_new) const {
        if (region()) return g_new <= 0.0;
        return (g_prev_v > 0.0 && g_new <= 0.0) || (g_prev_v < 0.0 && g_new >= 0.0);
    }
};

}  // namespace

EventSpec EventSpec::zero_crossing(std::function<double(const Vector&)> g) {
    EventSpec e;
    e.kind = Kind::scalar_zero_crossing;
    e.observable = std::move(g);
    return e;
}

EventSpec EventSpec::enter_ellipsoid(EllipsoidSeed seed) {
    EventSpec e;
    e.kind = Kind::ellipsoid_entry;
    e.ellipsoid = std::move(seed);
    return e;
}

EventSpec EventSpec::exit_box(DomainBox box) {
    EventSpec e;
    e.kind = Kind::domain_exit;
    e.box = std::move(box);
    return e;
}

double EventSpec::eval(const Vector& x) const {
    switch (kind) {
        case Kind::scalar_zero_crossing:
            return observable(x);
        case Kind::ellipsoid_entry:
            return ellipsoid->quadratic_form(x) - ellipsoid->eps1;
        case Kind::domain_exit:
            return box->margin(x);
    }
    return 0.0;
}

namespace {

struct CoreResult {
    Trajectory traj;
    std::vector<double> quad;  // filled when the quadrature channel is active
};

CoreResult integrate_core(const SystemModel& model, const Vector& x0, Direction direction,
                          const IntegratorConfig& cfg, const QuadIntegrand* integrand,
                          const std::optional<EventSpec>& event) {
    if (cfg.rel_tol <= 0 || cfg.abs_tol <= 0 || cfg.event_tol <= 0) {
        throw ConfigError("integrator tolerances must be positive");
    }
    if (cfg.t_max <= 0) throw ConfigError("integrator t_max must be positive");
    if (cfg.max_step < 0) throw ConfigError("integrator max_step must be nonnegative");
    if (!x0.allFinite()) throw ConfigError("initial state must be finite");

    const int n = static_cast<int>(x0.size());
    const bool with_quad = integrand != nullptr;
    const int m = with_quad ? n + 1 : n;
    const double sign = (direction == Direction::forward) ? 1.0 : -1.0;

    Rhs rhs = [&](double t, const Vector& y) -> Vector {
        Vector dy(m);
        dy.head(n) = sign * model.f(y.head(n));
        if (with_quad) dy[n] = (*integrand)(t, y.head(n));
        return dy;
    };

    CoreResult out;
    Trajectory& traj = out.traj;
    auto record = [&](double t, const Vector& y) {
        traj.times.push_back(t);
        traj.states.push_back(y.head(n));
        if (with_quad) out.quad.push_back(y[n]);
    };

    Vector y(m);
    y.head(n) = x0;
    if (with_quad) y[n] = 0.0;

    EventState ev;
    if (event) {
        ev.spec = &*event;
        ev.g_prev = ev.spec->eval(x0);
        if (ev.region() && ev.g_prev <= 0.0) {
            record(0.0, y);
            traj.terminated_by = (ev.spec->kind == EventSpec::Kind::domain_exit)
                                     ? Termination::domain_exit
                                     : Termination::event;
            return out;
        }
    }

    Vector k1 = rhs(0.0, y);
    if (!k1.allFinite()) {
        record(0.0, y);
        traj.terminated_by = Termination::numerical_failure;
        return out;
    }
    record(0.0, y);

    const double h_cap = (cfg.max_step > 0) ? std::min(cfg.max_step, cfg.t_max) : cfg.t_max;
    double h = initial_step(rhs, y, k1, cfg.rel_tol, cfg.abs_tol, h_cap);
    double t = 0.0;
    double err_prev = 1e-4;
    bool previous_rejected = false;

    for (long step = 0; step < kMaxSteps; ++step) {
        if (t >= cfg.t_max) break;
        h = std::min(h, cfg.t_max - t);
        if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, t)) {
            traj.terminated_by = Termination::numerical_failure;
            return out;
        }

        StepOut s = rk_step(rhs, t, y, k1, h, cfg.rel_tol, cfg.abs_tol);
        if (!s.y_new.allFinite() || !std::isfinite(s.err)) {
            h *= 0.25;
            previous_rejected = true;
            continue;
        }

        if (s.err > 1.0) {
            double fac = std::max(0.2, 0.9 * std::pow(s.err, -0.2));
            h *= fac;
            previous_rejected = true;
            continue;
        }

        // Accepted.
        double t_new = t + h;
        if (event) {
            double g_new = ev.spec->eval(s.y_new.head(n));
            if (ev.fired(ev.g_prev, g_new)) {
                // Bisect in time inside [t, t_new]; each trial is one RK step
                // of the trial size from the bracket start.
                double lo = 0.0, hi = h;
                Vector y_hi = s.y_new;
                for (int it = 0; it < 200 && (hi - lo) > cfg.event_tol; ++it) {
                    double mid = 0.5 * (lo + hi);
                    StepOut trial = rk_step(rhs, t, y, k1, mid, cfg.rel_tol, cfg.abs_tol);
                    double g_mid = ev.spec->eval(trial.y_new.head(n));
                    if (ev.fired(ev.g_prev, g_mid)) {
                        hi = mid;
                        y_hi = trial.y_new;
                    } else {
                        lo = mid;
                    }
                }
                record(t + hi, y_hi);
                traj.terminated_by = (ev.spec->kind == EventSpec::Kind::domain_exit)
                                         ? Termination::domain_exit
                                         : Termination::event;
                return out;
            }
            ev.g_prev = g_new;
        }

        t = t_new;
        y = s.y_new;
        k1 = s.k_last;  // FSAL
        record(t, y);

        // PI step-size controller.
        double err = std::max(s.err, 1e-10);
        double fac = 0.9 * std::pow(err, -0.17) * std::pow(err_prev, 0.04);
        fac = std::min(previous_rejected ? 1.0 : 5.0, std::max(0.2, fac));
        h = std::min(h * fac, h_cap);
        err_prev = err;
        previous_rejected = false;
    }

    traj.terminated_by = Termination::t_max_reached;
    return out;
}

}  // namespace

Trajectory integrate(const SystemModel& model, const Vector& x0, Direction direction,
                     const IntegratorConfig& cfg, const std::optional<EventSpec>& event) {
    return integrate_core(model, x0, direction, cfg, nullptr, event).traj;
}

Vector flow(const SystemModel& model, const Vector& x0, double t, IntegratorConfig cfg) {
    if (t == 0.0) return x0;
    cfg.t_max = std::abs(t);
    Direction dir = (t > 0) ? Direction::forward : Direction::backward;
    Trajectory traj = integrate_core(model, x0, dir, cfg, nullptr, {}).traj;
    if (traj.terminated_by == Termination::numerical_failure) {
        throw NumericalDomainError("flow failed before reaching t");
    }
    return traj.back();
}

QuadTrajectory integrate_with_quadrature(const SystemModel& model, const Vector& x0,
                                         Direction direction, const IntegratorConfig& cfg,
                                         const QuadIntegrand& integrand,
                                         const std::optional<EventSpec>& event) {
    CoreResult core = integrate_core(model, x0, direction, cfg, &integrand, event);
    return QuadTrajectory{std::move(core.traj), std::move(core.quad)};
}

}  // namespace ksep
