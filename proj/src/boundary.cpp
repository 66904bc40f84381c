#include "ksep/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ksep {

bool BoundaryEstimate::contains(const Vector& x) const {
    return min_abs_value(x) <= gamma;
}

double BoundaryEstimate::min_abs_value(const Vector& x) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& fe : members) best = std::min(best, std::abs(eval_fitted(fe, x)));
    return best;
}

double auto_gamma(const SampleSet& samples) {
    double smallest_pos = std::numeric_limits<double>::infinity();
    double largest_neg = -std::numeric_limits<double>::infinity();
    for (double v : samples.values) {
        if (v > 0) smallest_pos = std::min(smallest_pos, v);
        if (v < 0) largest_neg = std::max(largest_neg, v);
    }
    if (!std::isfinite(smallest_pos) || !std::isfinite(largest_neg)) {
        throw ConfigError("cannot resolve gamma: the zero level is not bracketed by the values");
    }
    return std::max(smallest_pos, -largest_neg);
}

BoundaryEstimate assemble_boundary(std::vector<FittedEigenfunction> members, double gamma,
                                   Vector sep) {
    if (members.empty()) throw ConfigError("boundary estimate needs at least one member");
    if (!(gamma > 0)) throw ConfigError("gamma must be positive");
    BoundaryEstimate b;
    b.members = std::move(members);
    b.gamma = gamma;
    b.sep = std::move(sep);
    return b;
}

std::vector<Vector> level_set_points(const FittedEigenfunction& fe,
                                     const std::vector<Vector>& candidates, double gamma) {
    if (!(gamma > 0)) throw ConfigError("gamma must be positive");
    std::vector<Vector> out;
    for (const auto& x : candidates) {
        if (std::abs(eval_fitted(fe, x)) <= gamma) out.push_back(x);
    }
    return out;
}

namespace {

struct GridGeom {
    int axis_u, axis_v;
    Vector base;
    double u0, v0, du, dv;

    Vector point(double ui, double vi) const {
        Vector x = base;
        x[axis_u] = u0 + ui * du;
        x[axis_v] = v0 + vi * dv;
        return x;
    }
};

// Crossing point on the edge between nodes (ua,va) and (ub,vb), by linear
// interpolation of the node values.
Vector edge_crossing(const GridGeom& g, double ua, double va, double fa, double ub, double vb,
                     double fb) {
    double t = (fa == fb) ? 0.5 : fa / (fa - fb);
    t = std::clamp(t, 0.0, 1.0);
    return g.point(ua + t * (ub - ua), va + t * (vb - va));
}

}  // namespace

std::vector<ContourSegment> grid_contour_2d(const FittedEigenfunction& fe, const DomainBox& box,
                                            int resolution, const std::optional<PlaneSlice>& slice,
                                            Exec exec) {
    if (resolution < 2) throw ConfigError("contour resolution must be >= 2");
    const int n = box.dim();
    PlaneSlice sl;
    if (slice) {
        sl = *slice;
    } else {
        if (n != 2) throw ConfigError("models with n > 2 need an explicit contour slice");
        sl.axis_u = 0;
        sl.axis_v = 1;
        sl.base = Vector::Zero(2);
    }
    if (sl.axis_u == sl.axis_v || sl.axis_u < 0 || sl.axis_v < 0 || sl.axis_u >= n ||
        sl.axis_v >= n) {
        throw ConfigError("contour slice axes out of range");
    }
    if (sl.base.size() != n) {
        if (n == 2) {
            sl.base = Vector::Zero(2);
        } else {
            throw ConfigError("contour slice base must have the model dimension");
        }
    }

    GridGeom g;
    g.axis_u = sl.axis_u;
    g.axis_v = sl.axis_v;
    g.base = sl.base;
    g.u0 = box.lower[sl.axis_u];
    g.v0 = box.lower[sl.axis_v];
    g.du = (box.upper[sl.axis_u] - g.u0) / (resolution - 1);
    g.dv = (box.upper[sl.axis_v] - g.v0) / (resolution - 1);

    // Node values, rows evaluated in parallel.
    Matrix vals(resolution, resolution);
    for_index(exec, resolution, [&](std::ptrdiff_t j) {
        for (int i = 0; i < resolution; ++i) {
            vals(i, j) = eval_fitted(fe, g.point(i, static_cast<double>(j)));
        }
    });

    auto positive = [](double v) { return v >= 0.0; };

    std::vector<ContourSegment> segments;
    for (int j = 0; j + 1 < resolution; ++j) {
        for (int i = 0; i + 1 < resolution; ++i) {
            const double f00 = vals(i, j), f10 = vals(i + 1, j);
            const double f01 = vals(i, j + 1), f11 = vals(i + 1, j + 1);
            int code = (positive(f00) ? 1 : 0) | (positive(f10) ? 2 : 0) |
                       (positive(f11) ? 4 : 0) | (positive(f01) ? 8 : 0);
            if (code == 0 || code == 15) continue;

            const Vector e_bottom = edge_crossing(g, i, j, f00, i + 1, j, f10);
            const Vector e_right = edge_crossing(g, i + 1, j, f10, i + 1, j + 1, f11);
            const Vector e_top = edge_crossing(g, i, j + 1, f01, i + 1, j + 1, f11);
            const Vector e_left = edge_crossing(g, i, j, f00, i, j + 1, f01);

            auto emit = [&](const Vector& a, const Vector& b) {
                segments.push_back(ContourSegment{a, b});
            };

            switch (code) {
                case 1: case 14: emit(e_left, e_bottom); break;
                case 2: case 13: emit(e_bottom, e_right); break;
                case 3: case 12: emit(e_left, e_right); break;
                case 4: case 11: emit(e_right, e_top); break;
                case 6: case 9:  emit(e_bottom, e_top); break;
                case 7: case 8:  emit(e_left, e_top); break;
                case 5: case 10: {
                    // Saddle cell: split by the sign at the center.
                    double fc = eval_fitted(fe, g.point(i + 0.5, j + 0.5));
                    bool center_pos = positive(fc);
                    if ((code == 5) == center_pos) {
                        emit(e_left, e_top);
                        emit(e_bottom, e_right);
                    } else {
                        emit(e_left, e_bottom);
                        emit(e_right, e_top);
                    }
                    break;
                }
                default: break;
            }
        }
    }
    return segments;
}

std::vector<ContourSegment> filter_segments_near(const std::vector<ContourSegment>& segments,
                                                 const std::vector<Vector>& points, double radius,
                                                 Exec exec) {
    if (!(radius > 0)) throw ConfigError("filter radius must be positive");
    const double r2 = radius * radius;
    std::vector<char> keep(segments.size(), 0);
    for_index(exec, static_cast<std::ptrdiff_t>(segments.size()), [&](std::ptrdiff_t i) {
        Vector mid = 0.5 * (segments[i].a + segments[i].b);
        for (const auto& p : points) {
            if ((mid - p).squaredNorm() <= r2) {
                keep[i] = 1;
                break;
            }
        }
    });
    std::vector<ContourSegment> out;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (keep[i]) out.push_back(segments[i]);
    }
    return out;
}

Classification classify_point(const SystemModel& model, const Vector& x, const Vector& sep,
                              const std::vector<Vector>& attractors, const ClassifyConfig& cfg) {
    int sep_index = -1;
    for (std::size_t i = 0; i < attractors.size(); ++i) {
        if ((attractors[i] - sep).norm() < 1e-12) sep_index = static_cast<int>(i);
    }
    if (sep_index < 0) throw ConfigError("attractors must include the sep");

    auto nearest = [&](const Vector& y) {
        int best = 0;
        double dist = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < attractors.size(); ++i) {
            double d = (y - attractors[i]).norm();
            if (d < dist) {
                dist = d;
                best = static_cast<int>(i);
            }
        }
        return std::pair<int, double>{best, dist};
    };

    auto verdict = [&](const Vector& y) -> std::optional<Classification> {
        auto [idx, dist] = nearest(y);
        if (dist > cfg.capture_radius) return std::nullopt;
        if (idx == sep_index) return Classification{Classification::Kind::in_basin, idx};
        return Classification{Classification::Kind::other_basin, idx};
    };

    if (auto v = verdict(x)) return *v;

    IntegratorConfig icfg = cfg.integrator;
    icfg.t_max = cfg.t_max;
    EventSpec capture = EventSpec::zero_crossing(
        [&](const Vector& y) { return nearest(y).second - cfg.capture_radius; });
    Trajectory traj = integrate(model, x, Direction::forward, icfg, capture);
    if (traj.terminated_by == Termination::event) {
        if (auto v = verdict(traj.back())) return *v;
        // Bisection stopped a hair outside the ball; classify by proximity.
        auto [idx, dist] = nearest(traj.back());
        (void)dist;
        return Classification{idx == sep_index ? Classification::Kind::in_basin
                                               : Classification::Kind::other_basin,
                              idx};
    }
    return Classification{Classification::Kind::undecided, -1};
}

namespace {

double member_value_at(const SystemModel& model, const BoundaryEstimate& boundary, int member,
                       const Vector& from, double dt, const IntegratorConfig& icfg) {
    Vector y = (dt > 0) ? flow(model, from, dt, icfg) : from;
    return eval_fitted(boundary.members[member], y);
}

}  // namespace

CctResult estimate_cct(const SystemModel& fault_model, const BoundaryEstimate& boundary,
                       const Vector& x0, const CctConfig& cfg) {
    if (boundary.members.empty()) throw ConfigError("boundary estimate has no members");

    IntegratorConfig icfg = cfg.integrator;
    icfg.t_max = cfg.t_max;
    CctResult res;
    res.trajectory = integrate(fault_model, x0, Direction::forward, icfg);
    if (res.trajectory.terminated_by == Termination::numerical_failure) {
        throw PathIntegralError("on-fault trajectory failed numerically");
    }

    const int n_members = static_cast<int>(boundary.members.size());
    const int n_steps = res.trajectory.size();
    std::vector<double> prev(n_members);
    for (int m = 0; m < n_members; ++m) {
        prev[m] = eval_fitted(boundary.members[m], res.trajectory.states[0]);
    }

    auto refine = [&](int k, int m, double sign_lo) {
        // Bisection inside the bracketing step; trial states re-integrate
        // from the bracket start.
        const Vector& y_lo = res.trajectory.states[k - 1];
        const double span = res.trajectory.times[k] - res.trajectory.times[k - 1];
        double lo = 0.0, hi = span;
        for (int it = 0; it < 200 && (hi - lo) > cfg.event_tol; ++it) {
            double mid = 0.5 * (lo + hi);
            double v = member_value_at(fault_model, boundary, m, y_lo, mid, icfg);
            bool crossed = (sign_lo > 0 && v <= 0) || (sign_lo < 0 && v >= 0);
            if (crossed) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return res.trajectory.times[k - 1] + 0.5 * (lo + hi);
    };

    int first_step = -1;
    for (int k = 1; k < n_steps; ++k) {
        const Vector& yk = res.trajectory.states[k];
        for (int m = 0; m < n_members; ++m) {
            double cur = eval_fitted(boundary.members[m], yk);
            bool flipped = (prev[m] > 0 && cur <= 0) || (prev[m] < 0 && cur >= 0);
            if (flipped) {
                if (first_step < 0 || k == first_step) {
                    // Refine every member flipping in the first bracketing
                    // step; the earliest refined time is the CCT.
                    first_step = k;
                    double t_cross = refine(k, m, prev[m]);
                    res.crossings.emplace_back(t_cross, m);
                    if (res.crossing_member < 0 || t_cross < res.cct) {
                        res.cct = t_cross;
                        res.crossing_member = m;
                        res.refined = true;
                    }
                } else {
                    res.crossings.emplace_back(res.trajectory.times[k - 1], m);
                }
            }
            prev[m] = cur;
        }
    }
    if (first_step < 0) {
        throw NoCrossingError("no member eigenfunction changed sign before t_max");
    }
    return res;
}

}  // namespace ksep
