#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ksep/fit.hpp"
#include "ksep/integrate.hpp"
#include "ksep/parallel.hpp"
#include "ksep/types.hpp"

namespace ksep {

/// Union of zero-level sets over the boundary saddles: a point is on the
/// estimated boundary iff any member's |phi| <= gamma.
struct BoundaryEstimate {
    std::vector<FittedEigenfunction> members;
    double gamma = 0.0;
    Vector sep;

    bool contains(const Vector& x) const;
    double min_abs_value(const Vector& x) const;
};

/// Smallest band around zero resolved by the sampled values: max of the
/// smallest positive and |largest negative| sample value.
double auto_gamma(const SampleSet& samples);

BoundaryEstimate assemble_boundary(std::vector<FittedEigenfunction> members, double gamma,
                                   Vector sep);

std::vector<Vector> level_set_points(const FittedEigenfunction& fe,
                                     const std::vector<Vector>& candidates, double gamma);

/// Coordinate plane for contouring models with n > 2: the grid varies axes
/// (axis_u, axis_v) of base.
struct PlaneSlice {
    int axis_u = 0;
    int axis_v = 1;
    Vector base;
};

struct ContourSegment {
    Vector a;
    Vector b;
};

/// Marching squares on a resolution x resolution grid of the zero level of
/// fe. Linear interpolation along cell edges; ambiguous cells are split by
/// the sign at the cell center. Empty when the sign never changes.
std::vector<ContourSegment> grid_contour_2d(const FittedEigenfunction& fe, const DomainBox& box,
                                            int resolution,
                                            const std::optional<PlaneSlice>& slice = {},
                                            Exec exec = Exec::openmp);

/// Keeps segments whose midpoint lies within radius of one of the points.
/// The fit is only trusted on the sampled set, so contours are clipped to its
/// neighborhood before export.
std::vector<ContourSegment> filter_segments_near(const std::vector<ContourSegment>& segments,
                                                 const std::vector<Vector>& points, double radius,
                                                 Exec exec = Exec::openmp);

struct ClassifyConfig {
    double capture_radius = 1e-2;
    double t_max = 200.0;
    IntegratorConfig integrator{};  // t_max is taken from this struct's t_max
};

struct Classification {
    enum class Kind { in_basin, other_basin, undecided };
    Kind kind = Kind::undecided;
    int attractor_index = -1;  // valid unless undecided
};

/// Forward-simulation basin oracle: integrate until within capture_radius of
/// one of the attractors or until t_max.
Classification classify_point(const SystemModel& model, const Vector& x, const Vector& sep,
                              const std::vector<Vector>& attractors, const ClassifyConfig& cfg);

struct CctConfig {
    double t_max = 100.0;
    double event_tol = 1e-6;  // bisection window on the crossing time
    IntegratorConfig integrator{};
};

struct CctResult {
    double cct = 0.0;
    int crossing_member = -1;
    Trajectory trajectory;  // the on-fault trajectory over [0, t_max]
    bool refined = false;
    std::vector<std::pair<double, int>> crossings;  // every sign change (time, member)
};

/// Critical clearing time: first time any member's fitted eigenfunction
/// changes sign along the on-fault trajectory from x0, refined by bisection.
/// Throws NoCrossingError when no member's sign flips before t_max.
CctResult estimate_cct(const SystemModel& fault_model, const BoundaryEstimate& boundary,
                       const Vector& x0, const CctConfig& cfg);

}  // namespace ksep
