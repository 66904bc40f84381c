#pragma once

#include <Eigen/Dense>

#include "ksep/errors.hpp"

namespace ksep {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Axis-aligned box, the working domain of a model or a sampling run.
struct DomainBox {
    Vector lower;
    Vector upper;

    DomainBox() = default;
    DomainBox(Vector lo, Vector up) : lower(std::move(lo)), upper(std::move(up)) {
        if (lower.size() != upper.size() || lower.size() == 0) {
            throw ConfigError("domain box bounds must have equal nonzero dimension");
        }
        for (Eigen::Index i = 0; i < lower.size(); ++i) {
            if (!(lower[i] < upper[i])) {
                throw ConfigError("domain box requires lower[i] < upper[i]");
            }
        }
    }

    int dim() const { return static_cast<int>(lower.size()); }

    bool contains(const Vector& x) const {
        for (Eigen::Index i = 0; i < lower.size(); ++i) {
            if (x[i] < lower[i] || x[i] > upper[i]) return false;
        }
        return true;
    }

    /// Min over coordinates of the distance to the nearest face; positive inside.
    double margin(const Vector& x) const {
        double m = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < lower.size(); ++i) {
            m = std::min(m, std::min(x[i] - lower[i], upper[i] - x[i]));
        }
        return m;
    }

    double diameter() const { return (upper - lower).norm(); }

    Vector center() const { return 0.5 * (lower + upper); }

    /// Box grown by frac of each side length on both ends.
    DomainBox inflated(double frac) const {
        Vector pad = frac * (upper - lower);
        return DomainBox(lower - pad, upper + pad);
    }
};

/// Quadratic-form neighborhood {x : (x-center)' P (x-center) <= eps1}.
struct EllipsoidSeed {
    Vector center;
    Matrix p;
    double eps1 = 0.0;

    double quadratic_form(const Vector& x) const {
        Vector d = x - center;
        return d.dot(p * d);
    }

    bool contains(const Vector& x) const { return quadratic_form(x) <= eps1; }
};

}  // namespace ksep
