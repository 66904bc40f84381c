#include "ksep/fit.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <random>

namespace ksep {

std::string to_string(BasisSpec::Kind k) {
    switch (k) {
        case BasisSpec::Kind::monomial: return "monomial";
        case BasisSpec::Kind::trigonometric: return "trigonometric";
        case BasisSpec::Kind::mixed: return "mixed";
    }
    return "?";
}

BasisSpec::Kind basis_kind_from_string(const std::string& s) {
    if (s == "monomial") return BasisSpec::Kind::monomial;
    if (s == "trigonometric") return BasisSpec::Kind::trigonometric;
    if (s == "mixed") return BasisSpec::Kind::mixed;
    throw ConfigError("unknown basis kind '" + s + "'");
}

namespace {

bool has_monomials(const BasisSpec& s) {
    return s.kind == BasisSpec::Kind::monomial || s.kind == BasisSpec::Kind::mixed;
}

bool has_trig(const BasisSpec& s) {
    return s.kind == BasisSpec::Kind::trigonometric || s.kind == BasisSpec::Kind::mixed;
}

// Multi-indices of total degree 1..max_degree, graded, x1-major within each
// degree: (x1, x2, ..., x1^2, x1 x2, ...).
void enumerate_monomials(int dim, int max_degree,
                         const std::function<void(const std::vector<int>&)>& emit) {
    std::vector<int> alpha(dim, 0);
    std::function<void(int, int)> rec = [&](int pos, int remaining) {
        if (pos == dim - 1) {
            alpha[pos] = remaining;
            emit(alpha);
            return;
        }
        for (int k = remaining; k >= 0; --k) {
            alpha[pos] = k;
            rec(pos + 1, remaining - k);
        }
    };
    for (int total = 1; total <= max_degree; ++total) rec(0, total);
}

void validate_trig(const BasisSpec& spec, int dim) {
    for (int c : spec.trig_coords) {
        if (c < 0 || c >= dim) throw ConfigError("trig coordinate index out of range");
    }
    for (auto [i, j] : spec.trig_pairs) {
        if (i < 0 || i >= dim || j < 0 || j >= dim || i == j) {
            throw ConfigError("trig pair indices out of range");
        }
    }
}

}  // namespace

int basis_size(const BasisSpec& spec, int dim) {
    if (dim < 1) throw ConfigError("basis dimension must be >= 1");
    validate_trig(spec, dim);
    int n = spec.include_constant ? 1 : 0;
    if (has_monomials(spec)) {
        if (spec.max_degree < 1) throw ConfigError("max_degree must be >= 1");
        int count = 0;
        enumerate_monomials(dim, spec.max_degree, [&](const std::vector<int>&) { ++count; });
        n += count;
    }
    if (has_trig(spec)) {
        n += 2 * static_cast<int>(spec.trig_coords.size());
        n += 2 * static_cast<int>(spec.trig_pairs.size());
    }
    if (n < 1) throw ConfigError("basis dictionary is empty");
    return n;
}

Vector eval_basis(const BasisSpec& spec, const Vector& x) {
    const int dim = static_cast<int>(x.size());
    Vector out(basis_size(spec, dim));
    int k = 0;
    if (spec.include_constant) out[k++] = 1.0;
    if (has_monomials(spec)) {
        enumerate_monomials(dim, spec.max_degree, [&](const std::vector<int>& alpha) {
            double v = 1.0;
            for (int i = 0; i < dim; ++i) {
                for (int p = 0; p < alpha[i]; ++p) v *= x[i];
            }
            out[k++] = v;
        });
    }
    if (has_trig(spec)) {
        for (int c : spec.trig_coords) {
            out[k++] = std::sin(x[c]);
            out[k++] = std::cos(x[c]);
        }
        for (auto [i, j] : spec.trig_pairs) {
            out[k++] = std::sin(x[i] - x[j]);
            out[k++] = std::cos(x[i] - x[j]);
        }
    }
    return out;
}

namespace {

struct LsSolution {
    Vector coeffs;
    FitDiagnostics diag;
};

LsSolution solve_min_norm(const Matrix& g, const Vector& c) {
    LsSolution sol;
    sol.diag.num_samples = static_cast<int>(g.rows());
    sol.diag.num_basis = static_cast<int>(g.cols());

    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(g);
    sol.coeffs = cod.solve(c);
    if (!sol.coeffs.allFinite()) throw FitError("least-squares solution is non-finite");

    Eigen::BDCSVD<Matrix> svd(g);
    const auto& sv = svd.singularValues();
    const double thresh =
        std::max(g.rows(), g.cols()) * std::numeric_limits<double>::epsilon() * sv[0];
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > thresh) ++rank;
    }
    sol.diag.rank_g = rank;
    sol.diag.condition_number = (rank > 0) ? sv[0] / sv[rank - 1] : 0.0;

    Vector resid = g * sol.coeffs - c;
    sol.diag.rms_residual = std::sqrt(resid.squaredNorm() / static_cast<double>(g.rows()));
    sol.diag.max_residual = resid.cwiseAbs().maxCoeff();
    return sol;
}

Matrix build_design_matrix(const BasisSpec& spec, const std::vector<Vector>& points, int n_basis,
                           Exec exec) {
    Matrix g(points.size(), n_basis);
    for_index(exec, static_cast<std::ptrdiff_t>(points.size()),
              [&](std::ptrdiff_t i) { g.row(i) = eval_basis(spec, points[i]).transpose(); });
    if (!g.allFinite()) throw FitError("design matrix has non-finite entries");
    return g;
}

DomainBox bounding_box(const std::vector<Vector>& points) {
    Vector lo = points.front(), hi = points.front();
    for (const auto& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    // Degenerate axes (all samples equal) get a hair of width.
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        if (!(lo[i] < hi[i])) {
            double pad = 1e-12 + 1e-12 * std::abs(lo[i]);
            lo[i] -= pad;
            hi[i] += pad;
        }
    }
    return DomainBox(lo, hi);
}

}  // namespace

FittedEigenfunction fit_least_squares(const BasisSpec& spec, const SampleSet& samples,
                                      Exec exec) {
    if (samples.size() < 1) throw FitError("sample set is empty");
    for (double v : samples.values) {
        if (!std::isfinite(v)) throw FitError("sample values contain non-finite entries");
    }
    const int dim = static_cast<int>(samples.points.front().size());
    const int n_basis = basis_size(spec, dim);

    Matrix g = build_design_matrix(spec, samples.points, n_basis, exec);
    Vector c = Eigen::Map<const Vector>(samples.values.data(), samples.size());
    LsSolution sol = solve_min_norm(g, c);
    if (sol.diag.rank_g < n_basis) {
        std::cerr << "ksep: warning: rank(G) = " << sol.diag.rank_g << " < N = " << n_basis
                  << "; dictionary is not independent on the samples\n";
    }

    FittedEigenfunction fe;
    fe.basis = spec;
    fe.coeffs = sol.coeffs;
    fe.lambda_u = samples.lambda_u;
    fe.equilibrium = samples.seed.center;
    fe.domain = bounding_box(samples.points);
    fe.diagnostics = sol.diag;
    return fe;
}

double eval_fitted(const FittedEigenfunction& fe, const Vector& x) {
    return eval_basis(fe.basis, x).dot(fe.coeffs);
}

FittedValue eval_fitted_checked(const FittedEigenfunction& fe, const Vector& x) {
    return FittedValue{eval_fitted(fe, x), !fe.domain.contains(x)};
}

std::vector<ConvergenceEntry> convergence_study(const BasisSpec& spec, const SampleSet& samples,
                                                const std::vector<double>& fractions) {
    if (fractions.empty()) throw ConfigError("fractions must be nonempty");
    for (std::size_t i = 0; i < fractions.size(); ++i) {
        if (fractions[i] <= 0.0 || fractions[i] > 1.0) {
            throw ConfigError("fractions must lie in (0, 1]");
        }
        if (i > 0 && fractions[i] <= fractions[i - 1]) {
            throw ConfigError("fractions must be ascending");
        }
    }
    const int total = samples.size();
    const int dim = static_cast<int>(samples.points.front().size());
    const int n_basis = basis_size(spec, dim);

    // Nested subsamples: prefixes of one seeded shuffle.
    std::vector<int> order(total);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 eng(samples.rng_seed ^ 0x9e3779b97f4a7c15ull);
    std::shuffle(order.begin(), order.end(), eng);

    std::vector<ConvergenceEntry> entries;
    for (double frac : fractions) {
        int l_sub = std::max(1, static_cast<int>(std::lround(frac * total)));
        if (l_sub < n_basis) {
            std::cerr << "ksep: warning: subsample " << l_sub << " < N = " << n_basis
                      << "; fraction skipped\n";
            continue;
        }
        SampleSet sub;
        sub.seed = samples.seed;
        sub.lambda_u = samples.lambda_u;
        sub.w = samples.w;
        sub.rng_seed = samples.rng_seed;
        sub.points.reserve(l_sub);
        sub.values.reserve(l_sub);
        sub.stop_times.reserve(l_sub);
        for (int i = 0; i < l_sub; ++i) {
            sub.points.push_back(samples.points[order[i]]);
            sub.values.push_back(samples.values[order[i]]);
            sub.stop_times.push_back(samples.stop_times[order[i]]);
        }
        FittedEigenfunction fe = fit_least_squares(spec, sub);
        entries.push_back({l_sub, fe.coeffs, fe.diagnostics.rms_residual, 0.0});
    }
    if (!entries.empty()) {
        const Vector& ref = entries.back().coeffs;
        for (auto& e : entries) e.drift = (e.coeffs - ref).norm();
    }
    return entries;
}

}  // namespace ksep
