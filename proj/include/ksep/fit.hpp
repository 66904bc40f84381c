#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ksep/koopman.hpp"
#include "ksep/parallel.hpp"
#include "ksep/types.hpp"

namespace ksep {

/// Dictionary of basis functions. monomial: all multi-indices with total
/// degree in [1, max_degree]; trigonometric: sin/cos of the listed coordinates
/// and coordinate differences; mixed: both. The constant function is
/// controlled separately and comes first when present.
struct BasisSpec {
    enum class Kind { monomial, trigonometric, mixed };

    Kind kind = Kind::monomial;
    int max_degree = 1;
    std::vector<int> trig_coords;
    std::vector<std::pair<int, int>> trig_pairs;
    bool include_constant = true;
};

std::string to_string(BasisSpec::Kind k);
BasisSpec::Kind basis_kind_from_string(const std::string& s);

int basis_size(const BasisSpec& spec, int dim);
Vector eval_basis(const BasisSpec& spec, const Vector& x);

struct FitDiagnostics {
    double rms_residual = 0.0;
    double max_residual = 0.0;
    int rank_g = 0;
    double condition_number = 0.0;  // sigma_max / sigma_rank
    int num_samples = 0;            // L
    int num_basis = 0;              // N
};

struct FittedEigenfunction {
    BasisSpec basis;
    Vector coeffs;
    double lambda_u = 0.0;
    Vector equilibrium;
    DomainBox domain;  // bounding box of the fitted samples
    FitDiagnostics diagnostics;
};

/// Minimum-norm least squares u* = G^+ c via a rank-revealing complete
/// orthogonal decomposition; basis rows are evaluated in parallel. Warns on
/// stderr (does not throw) when rank(G) < N.
FittedEigenfunction fit_least_squares(const BasisSpec& spec, const SampleSet& samples,
                                      Exec exec = Exec::openmp);

double eval_fitted(const FittedEigenfunction& fe, const Vector& x);

struct FittedValue {
    double value = 0.0;
    bool extrapolated = false;  // x outside fe.domain
};

FittedValue eval_fitted_checked(const FittedEigenfunction& fe, const Vector& x);

struct ConvergenceEntry {
    int num_samples = 0;
    Vector coeffs;
    double rms = 0.0;
    double drift = 0.0;  // ||coeffs - coeffs at the largest fraction||
};

/// Refits on nested random subsamples (shuffle seeded from the sample set) and
/// reports the coefficient drift against the largest subsample. Fractions must
/// be ascending in (0, 1]; subsamples smaller than the dictionary are skipped
/// with a warning.
std::vector<ConvergenceEntry> convergence_study(const BasisSpec& spec, const SampleSet& samples,
                                                const std::vector<double>& fractions);

}  // namespace ksep
