#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ksep/boundary.hpp"
#include "ksep/equilibria.hpp"
#include "ksep/fit.hpp"
#include "ksep/integrate.hpp"
#include "ksep/koopman.hpp"
#include "ksep/types.hpp"

namespace ksep::io {

/// Shortest round-trip decimal representation (std::to_chars).
std::string format_double(double v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);
nlohmann::json box_to_json(const DomainBox& box);
DomainBox box_from_json(const nlohmann::json& j);
nlohmann::json basis_to_json(const BasisSpec& spec);
BasisSpec basis_from_json(const nlohmann::json& j);

/// CSV header `t,x0,...,x{n-1}[,quad]`.
std::string trajectory_csv(const Trajectory& traj, const std::vector<double>* quad = nullptr);

/// CSV header `x0,...,x{n-1},value,stop_time`; the JSON sidecar carries
/// lambda, w, the seed ellipsoid and rng_seed.
std::string samples_csv(const SampleSet& samples);
nlohmann::json samples_sidecar(const SampleSet& samples);
SampleSet samples_from_csv(const std::string& csv, const nlohmann::json& sidecar);

nlohmann::json equilibrium_to_json(const EquilibriumPoint& eq);
EquilibriumPoint equilibrium_from_json(const SystemModel& model, const nlohmann::json& j);

nlohmann::json fitted_to_json(const FittedEigenfunction& fe);
FittedEigenfunction fitted_from_json(const nlohmann::json& j);

/// CSV header `member,segment,x0,...`; two rows (endpoints) per segment.
std::string contour_csv(const std::vector<ContourSegment>& segments, int member,
                        std::string* header_out = nullptr);

std::string points_csv(const std::vector<Vector>& points);

}  // namespace ksep::io
