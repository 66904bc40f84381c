#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ksep/boundary.hpp"
#include "ksep/equilibria.hpp"
#include "ksep/fit.hpp"
#include "ksep/koopman.hpp"
#include "ksep/types.hpp"

namespace ksep {

/// Validated configuration for the full pipeline. Unknown keys anywhere in
/// the JSON are rejected.
struct PipelineConfig {
    std::string model_name;
    std::map<std::string, double> model_overrides;
    std::optional<DomainBox> domain;  // default: the model's box

    int grid_per_dim = 20;
    NewtonOptions newton{};
    std::optional<Vector> sep_hint;  // default: stable equilibrium nearest the origin
    ShootingConfig shooting{};

    double eps1 = 0.2;
    double aspect = 100.0;
    int seed_count = 500;
    std::uint64_t rng_seed = 0;

    double backward_horizon = 10.0;
    int backward_stride = 1;

    BasisSpec basis{};

    std::optional<double> gamma;  // empty = "auto" (resolved from the samples)

    enum class MemberPolicy { verified, all };
    MemberPolicy members = MemberPolicy::verified;

    int contour_resolution = 201;
    int contour_axis_u = 0;
    int contour_axis_v = 1;
    std::optional<Vector> contour_base;  // default: the sep
    std::optional<double> contour_max_sample_distance;  // default: 2% of the box diameter

    std::string outputs;

    struct CctSection {
        std::string fault_name;
        std::map<std::string, double> fault_overrides;
        double t_max = 100.0;
        std::optional<Vector> x0;  // default: the sep
    };
    std::optional<CctSection> cct;

    static PipelineConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

PipelineConfig load_config(const std::string& path);

enum class Stage { equilibria, eigfun, fit, contour, cct };

std::optional<Stage> stage_from_string(const std::string& s);
std::string to_string(Stage s);

/// Runs one stage, reading prior-stage artifacts from the output directory.
/// Throws MissingArtifactError when an upstream artifact is absent.
void run_stage(const PipelineConfig& cfg, Stage stage, bool quiet = false);

/// All stages in order (cct only when configured). Idempotent given an
/// identical config: artifacts are rewritten byte-for-byte.
void run_pipeline(const PipelineConfig& cfg, bool quiet = false);

}  // namespace ksep
