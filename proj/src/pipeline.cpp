#include "ksep/pipeline.hpp"

#include <filesystem>
#include <iostream>
#include <set>

#include <nlohmann/json.hpp>

#include "ksep/io.hpp"
#include "ksep/version.hpp"

namespace ksep {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError("'" + where + "' must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

std::map<std::string, double> overrides_from_json(const json& j, const std::string& where) {
    std::map<std::string, double> out;
    if (!j.is_object()) throw ConfigError("'" + where + "' must be an object of numbers");
    for (const auto& [key, val] : j.items()) out[key] = val.get<double>();
    return out;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j) {
    try {
        check_keys(j,
                   {"model", "domain", "equilibria", "seed", "backward", "basis", "gamma",
                    "members", "contour", "outputs", "cct"},
                   "config");
        PipelineConfig cfg;

        const auto& jm = j.at("model");
        check_keys(jm, {"name", "overrides"}, "model");
        cfg.model_name = jm.at("name").get<std::string>();
        if (jm.contains("overrides")) {
            cfg.model_overrides = overrides_from_json(jm.at("overrides"), "model.overrides");
        }

        if (j.contains("domain")) {
            check_keys(j.at("domain"), {"lower", "upper"}, "domain");
            cfg.domain = io::box_from_json(j.at("domain"));
        }

        if (j.contains("equilibria")) {
            const auto& je = j.at("equilibria");
            check_keys(je, {"grid_per_dim", "newton_tol", "newton_max_iter", "sep_hint",
                            "shooting"},
                       "equilibria");
            if (je.contains("grid_per_dim")) cfg.grid_per_dim = je.at("grid_per_dim").get<int>();
            if (je.contains("newton_tol")) cfg.newton.tol = je.at("newton_tol").get<double>();
            if (je.contains("newton_max_iter")) {
                cfg.newton.max_iter = je.at("newton_max_iter").get<int>();
            }
            if (je.contains("sep_hint")) cfg.sep_hint = io::vector_from_json(je.at("sep_hint"));
            if (je.contains("shooting")) {
                const auto& js = je.at("shooting");
                check_keys(js, {"offset", "t_max", "capture_radius"}, "equilibria.shooting");
                if (js.contains("offset")) cfg.shooting.offset = js.at("offset").get<double>();
                if (js.contains("t_max")) cfg.shooting.t_max = js.at("t_max").get<double>();
                if (js.contains("capture_radius")) {
                    cfg.shooting.capture_radius = js.at("capture_radius").get<double>();
                }
            }
        }

        if (j.contains("seed")) {
            const auto& js = j.at("seed");
            check_keys(js, {"eps1", "aspect", "count", "rng_seed"}, "seed");
            if (js.contains("eps1")) cfg.eps1 = js.at("eps1").get<double>();
            if (js.contains("aspect")) cfg.aspect = js.at("aspect").get<double>();
            if (js.contains("count")) cfg.seed_count = js.at("count").get<int>();
            if (js.contains("rng_seed")) cfg.rng_seed = js.at("rng_seed").get<std::uint64_t>();
        }

        if (j.contains("backward")) {
            const auto& jb = j.at("backward");
            check_keys(jb, {"T", "stride"}, "backward");
            if (jb.contains("T")) cfg.backward_horizon = jb.at("T").get<double>();
            if (jb.contains("stride")) cfg.backward_stride = jb.at("stride").get<int>();
        }

        if (j.contains("basis")) cfg.basis = io::basis_from_json(j.at("basis"));

        if (j.contains("gamma")) {
            const auto& jg = j.at("gamma");
            if (jg.is_string()) {
                if (jg.get<std::string>() != "auto") {
                    throw ConfigError("gamma must be \"auto\" or a positive number");
                }
            } else {
                cfg.gamma = jg.get<double>();
                if (!(*cfg.gamma > 0)) throw ConfigError("gamma must be positive");
            }
        }

        if (j.contains("members")) {
            std::string m = j.at("members").get<std::string>();
            if (m == "verified") {
                cfg.members = MemberPolicy::verified;
            } else if (m == "all") {
                cfg.members = MemberPolicy::all;
            } else {
                throw ConfigError("members must be \"verified\" or \"all\"");
            }
        }

        if (j.contains("contour")) {
            const auto& jc = j.at("contour");
            check_keys(jc, {"resolution", "axis_u", "axis_v", "base", "max_sample_distance"},
                       "contour");
            if (jc.contains("resolution")) cfg.contour_resolution = jc.at("resolution").get<int>();
            if (jc.contains("axis_u")) cfg.contour_axis_u = jc.at("axis_u").get<int>();
            if (jc.contains("axis_v")) cfg.contour_axis_v = jc.at("axis_v").get<int>();
            if (jc.contains("base")) cfg.contour_base = io::vector_from_json(jc.at("base"));
            if (jc.contains("max_sample_distance")) {
                cfg.contour_max_sample_distance = jc.at("max_sample_distance").get<double>();
            }
        }

        if (j.contains("outputs")) cfg.outputs = j.at("outputs").get<std::string>();

        if (j.contains("cct")) {
            const auto& jc = j.at("cct");
            check_keys(jc, {"fault", "t_max", "x0"}, "cct");
            CctSection sec;
            const auto& jf = jc.at("fault");
            check_keys(jf, {"name", "overrides"}, "cct.fault");
            sec.fault_name = jf.at("name").get<std::string>();
            if (jf.contains("overrides")) {
                sec.fault_overrides = overrides_from_json(jf.at("overrides"), "cct.fault.overrides");
            }
            if (jc.contains("t_max")) sec.t_max = jc.at("t_max").get<double>();
            if (jc.contains("x0")) sec.x0 = io::vector_from_json(jc.at("x0"));
            cfg.cct = std::move(sec);
        }

        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
}

json PipelineConfig::to_json() const {
    json j;
    j["model"] = {{"name", model_name}, {"overrides", model_overrides}};
    if (domain) j["domain"] = io::box_to_json(*domain);
    json je = {{"grid_per_dim", grid_per_dim},
               {"newton_tol", newton.tol},
               {"newton_max_iter", newton.max_iter},
               {"shooting",
                {{"offset", shooting.offset},
                 {"t_max", shooting.t_max},
                 {"capture_radius", shooting.capture_radius}}}};
    if (sep_hint) je["sep_hint"] = io::vector_to_json(*sep_hint);
    j["equilibria"] = je;
    j["seed"] = {{"eps1", eps1}, {"aspect", aspect}, {"count", seed_count}, {"rng_seed", rng_seed}};
    j["backward"] = {{"T", backward_horizon}, {"stride", backward_stride}};
    j["basis"] = io::basis_to_json(basis);
    if (gamma) {
        j["gamma"] = *gamma;
    } else {
        j["gamma"] = "auto";
    }
    j["members"] = (members == MemberPolicy::verified) ? "verified" : "all";
    json jc = {{"resolution", contour_resolution},
               {"axis_u", contour_axis_u},
               {"axis_v", contour_axis_v}};
    if (contour_base) jc["base"] = io::vector_to_json(*contour_base);
    if (contour_max_sample_distance) jc["max_sample_distance"] = *contour_max_sample_distance;
    j["contour"] = jc;
    j["outputs"] = outputs;
    if (cct) {
        json jf = {{"fault", {{"name", cct->fault_name}, {"overrides", cct->fault_overrides}}},
                   {"t_max", cct->t_max}};
        if (cct->x0) jf["x0"] = io::vector_to_json(*cct->x0);
        j["cct"] = jf;
    }
    return j;
}

PipelineConfig load_config(const std::string& path) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("cannot parse config '") + path + "': " + e.what());
    }
    return PipelineConfig::from_json(j);
}

std::optional<Stage> stage_from_string(const std::string& s) {
    if (s == "equilibria") return Stage::equilibria;
    if (s == "eigfun") return Stage::eigfun;
    if (s == "fit") return Stage::fit;
    if (s == "contour") return Stage::contour;
    if (s == "cct") return Stage::cct;
    return std::nullopt;
}

std::string to_string(Stage s) {
    switch (s) {
        case Stage::equilibria: return "equilibria";
        case Stage::eigfun: return "eigfun";
        case Stage::fit: return "fit";
        case Stage::contour: return "contour";
        case Stage::cct: return "cct";
    }
    return "?";
}

namespace {

struct Paths {
    fs::path dir;

    explicit Paths(const PipelineConfig& cfg) {
        if (cfg.outputs.empty()) {
            throw ConfigError("no output directory: set \"outputs\" in the config, pass --out, "
                              "or export KSEP_OUT");
        }
        dir = cfg.outputs;
    }

    std::string equilibria() const { return (dir / "equilibria.json").string(); }
    std::string samples_csv(int i) const {
        return (dir / ("samples_" + std::to_string(i) + ".csv")).string();
    }
    std::string samples_json(int i) const {
        return (dir / ("samples_" + std::to_string(i) + ".json")).string();
    }
    std::string eigenfunction(int i) const {
        return (dir / ("eigenfunction_" + std::to_string(i) + ".json")).string();
    }
    std::string contour(int i) const {
        return (dir / ("contour_" + std::to_string(i) + ".csv")).string();
    }
    std::string boundary() const { return (dir / "boundary.csv").string(); }
    std::string manifest() const { return (dir / "run_manifest.json").string(); }
    std::string cct() const { return (dir / "cct.json").string(); }
};

void update_manifest(const Paths& paths, const PipelineConfig& cfg,
                     const std::function<void(json&)>& patch) {
    json m;
    if (fs::exists(paths.manifest())) {
        m = json::parse(io::read_file(paths.manifest()));
    }
    m["version"] = kVersion;
    m["config"] = cfg.to_json();
    patch(m);
    io::write_file(paths.manifest(), m.dump(2) + "\n");
}

json load_json_artifact(const std::string& path, const std::string& needed_by) {
    if (!fs::exists(path)) {
        throw MissingArtifactError("'" + path + "' is missing; run the " + needed_by +
                                   " stage first");
    }
    return json::parse(io::read_file(path));
}

DomainBox working_box(const PipelineConfig& cfg, const SystemModel& model) {
    if (cfg.domain) {
        if (cfg.domain->dim() != model.dim) {
            throw ConfigError("config domain dimension does not match the model");
        }
        return *cfg.domain;
    }
    return model.default_box;
}

void stage_equilibria(const PipelineConfig& cfg, const Paths& paths, bool quiet) {
    SystemModel model = builtin_system(cfg.model_name, cfg.model_overrides);
    DomainBox box = working_box(cfg, model);
    auto eqs = find_equilibria(model, box, cfg.grid_per_dim, cfg.newton);
    if (eqs.empty()) throw ConfigError("no equilibria found in the domain box");

    // Stable target: nearest to sep_hint when given, else nearest to the origin.
    int sep_index = -1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < eqs.size(); ++i) {
        if (eqs[i].classification != EqClass::stable) continue;
        double d = cfg.sep_hint ? (eqs[i].x_star - *cfg.sep_hint).norm() : eqs[i].x_star.norm();
        if (d < best) {
            best = d;
            sep_index = static_cast<int>(i);
        }
    }
    if (sep_index < 0) throw ConfigError("no stable equilibrium found in the domain box");

    std::vector<Vector> other_attractors;
    for (std::size_t i = 0; i < eqs.size(); ++i) {
        if (eqs[i].classification == EqClass::stable && static_cast<int>(i) != sep_index) {
            other_attractors.push_back(eqs[i].x_star);
        }
    }

    json records = json::array();
    std::vector<int> members;
    for (std::size_t i = 0; i < eqs.size(); ++i) {
        json rec = io::equilibrium_to_json(eqs[i]);
        if (eqs[i].classification == EqClass::type_one) {
            BoundaryVerdict v = on_stability_boundary(model, eqs[i], eqs[sep_index], cfg.shooting,
                                                      other_attractors);
            rec["on_boundary"] = to_string(v);
            bool take = (cfg.members == PipelineConfig::MemberPolicy::all) ||
                        v == BoundaryVerdict::on_boundary;
            if (take) members.push_back(static_cast<int>(i));
        }
        records.push_back(std::move(rec));
    }
    if (!quiet) {
        std::cerr << "equilibria: " << eqs.size() << " found, " << members.size()
                  << " boundary saddle(s)\n";
    }

    json out = {{"model", cfg.model_name},
                {"equilibria", records},
                {"sep_index", sep_index},
                {"members", members}};
    io::write_file(paths.equilibria(), out.dump(2) + "\n");
    update_manifest(paths, cfg, [&](json& m) {
        m["sep_index"] = sep_index;
        m["members"] = members;
    });
}

struct EquilibriaArtifact {
    SystemModel model;
    std::vector<EquilibriumPoint> eqs;
    int sep_index = -1;
    std::vector<int> members;
};

EquilibriaArtifact load_equilibria(const PipelineConfig& cfg, const Paths& paths) {
    json j = load_json_artifact(paths.equilibria(), "equilibria");
    EquilibriaArtifact art;
    art.model = builtin_system(cfg.model_name, cfg.model_overrides);
    for (const auto& rec : j.at("equilibria")) {
        art.eqs.push_back(io::equilibrium_from_json(art.model, rec));
    }
    art.sep_index = j.at("sep_index").get<int>();
    art.members = j.at("members").get<std::vector<int>>();
    return art;
}

void stage_eigfun(const PipelineConfig& cfg, const Paths& paths, bool quiet) {
    EquilibriaArtifact art = load_equilibria(cfg, paths);
    DomainBox box = working_box(cfg, art.model);
    for (std::size_t m = 0; m < art.members.size(); ++m) {
        const EquilibriumPoint& eq = art.eqs[art.members[m]];
        UnstableEigenpair pair = unstable_left_eigenpair(eq);
        EllipsoidSeed seed = seed_ellipsoid(eq, pair, cfg.eps1, cfg.aspect);
        BackwardSamplingConfig bcfg;
        bcfg.count = cfg.seed_count;
        bcfg.horizon = cfg.backward_horizon;
        bcfg.stride = cfg.backward_stride;
        bcfg.rng_seed = cfg.rng_seed + m;  // distinct stream per member
        SampleSet samples = generate_samples_backward(art.model, eq, pair, seed, box, bcfg);
        if (!quiet) {
            std::cerr << "eigfun[" << m << "]: lambda=" << samples.lambda_u << ", "
                      << samples.size() << " samples\n";
        }
        io::write_file(paths.samples_csv(static_cast<int>(m)), io::samples_csv(samples));
        io::write_file(paths.samples_json(static_cast<int>(m)),
                       io::samples_sidecar(samples).dump(2) + "\n");
    }
    update_manifest(paths, cfg, [](json&) {});
}

SampleSet load_samples(const Paths& paths, int m) {
    if (!fs::exists(paths.samples_csv(m)) || !fs::exists(paths.samples_json(m))) {
        throw MissingArtifactError("samples for member " + std::to_string(m) +
                                   " are missing; run the eigfun stage first");
    }
    return io::samples_from_csv(io::read_file(paths.samples_csv(m)),
                                json::parse(io::read_file(paths.samples_json(m))));
}

void stage_fit(const PipelineConfig& cfg, const Paths& paths, bool quiet) {
    EquilibriaArtifact art = load_equilibria(cfg, paths);
    double gamma = cfg.gamma.value_or(0.0);
    for (std::size_t m = 0; m < art.members.size(); ++m) {
        SampleSet samples = load_samples(paths, static_cast<int>(m));
        FittedEigenfunction fe = fit_least_squares(cfg.basis, samples);
        if (!cfg.gamma) gamma = std::max(gamma, auto_gamma(samples));
        if (!quiet) {
            std::cerr << "fit[" << m << "]: N=" << fe.diagnostics.num_basis
                      << ", rms=" << fe.diagnostics.rms_residual << "\n";
        }
        io::write_file(paths.eigenfunction(static_cast<int>(m)),
                       io::fitted_to_json(fe).dump(2) + "\n");
    }
    double resolved = gamma;
    update_manifest(paths, cfg, [&](json& m) { m["gamma"] = resolved; });
}

std::vector<FittedEigenfunction> load_members(const Paths& paths, std::size_t count) {
    std::vector<FittedEigenfunction> out;
    for (std::size_t m = 0; m < count; ++m) {
        out.push_back(io::fitted_from_json(
            load_json_artifact(paths.eigenfunction(static_cast<int>(m)), "fit")));
    }
    return out;
}

DomainBox intersect_or_empty(const DomainBox& a, const DomainBox& b) {
    Vector lo = a.lower.cwiseMax(b.lower);
    Vector hi = a.upper.cwiseMin(b.upper);
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        if (!(lo[i] < hi[i])) throw ConfigError("empty contour region");
    }
    return DomainBox(lo, hi);
}

void stage_contour(const PipelineConfig& cfg, const Paths& paths, bool quiet) {
    EquilibriaArtifact art = load_equilibria(cfg, paths);
    DomainBox box = working_box(cfg, art.model);
    auto members = load_members(paths, art.members.size());
    const Vector sep = art.eqs[art.sep_index].x_star;

    std::string header;
    std::string all_rows;
    for (std::size_t m = 0; m < members.size(); ++m) {
        PlaneSlice slice;
        slice.axis_u = cfg.contour_axis_u;
        slice.axis_v = cfg.contour_axis_v;
        slice.base = cfg.contour_base.value_or(sep);
        // The fit is only trusted on the sampled region: contour over the
        // sample bounding box and keep segments near actual samples.
        std::vector<ContourSegment> segments;
        try {
            DomainBox region = intersect_or_empty(box, members[m].domain.inflated(0.05));
            segments = grid_contour_2d(members[m], region, cfg.contour_resolution, slice);
            SampleSet samples = load_samples(paths, static_cast<int>(m));
            double radius = cfg.contour_max_sample_distance.value_or(0.02 * box.diameter());
            segments = filter_segments_near(segments, samples.points, radius);
        } catch (const ConfigError&) {
            // No overlap between the domain box and this member's samples.
        }
        if (!quiet) {
            std::cerr << "contour[" << m << "]: " << segments.size() << " segment(s)\n";
        }
        std::string rows = io::contour_csv(segments, static_cast<int>(m), &header);
        io::write_file(paths.contour(static_cast<int>(m)), header + rows);
        all_rows += rows;
    }
    if (header.empty()) header = "member,segment\n";
    io::write_file(paths.boundary(), header + all_rows);
    update_manifest(paths, cfg, [](json&) {});
}

void stage_cct(const PipelineConfig& cfg, const Paths& paths, bool quiet) {
    if (!cfg.cct) throw ConfigError("config has no cct section");
    EquilibriaArtifact art = load_equilibria(cfg, paths);
    auto members = load_members(paths, art.members.size());

    json manifest = load_json_artifact(paths.manifest(), "fit");
    if (!manifest.contains("gamma")) {
        throw MissingArtifactError("manifest has no resolved gamma; run the fit stage first");
    }
    double gamma = manifest.at("gamma").get<double>();

    const Vector sep = art.eqs[art.sep_index].x_star;
    BoundaryEstimate boundary = assemble_boundary(std::move(members), gamma, sep);

    SystemModel fault = builtin_system(cfg.cct->fault_name, cfg.cct->fault_overrides);
    Vector x0 = cfg.cct->x0.value_or(sep);
    CctConfig ccfg;
    ccfg.t_max = cfg.cct->t_max;
    CctResult res = estimate_cct(fault, boundary, x0, ccfg);
    if (!quiet) {
        std::cerr << "cct: " << res.cct << " s (member " << res.crossing_member << ")\n";
    }

    json crossings = json::array();
    for (auto [t, m] : res.crossings) crossings.push_back(json::array({t, m}));
    json out = {{"cct", res.cct},
                {"crossing_member", res.crossing_member},
                {"refined", res.refined},
                {"crossings", crossings},
                {"gamma", gamma},
                {"x0", io::vector_to_json(x0)},
                {"fault", {{"name", cfg.cct->fault_name}, {"overrides", cfg.cct->fault_overrides}}},
                {"notes",
                 {{"x0_policy", cfg.cct->x0 ? "explicit from config" : "post-fault SEP"},
                  {"pm_policy", "held at its post-fault value unless overridden"}}}};
    io::write_file(paths.cct(), out.dump(2) + "\n");
    update_manifest(paths, cfg, [](json&) {});
}

}  // namespace

void run_stage(const PipelineConfig& cfg, Stage stage, bool quiet) {
    Paths paths(cfg);
    fs::create_directories(paths.dir);
    switch (stage) {
        case Stage::equilibria: stage_equilibria(cfg, paths, quiet); break;
        case Stage::eigfun: stage_eigfun(cfg, paths, quiet); break;
        case Stage::fit: stage_fit(cfg, paths, quiet); break;
        case Stage::contour: stage_contour(cfg, paths, quiet); break;
        case Stage::cct: stage_cct(cfg, paths, quiet); break;
    }
}

void run_pipeline(const PipelineConfig& cfg, bool quiet) {
    run_stage(cfg, Stage::equilibria, quiet);
    run_stage(cfg, Stage::eigfun, quiet);
    run_stage(cfg, Stage::fit, quiet);
    run_stage(cfg, Stage::contour, quiet);
    if (cfg.cct) run_stage(cfg, Stage::cct, quiet);
}

}  // namespace ksep
