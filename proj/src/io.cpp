#include "ksep/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ksep::io {

using nlohmann::json;

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, ptr);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << content;
}

json vector_to_json(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Vector vector_from_json(const json& j) {
    if (!j.is_array()) throw ConfigError("expected a JSON array of numbers");
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

json box_to_json(const DomainBox& box) {
    return json{{"lower", vector_to_json(box.lower)}, {"upper", vector_to_json(box.upper)}};
}

DomainBox box_from_json(const json& j) {
    return DomainBox(vector_from_json(j.at("lower")), vector_from_json(j.at("upper")));
}

json basis_to_json(const BasisSpec& spec) {
    json pairs = json::array();
    for (auto [a, b] : spec.trig_pairs) pairs.push_back(json::array({a, b}));
    return json{{"kind", to_string(spec.kind)},
                {"max_degree", spec.max_degree},
                {"trig_coords", spec.trig_coords},
                {"trig_pairs", pairs},
                {"include_constant", spec.include_constant}};
}

BasisSpec basis_from_json(const json& j) {
    BasisSpec spec;
    spec.kind = basis_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("max_degree")) spec.max_degree = j.at("max_degree").get<int>();
    if (j.contains("include_constant")) {
        spec.include_constant = j.at("include_constant").get<bool>();
    }
    if (j.contains("trig_coords")) {
        spec.trig_coords = j.at("trig_coords").get<std::vector<int>>();
    }
    if (j.contains("trig_pairs")) {
        for (const auto& p : j.at("trig_pairs")) {
            spec.trig_pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
        }
    }
    return spec;
}

std::string trajectory_csv(const Trajectory& traj, const std::vector<double>* quad) {
    std::string out = "t";
    const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size());
    for (int i = 0; i < n; ++i) out += ",x" + std::to_string(i);
    if (quad) out += ",quad";
    out += "\n";
    for (int k = 0; k < traj.size(); ++k) {
        out += format_double(traj.times[k]);
        for (int i = 0; i < n; ++i) out += "," + format_double(traj.states[k][i]);
        if (quad) out += "," + format_double((*quad)[k]);
        out += "\n";
    }
    return out;
}

std::string samples_csv(const SampleSet& samples) {
    const int n = static_cast<int>(samples.seed.center.size());
    std::string out;
    for (int i = 0; i < n; ++i) out += "x" + std::to_string(i) + ",";
    out += "value,stop_time\n";
    for (int k = 0; k < samples.size(); ++k) {
        for (int i = 0; i < n; ++i) out += format_double(samples.points[k][i]) + ",";
        out += format_double(samples.values[k]) + "," + format_double(samples.stop_times[k]);
        out += "\n";
    }
    return out;
}

json samples_sidecar(const SampleSet& samples) {
    const int n = static_cast<int>(samples.seed.center.size());
    json p = json::array();
    for (int i = 0; i < n; ++i) {
        p.push_back(vector_to_json(samples.seed.p.row(i).transpose()));
    }
    return json{{"lambda", samples.lambda_u},
                {"w", vector_to_json(samples.w)},
                {"seed",
                 {{"center", vector_to_json(samples.seed.center)},
                  {"P", p},
                  {"eps1", samples.seed.eps1}}},
                {"rng_seed", samples.rng_seed},
                {"count", samples.size()}};
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

double parse_double(const std::string& s) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError("bad numeric field '" + s + "'");
    }
    return v;
}

}  // namespace

SampleSet samples_from_csv(const std::string& csv, const json& sidecar) {
    SampleSet set;
    set.lambda_u = sidecar.at("lambda").get<double>();
    set.w = vector_from_json(sidecar.at("w"));
    const auto& seed = sidecar.at("seed");
    set.seed.center = vector_from_json(seed.at("center"));
    set.seed.eps1 = seed.at("eps1").get<double>();
    const auto& rows = seed.at("P");
    const int n = static_cast<int>(set.seed.center.size());
    set.seed.p.resize(n, n);
    for (int i = 0; i < n; ++i) {
        set.seed.p.row(i) = vector_from_json(rows.at(i)).transpose();
    }
    set.rng_seed = sidecar.at("rng_seed").get<std::uint64_t>();

    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("samples csv is empty");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split(line, ',');
        if (static_cast<int>(fields.size()) != n + 2) {
            throw ConfigError("samples csv row has wrong field count");
        }
        Vector x(n);
        for (int i = 0; i < n; ++i) x[i] = parse_double(fields[i]);
        set.points.push_back(std::move(x));
        set.values.push_back(parse_double(fields[n]));
        set.stop_times.push_back(parse_double(fields[n + 1]));
    }
    return set;
}

json equilibrium_to_json(const EquilibriumPoint& eq) {
    json eigs = json::array();
    for (Eigen::Index i = 0; i < eq.eigenvalues.size(); ++i) {
        eigs.push_back(json::array({eq.eigenvalues[i].real(), eq.eigenvalues[i].imag()}));
    }
    return json{{"x", vector_to_json(eq.x_star)},
                {"eigenvalues", eigs},
                {"classification", to_string(eq.classification)},
                {"residual", eq.residual}};
}

EquilibriumPoint equilibrium_from_json(const SystemModel& model, const json& j) {
    // Re-derived from the stored location so the Jacobian matches the model.
    return make_equilibrium(model, vector_from_json(j.at("x")));
}

json fitted_to_json(const FittedEigenfunction& fe) {
    return json{{"basis", basis_to_json(fe.basis)},
                {"coeffs", vector_to_json(fe.coeffs)},
                {"lambda", fe.lambda_u},
                {"equilibrium", vector_to_json(fe.equilibrium)},
                {"domain", box_to_json(fe.domain)},
                {"diagnostics",
                 {{"rms_residual", fe.diagnostics.rms_residual},
                  {"max_residual", fe.diagnostics.max_residual},
                  {"rank_G", fe.diagnostics.rank_g},
                  {"condition_number", fe.diagnostics.condition_number},
                  {"L", fe.diagnostics.num_samples},
                  {"N", fe.diagnostics.num_basis}}}};
}

FittedEigenfunction fitted_from_json(const json& j) {
    FittedEigenfunction fe;
    fe.basis = basis_from_json(j.at("basis"));
    fe.coeffs = vector_from_json(j.at("coeffs"));
    fe.lambda_u = j.at("lambda").get<double>();
    fe.equilibrium = vector_from_json(j.at("equilibrium"));
    fe.domain = box_from_json(j.at("domain"));
    const auto& d = j.at("diagnostics");
    fe.diagnostics.rms_residual = d.at("rms_residual").get<double>();
    fe.diagnostics.max_residual = d.at("max_residual").get<double>();
    fe.diagnostics.rank_g = d.at("rank_G").get<int>();
    fe.diagnostics.condition_number = d.at("condition_number").get<double>();
    fe.diagnostics.num_samples = d.at("L").get<int>();
    fe.diagnostics.num_basis = d.at("N").get<int>();
    return fe;
}

std::string contour_csv(const std::vector<ContourSegment>& segments, int member,
                        std::string* header_out) {
    const int n = segments.empty() ? 0 : static_cast<int>(segments.front().a.size());
    std::string header = "member,segment";
    for (int i = 0; i < n; ++i) header += ",x" + std::to_string(i);
    header += "\n";
    if (header_out) *header_out = header;

    std::string out;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        for (const Vector* p : {&segments[s].a, &segments[s].b}) {
            out += std::to_string(member) + "," + std::to_string(s);
            for (int i = 0; i < n; ++i) out += "," + format_double((*p)[i]);
            out += "\n";
        }
    }
    return out;
}

std::string points_csv(const std::vector<Vector>& points) {
    const int n = points.empty() ? 0 : static_cast<int>(points.front().size());
    std::string out;
    for (int i = 0; i < n; ++i) {
        out += "x" + std::to_string(i);
        out += (i + 1 < n) ? "," : "";
    }
    out += "\n";
    for (const auto& p : points) {
        for (int i = 0; i < n; ++i) {
            out += format_double(p[i]);
            out += (i + 1 < n) ? "," : "";
        }
        out += "\n";
    }
    return out;
}

}  // namespace ksep::io
