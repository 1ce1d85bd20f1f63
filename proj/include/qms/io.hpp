// io.hpp -- config loading (JSON with [re, im] pairs for complex entries),
// model instantiation from config, and deterministic CSV/JSON serialization
// with config-hash provenance headers.

#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qms/models.hpp"

namespace qms {

inline constexpr const char* kVersion = "qms 1.0.0";

// FNV-1a over the raw config bytes; embedded in every output header so runs
// are traceable to their exact configuration.
inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// 17 significant digits: round-trip exact for doubles.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Row-major list of [re, im] pairs -> n x n complex matrix.
inline Mat parse_matrix(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("matrix: expected nonempty array");
    auto n_sq = j.size();
    Eigen::Index n = static_cast<Eigen::Index>(std::llround(std::sqrt(double(n_sq))));
    if (static_cast<std::size_t>(n) * n != n_sq)
        throw ConfigError("matrix: entry count is not a perfect square");
    Mat m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index k = 0; k < n; ++k) {
            const auto& e = j[i * n + k];
            if (!e.is_array() || e.size() != 2)
                throw ConfigError("matrix: entries must be [re, im] pairs");
            m(i, k) = cplx(e[0].get<double>(), e[1].get<double>());
        }
    return m;
}

struct ExperimentConfig {
    nlohmann::json raw;
    std::string hash;
    ModelDef def;
    MeasurementOperator meas;
    nlohmann::json run;   // experiment-specific parameters
};

inline QuantumSystem parse_system(const nlohmann::json& j) {
    QuantumSystem sys;
    sys.hamiltonian = parse_matrix(j.at("hamiltonian"));
    sys.reference_state = parse_matrix(j.at("reference_state"));
    sys.dim = sys.hamiltonian.rows();
    if (j.contains("basis_labels"))
        sys.basis_labels = j["basis_labels"].get<std::vector<std::string>>();
    return sys;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    ExperimentConfig cfg;
    cfg.hash = fnv1a_hex(ss.str());
    try {
        cfg.raw = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    try {
        const auto& j = cfg.raw;
        std::string model = j.at("model").get<std::string>();
        double theta = 0.0, phi = 0.0;
        bool have_angles = false;
        if (model == "jaynes_cummings") {
            const auto& p = j.at("params");
            JaynesCummings jc;
            jc.tau = p.value("tau", 1.0);
            jc.lambda = p.value("lambda", 1.0);
            jc.p = p.value("p", 1.0);
            cfg.def = build_jc(jc);
            theta = p.value("theta", 0.0);
            phi = p.value("phi", 0.0);
            have_angles = true;
        } else if (model == "inline") {
            cfg.def.sys_s = parse_system(j.at("system"));
            cfg.def.sys_p = parse_system(j.at("probe"));
            cfg.def.inter.v = parse_matrix(j.at("interaction").at("v"));
            cfg.def.inter.coupling = j.at("interaction").at("lambda").get<double>();
            cfg.def.inter.tau = j.at("interaction").at("tau").get<double>();
            cfg.def.rho_in = parse_matrix(j.at("rho_in"));
        } else {
            throw ConfigError("unknown model: " + model);
        }

        if (j.contains("measurement") && j["measurement"].contains("m"))
            cfg.meas = make_measurement(parse_matrix(j["measurement"]["m"]));
        else if (j.contains("measurement") && j["measurement"].contains("theta"))
            cfg.meas = spin_direction_measurement(j["measurement"].value("theta", 0.0),
                                                  j["measurement"].value("phi", 0.0));
        else if (have_angles)
            cfg.meas = spin_direction_measurement(theta, phi);
        else
            throw ConfigError("config: no measurement specified");

        cfg.run = j.value("run", nlohmann::json::object());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config schema error: ") + e.what());
    }
    return cfg;
}

// Header comment lines embedded in every output file.
inline std::string provenance_header(const ExperimentConfig& cfg) {
    return std::string("# ") + kVersion + "\n# config-hash " + cfg.hash + "\n";
}

} // namespace qms
