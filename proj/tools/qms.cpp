// qms -- command-line front end: loads a model config, runs a named
// experiment, and emits machine-readable tables (CSV) or reports (JSON).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "qms/io.hpp"
#include "qms/ldp.hpp"
#include "qms/models.hpp"
#include "qms/oracle.hpp"
#include "qms/perturbation.hpp"
#include "qms/process.hpp"

namespace {

using nlohmann::json;

struct Output {
    std::string out_dir;

    void emit(const std::string& name, const std::string& content) const {
        if (out_dir.empty()) {
            std::cout << content;
            return;
        }
        std::filesystem::create_directories(out_dir);
        std::ofstream f(std::filesystem::path(out_dir) / name);
        if (!f) throw qms::ConfigError("cannot write output file in " + out_dir);
        f << content;
    }
};

json complex_list(const std::vector<qms::cplx>& zs) {
    json arr = json::array();
    for (auto z : zs) arr.push_back({z.real(), z.imag()});
    return arr;
}

json report_base(const qms::ExperimentConfig& cfg) {
    return json{{"version", qms::kVersion}, {"config_hash", cfg.hash}};
}

std::vector<std::vector<std::size_t>> parse_subsets(const json& j) {
    std::vector<std::vector<std::size_t>> out;
    for (const auto& s : j) out.push_back(s.get<std::vector<std::size_t>>());
    return out;
}

int n_workers() {
    if (const char* env = std::getenv("QMS_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

int cmd_spectrum(const qms::ExperimentConfig& cfg, const Output& out) {
    auto pipe = qms::build_pipeline(cfg.def, cfg.meas);
    auto sd = qms::spectral_analysis(pipe.transfer);
    json r = report_base(cfg);
    r["eigenvalues"] = complex_list(sd.eigenvalues);
    r["gap"] = sd.gap;
    r["condition_a"] = sd.condition_a;
    r["nilpotent_norm"] = sd.nilpotent_norm;
    out.emit("spectrum.json", r.dump(2) + "\n");
    return 0;
}

int cmd_probability(const qms::ExperimentConfig& cfg, const Output& out) {
    auto pipe = qms::build_pipeline(cfg.def, cfg.meas);
    if (!cfg.run.contains("sequence")) throw qms::ConfigError("probability: run.sequence missing");
    auto subsets = parse_subsets(cfg.run["sequence"]);
    double p = qms::joint_probability(pipe.transfer, subsets);
    double prod = 1.0;
    for (std::size_t j = 0; j < subsets.size(); ++j) {
        double pm = 0.0;
        for (std::size_t m : subsets[j])
            pm += qms::marginal_probability(pipe.transfer, static_cast<long>(j) + 1, m);
        prod *= pm;
    }
    json r = report_base(cfg);
    r["probability"] = p;
    r["product_of_marginals"] = prod;
    r["independent"] = std::abs(p - prod) <= 1e-10;
    out.emit("probability.json", r.dump(2) + "\n");
    return 0;
}

int cmd_sample(const qms::ExperimentConfig& cfg, const Output& out, std::uint64_t seed) {
    auto pipe = qms::build_pipeline(cfg.def, cfg.meas);
    long n_steps = cfg.run.value("n_steps", 1000L);
    long n_traj = cfg.run.value("n_trajectories", 1L);

    std::vector<qms::Trajectory> trajs(n_traj);
    int workers = std::min<long>(n_workers(), n_traj);
    std::vector<std::thread> pool;
    std::atomic<long> next{0};
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (long t; (t = next.fetch_add(1)) < n_traj;)
                trajs[t] = qms::sample_trajectory(pipe.transfer, n_steps,
                                                  qms::derive_stream(seed, t));
        });
    for (auto& th : pool) th.join();

    std::ostringstream csv;
    csv << qms::provenance_header(cfg) << "# seed " << seed << "\n";
    csv << "trajectory_id,step,outcome_index,outcome_value\n";
    for (long t = 0; t < n_traj; ++t)
        for (std::size_t k = 0; k < trajs[t].outcomes.size(); ++k)
            csv << t << "," << (k + 1) << "," << trajs[t].outcomes[k] << ","
                << qms::fmt17(trajs[t].values[k]) << "\n";
    out.emit("sample.csv", csv.str());
    return 0;
}

int cmd_frequencies(const qms::ExperimentConfig& cfg, const Output& out) {
    auto pipe = qms::build_pipeline(cfg.def, cfg.meas);
    auto sd = qms::spectral_analysis(pipe.transfer);
    auto table = qms::flux_table(pipe.transfer, sd, cfg.meas, cfg.def.inter,
                                 cfg.def.sys_p.hamiltonian, cfg.def.sys_s.reference_state,
                                 cfg.def.rho_in);
    double mu = qms::asymptotic_mean(pipe.transfer, sd, cfg.meas);
    std::ostringstream csv;
    csv << qms::provenance_header(cfg) << "# mu_inf " << qms::fmt17(mu) << "\n";
    csv << "m,f_exact,f_zero,f_prime,residual\n";
    for (const auto& r : table)
        csv << qms::fmt17(r.m_value) << "," << qms::fmt17(r.f_exact) << ","
            << qms::fmt17(r.f_zero) << "," << qms::fmt17(r.f_prime) << ","
            << qms::fmt17(r.residual) << "\n";
    out.emit("frequencies.csv", csv.str());
    return 0;
}

int cmd_correlations(const qms::ExperimentConfig& cfg, const Output& out) {
    auto pipe = qms::build_pipeline(cfg.def, cfg.meas);
    auto sd = qms::spectral_analysis(pipe.transfer);
    long max_lag = cfg.run.value("lags", 30L);
    std::size_t a = cfg.run.value("outcome_a", 0UL);
    std::size_t b = cfg.run.value("outcome_b", 0UL);
    std::vector<qms::CorrelationRecord> table;
    for (long lag = 1; lag <= max_lag; ++lag)
        table.push_back(qms::exact_two_point(pipe.transfer, a, b, lag));
    double rate = qms::fit_decay_rate(table);
    std::ostringstream csv;
    csv << qms::provenance_header(cfg);
    csv << "# fitted_rate " << qms::fmt17(rate) << "\n# gap " << qms::fmt17(sd.gap)
        << "\n# gap_rate " << qms::fmt17(std::log(1.0 / (1.0 - sd.gap))) << "\n";
    csv << "lag,value\n";
    for (const auto& r : table) csv << r.lag << "," << qms::fmt17(r.value) << "\n";
    out.emit("correlations.csv", csv.str());
    return 0;
}

int cmd_ldp(const qms::ExperimentConfig& cfg, const Output& out) {
    auto pipe = qms::build_pipeline(cfg.def, cfg.meas);
    double a0 = cfg.run.value("alpha_min", -2.0), a1 = cfg.run.value("alpha_max", 2.0);
    int na = cfg.run.value("alpha_points", 41);
    auto curve = qms::lmgf_curve(pipe.transfer, cfg.meas, cfg.def.rho_in, a0, a1, na);

    std::ostringstream csv;
    csv << qms::provenance_header(cfg) << "alpha,Lambda,rho_plus\n";
    for (const auto& pt : curve)
        csv << qms::fmt17(pt.alpha) << "," << qms::fmt17(pt.lambda_value) << ","
            << qms::fmt17(pt.leading_modulus) << "\n";
    out.emit("ldp_lambda.csv", csv.str());

    double x0 = cfg.run.value("x_min", -0.9), x1 = cfg.run.value("x_max", 0.9);
    int nx = cfg.run.value("x_points", 19);
    std::ostringstream csv2;
    csv2 << qms::provenance_header(cfg) << "x,rate,exposed\n";
    for (int i = 0; i < nx; ++i) {
        double x = x0 + (x1 - x0) * i / double(nx - 1);
        auto pt = qms::rate_function(pipe.transfer, cfg.meas, cfg.def.rho_in, x);
        csv2 << qms::fmt17(pt.x) << "," << qms::fmt17(pt.rate) << "," << (pt.exposed ? 1 : 0)
             << "\n";
    }
    out.emit("ldp_rate.csv", csv2.str());
    return 0;
}

int cmd_eventually(const qms::ExperimentConfig& cfg, const Output& out) {
    auto pipe = qms::build_pipeline(cfg.def, cfg.meas);
    std::vector<std::vector<std::size_t>> subsets;
    if (cfg.run.contains("subsets"))
        subsets = parse_subsets(cfg.run["subsets"]);
    else
        for (std::size_t m = 0; m < cfg.meas.n_outcomes(); ++m) subsets.push_back({m});
    json r = report_base(cfg);
    r["results"] = json::array();
    for (const auto& s : subsets)
        r["results"].push_back(
            {{"subset", s}, {"probability", qms::eventually_probability(pipe.transfer, s)}});
    out.emit("eventually.json", r.dump(2) + "\n");
    return 0;
}

int cmd_validate(const qms::ExperimentConfig& cfg, const Output& out, int n_probes) {
    auto pipe = qms::build_pipeline(cfg.def, cfg.meas);
    const std::size_t mu = cfg.meas.n_outcomes();
    double max_diff = 0.0, worst_sum_defect = 0.0;
    long n_checked = 0;
    for (int n = 1; n <= n_probes; ++n) {
        std::vector<std::size_t> seq(n, 0);
        double total = 0.0;
        while (true) {
            std::vector<std::vector<std::size_t>> subsets;
            for (std::size_t m : seq) subsets.push_back({m});
            double transfer_p = qms::joint_probability(pipe.transfer, subsets);
            double oracle_p = qms::brute_force_joint(cfg.def.sys_s, cfg.def.sys_p, cfg.def.inter,
                                                     cfg.meas, cfg.def.rho_in, subsets);
            max_diff = std::max(max_diff, std::abs(transfer_p - oracle_p));
            total += oracle_p;
            ++n_checked;
            std::size_t pos = 0;
            while (pos < seq.size() && ++seq[pos] == mu) seq[pos++] = 0;
            if (pos == seq.size()) break;
        }
        worst_sum_defect = std::max(worst_sum_defect, std::abs(total - 1.0));
    }
    bool pass = max_diff <= 1e-10 && worst_sum_defect <= 1e-10;
    json r = report_base(cfg);
    r["n_probes"] = n_probes;
    r["sequences_checked"] = n_checked;
    r["max_abs_diff"] = max_diff;
    r["max_sum_defect"] = worst_sum_defect;
    r["pass"] = pass;
    out.emit("validate.json", r.dump(2) + "\n");
    return pass ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"repeated-interaction quantum measurement simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir;
    std::uint64_t seed_override = 0;
    bool force_json = false;
    app.add_option("-c,--config", config_path, "config file (JSON)")->required();
    app.add_option("-o,--out", out_dir, "output directory (default: stdout)");
    auto* seed_opt = app.add_option("--seed", seed_override, "override the config seed");
    app.add_flag("--json", force_json, "force JSON output to stdout");

    int n_probes = 3;
    auto* sub_spectrum = app.add_subcommand("spectrum", "eigenvalues, gap, ergodicity verdict");
    auto* sub_probability = app.add_subcommand("probability", "joint probability of a sequence");
    auto* sub_sample = app.add_subcommand("sample", "trajectory ensemble");
    auto* sub_frequencies = app.add_subcommand("frequencies", "asymptotic frequencies and fluxes");
    auto* sub_correlations = app.add_subcommand("correlations", "exact two-point correlations");
    auto* sub_ldp = app.add_subcommand("ldp", "large-deviation curves");
    auto* sub_eventually = app.add_subcommand("eventually", "eventually-event probabilities");
    auto* sub_validate = app.add_subcommand("validate", "brute-force oracle cross-check");
    sub_validate->add_option("--n-probes", n_probes, "max chain length")->check(CLI::Range(1, 6));
    for (auto* s : {sub_spectrum, sub_probability, sub_sample, sub_frequencies, sub_correlations,
                    sub_ldp, sub_eventually, sub_validate})
        s->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        qms::ExperimentConfig cfg = qms::load_config(config_path);
        std::uint64_t seed = seed_opt->count() ? seed_override
                                               : cfg.run.value("seed", std::uint64_t{1});
        Output out{force_json ? std::string() : out_dir};
        if (sub_spectrum->parsed()) return cmd_spectrum(cfg, out);
        if (sub_probability->parsed()) return cmd_probability(cfg, out);
        if (sub_sample->parsed()) return cmd_sample(cfg, out, seed);
        if (sub_frequencies->parsed()) return cmd_frequencies(cfg, out);
        if (sub_correlations->parsed()) return cmd_correlations(cfg, out);
        if (sub_ldp->parsed()) return cmd_ldp(cfg, out);
        if (sub_eventually->parsed()) return cmd_eventually(cfg, out);
        if (sub_validate->parsed()) return cmd_validate(cfg, out, n_probes);
    } catch (const qms::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const qms::Error& e) {
        std::cerr << "numerical precondition violated: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
