#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI/CLI.hpp>
#include <nlohmann/json.hpp>

#include "brwsim/config.hpp"
#include "brwsim/errors.hpp"
#include "brwsim/limit_gaussian.hpp"
#include "brwsim/moments.hpp"
#include "brwsim/occupation.hpp"
#include "brwsim/stats.hpp"
#include "brwsim/walk_analytics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace brwsim;

namespace {

constexpr const char* kToolVersion = "0.1.0";

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataIntegrityError("cannot write '" + path.string() + "'");
    out << text;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataIntegrityError("cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json stamped(const ExperimentConfig& cfg) {
    json j;
    j["tool"] = "brwsim";
    j["version"] = kToolVersion;
    j["config_hash"] = hash_hex(cfg.hash());
    return j;
}

// Checksummed JSON artifact: {"checksum": fnv1a(payload.dump()), "payload": ...}
void write_checksummed(const fs::path& path, const json& payload) {
    json wrapper;
    wrapper["checksum"] = hash_hex(fnv1a(payload.dump()));
    wrapper["payload"] = payload;
    write_text(path, wrapper.dump(2) + "\n");
}

json read_checksummed(const fs::path& path) {
    json wrapper = json::parse(read_text(path));
    const std::string want = wrapper.at("checksum").get<std::string>();
    const json payload = wrapper.at("payload");
    if (hash_hex(fnv1a(payload.dump())) != want)
        throw DataIntegrityError("checksum mismatch in '" + path.string() + "'");
    return payload;
}

fs::path records_path(const ExperimentConfig& cfg, double n) {
    std::ostringstream name;
    name << "ensemble_N" << n << "_h" << hash_hex(cfg.hash()) << ".jsonl";
    return fs::path(cfg.out_dir) / name.str();
}

fs::path summary_path(const ExperimentConfig& cfg, double n) {
    std::ostringstream name;
    name << "summary_N" << n << "_h" << hash_hex(cfg.hash()) << ".json";
    return fs::path(cfg.out_dir) / name.str();
}

// Replicate store: one JSONL line per completed replicate, keyed by
// (config hash, replicate index).  Reruns skip indices already present,
// so interrupted runs resume and repeated runs are idempotent.
Ensemble load_or_build_ensemble(const ExperimentConfig& cfg, double n) {
    const fs::path path = records_path(cfg, n);
    const std::string my_hash = hash_hex(cfg.hash());

    std::map<std::size_t, json> records;
    if (fs::exists(path)) {
        std::ifstream in(path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json rec = json::parse(line, nullptr, false);
            if (rec.is_discarded())
                throw DataIntegrityError("corrupt record in '" + path.string() + "'");
            if (rec.at("hash").get<std::string>() != my_hash)
                throw DataIntegrityError("mixed config hashes in '" + path.string() + "'");
            // key must be read before the move: json's operator= takes its
            // argument by value, gutting rec while the left side evaluates
            const std::size_t idx = rec.at("index").get<std::size_t>();
            records[idx] = std::move(rec);
        }
    }

    std::vector<std::size_t> missing;
    for (std::size_t i = 0; i < cfg.replicates; ++i)
        if (!records.count(i)) missing.push_back(i);

    if (!missing.empty()) {
        SimParams params = cfg.make_sim_params();
        EnsembleSpec spec;
        spec.base = params;
        spec.scale_n = n;
        spec.times = cfg.grid;
        spec.master_seed = cfg.seed;
        spec.workers = cfg.workers;

        // Run only the missing indices, each on its own RNG stream, so the
        // result is independent of scheduling and of what was resumed.
        params.horizon = n * cfg.grid.back();
        std::vector<double> abs_grid;
        for (double t : cfg.grid) abs_grid.push_back(n * t);
        params.record_grid = abs_grid;
        if (params.torus_side == 0) {
            CovMatrix q = covariance_matrix(params.kernel);
            params.torus_side =
                derived_torus_side(q, params.horizon, params.safety_multiplier);
        }
        if (params.init == InitKind::Burnin && params.t_burn <= 0.0)
            params.t_burn = double(params.torus_side);

        fs::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::app);
        for (std::size_t i : missing) {
            Rng rng(cfg.seed, i);
            json rec;
            rec["hash"] = my_hash;
            rec["index"] = i;
            try {
                Configuration c0 = params.init == InitKind::Burnin
                                       ? init_equilibrium(params, rng)
                                       : init_poisson(params, rng);
                RunResult r = run(params, std::move(c0), rng);
                rec["ok"] = true;
                rec["occupation"] = r.occupation_at_grid;
            } catch (const RateOverflow&) {
                rec["ok"] = false;
            }
            out << rec.dump() << "\n";
            records[i] = std::move(rec);
        }
    }

    Ensemble ens;
    ens.scale_n = n;
    ens.times.push_back(0.0);
    ens.times.insert(ens.times.end(), cfg.grid.begin(), cfg.grid.end());
    ens.attempted = cfg.replicates;
    for (std::size_t i = 0; i < cfg.replicates; ++i) {
        const json& rec = records.at(i);
        if (!rec.at("ok").get<bool>()) {
            ++ens.excluded;
            continue;
        }
        ens.paths.push_back(renormalize(cfg.grid,
                                        rec.at("occupation").get<std::vector<double>>(),
                                        n, cfg.theta, cfg.dimension));
    }
    return ens;
}

json summary_payload(const ExperimentConfig& cfg, const EnsembleSummary& s) {
    json j = stamped(cfg);
    j["scale_n"] = s.scale_n;
    j["times"] = s.times;
    j["mean"] = s.mean;
    j["mean_se"] = s.mean_se;
    j["cov"] = s.cov;
    j["cov_se"] = s.cov_se;
    j["fourth_central"] = s.fourth_central;
    j["replicates"] = s.replicates;
    j["excluded_fraction"] = s.excluded_fraction;
    j["valid"] = s.valid;
    return j;
}

double resolve_sigma_eq(const ExperimentConfig& cfg) {
    if (cfg.branching_type == "independent") return cfg.rho * cfg.theta;
    if (cfg.sigma_eq) return *cfg.sigma_eq;
    SimParams params = cfg.make_sim_params();
    params.horizon = 1.0;
    CovMatrix q = covariance_matrix(params.kernel);
    int side = params.torus_side > 0
                   ? params.torus_side
                   : derived_torus_side(q, 16.0, params.safety_multiplier);
    params.torus_side = side;
    std::cerr << "estimating sigma_eq (side " << side << ")...\n";
    SigmaEqEstimate est = estimate_sigma_eq(params, double(side), 16.0, 48,
                                            cfg.seed ^ 0x5eebull, cfg.workers);
    std::cerr << "sigma_eq ~= " << est.estimate << " +- " << est.se << "\n";
    return est.estimate;
}

// Reference matrix on the summary grid (leading 0 anchor row/col is zero).
std::vector<std::vector<double>> reference_cov(WalkAnalytics& analytics,
                                               const MomentModel& model, InitLaw init,
                                               double n, const std::vector<double>& grid) {
    const std::size_t g = grid.size() + 1;
    std::vector<std::vector<double>> ref(g, std::vector<double>(g, 0.0));
    for (std::size_t j = 0; j < grid.size(); ++j)
        for (std::size_t k = j; k < grid.size(); ++k) {
            double c = exact_prelimit_cov(analytics, model, init, n, grid[j], grid[k]);
            ref[j + 1][k + 1] = ref[k + 1][j + 1] = c;
        }
    return ref;
}

MomentModel model_from_config(const ExperimentConfig& cfg) {
    if (cfg.branching_type == "independent")
        return MomentModel::independent(cfg.theta, cfg.rho);
    MomentModel m;
    m.theta = cfg.theta;
    m.sigma_eq = resolve_sigma_eq(cfg);
    return m;
}

int cmd_analyze_kernel(const ExperimentConfig& cfg) {
    WalkAnalytics analytics(cfg.make_kernel());
    const int d = cfg.dimension;
    json j = stamped(cfg);
    j["kernel"] = analytics.kernel().name;
    j["dimension"] = d;
    json qj = json::array();
    for (int r = 0; r < d; ++r) {
        json row = json::array();
        for (int c = 0; c < d; ++c) row.push_back(analytics.Q()(r, c));
        qj.push_back(row);
    }
    j["Q"] = qj;
    j["det_Q"] = analytics.Q().det;

    Offset zero(std::size_t(d), 0);
    if (d >= 3) {
        QuadResult g = analytics.green(zero, 0.0);
        j["green_origin"] = g.value;
        j["green_origin_error"] = g.error;
    }

    json clt = json::array();
    std::vector<double> zero_real(std::size_t(d), 0.0);
    for (double t : {25.0, 100.0, 400.0}) {
        double a = analytics.return_probability(t);
        double ratio = a / analytics.gaussian_approx(t, zero_real);
        clt.push_back({{"t", t}, {"a00", a}, {"ratio_to_gaussian", ratio}});
    }
    j["local_clt"] = clt;

    json hs = json::array();
    for (double n : cfg.n_ladder)
        hs.push_back({{"N", n}, {"h_d", WalkAnalytics::norming(d, n)}});
    j["norming"] = hs;

    json clan = json::array();
    for (double t : {1.0, 2.0, 4.0, 8.0}) {
        json e = {{"T", t},
                  {"poisson", analytics.clan_contribution(t, InitLaw::Poisson).value}};
        if (d >= 3)
            e["equilibrium"] = analytics.clan_contribution(t, InitLaw::Equilibrium).value;
        clan.push_back(e);
    }
    j["clan_contribution"] = clan;

    fs::path path = fs::path(cfg.out_dir) / ("kernel_report_h" + hash_hex(cfg.hash()) + ".json");
    write_checksummed(path, j);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_simulate(const ExperimentConfig& cfg) {
    for (double n : cfg.n_ladder) {
        Ensemble ens = load_or_build_ensemble(cfg, n);
        EnsembleSummary s = summarize(ens);
        write_checksummed(summary_path(cfg, n), summary_payload(cfg, s));
        std::cout << "N=" << n << ": " << s.replicates << " replicates, "
                  << "Var(X_" << cfg.grid.back() << ") = "
                  << s.cov.back().back() << " +- " << s.cov_se.back().back()
                  << (s.valid ? "" : "  [INVALID: exclusions > 1%]") << "\n";
    }
    return 0;
}

int cmd_verify(const ExperimentConfig& cfg) {
    if (cfg.dimension < 3)
        throw UnsupportedDimension("limit verification needs d >= 3");
    WalkAnalytics analytics(cfg.make_kernel());
    MomentModel model = model_from_config(cfg);
    const InitLaw init = cfg.init_law();

    bool all_pass = true;
    std::vector<double> var_estimates, var_ses;
    for (double n : cfg.n_ladder) {
        fs::path spath = summary_path(cfg, n);
        if (!fs::exists(spath)) {
            Ensemble ens = load_or_build_ensemble(cfg, n);
            EnsembleSummary s = summarize(ens);
            write_checksummed(spath, summary_payload(cfg, s));
        }
        json payload = read_checksummed(spath);  // throws on corruption
        EnsembleSummary s;
        s.scale_n = payload.at("scale_n").get<double>();
        s.times = payload.at("times").get<std::vector<double>>();
        s.mean = payload.at("mean").get<std::vector<double>>();
        s.mean_se = payload.at("mean_se").get<std::vector<double>>();
        s.cov = payload.at("cov").get<std::vector<std::vector<double>>>();
        s.cov_se = payload.at("cov_se").get<std::vector<std::vector<double>>>();
        s.replicates = payload.at("replicates").get<std::size_t>();
        s.valid = payload.at("valid").get<bool>();
        if (payload.at("config_hash").get<std::string>() != hash_hex(cfg.hash()))
            throw DataIntegrityError("summary written under a different config hash");
        if (!s.valid) throw DataIntegrityError("ensemble marked invalid (exclusions > 1%)");

        auto ref = reference_cov(analytics, model, init, n, cfg.grid);
        ComparisonReport rep = compare(s, ref, "prelimit_exact");
        rep.init = cfg.init;
        rep.dimension = cfg.dimension;
        fs::path rpath = fs::path(cfg.out_dir) /
                         ("compare_N" + std::to_string(int(n)) + "_h" +
                          hash_hex(cfg.hash()) + ".json");
        write_text(rpath, to_json(rep) + "\n");
        std::cout << "N=" << n << " prelimit compare: max|z| = " << rep.max_abs_z
                  << (rep.pass ? "  PASS" : "  FAIL") << "\n";
        all_pass = all_pass && rep.pass;

        var_estimates.push_back(s.cov.back().back());
        var_ses.push_back(s.cov_se.back().back());
    }

    LimitCovariance law = limit_coefficient(analytics, init, cfg.theta,
                                            model.equilibrium_sigma());
    double t_last = cfg.grid.back();
    TrendReport trend = convergence_trend(cfg.n_ladder, var_estimates, var_ses,
                                          law.cov(t_last, t_last));
    fs::path tpath = fs::path(cfg.out_dir) / ("trend_h" + hash_hex(cfg.hash()) + ".json");
    write_text(tpath, to_json(trend) + "\n");
    std::cout << "limit " << law.variant_name() << " Var(X_" << t_last << ") = "
              << trend.limit_value << ", final relative gap = " << trend.final_gap
              << (trend.monotone ? " (monotone)" : " (not monotone)") << "\n";

    return all_pass ? 0 : 1;
}

int cmd_sample_limit(const ExperimentConfig& cfg) {
    if (cfg.dimension < 3)
        throw UnsupportedDimension("limit sampling needs d >= 3");
    WalkAnalytics analytics(cfg.make_kernel());
    double sigma_eq = resolve_sigma_eq(cfg);
    LimitCovariance law = limit_coefficient(analytics, cfg.init_law(), cfg.theta, sigma_eq);
    SampleResult res = sample_paths(law, cfg.grid, cfg.n_paths, cfg.seed);

    std::ostringstream csv;
    csv << "path";
    for (double t : res.times) csv << ",t" << t;
    csv << "\n";
    csv.setf(std::ios::scientific);
    csv.precision(17);
    for (std::size_t p = 0; p < res.paths.size(); ++p) {
        csv << p;
        for (double v : res.paths[p]) csv << "," << v;
        csv << "\n";
    }
    fs::path cpath = fs::path(cfg.out_dir) / ("limit_paths_h" + hash_hex(cfg.hash()) + ".csv");
    write_text(cpath, csv.str());

    json j = stamped(cfg);
    j["variant"] = law.variant_name();
    j["coefficient"] = law.coefficient;
    j["det_Q"] = law.det_q;
    j["sigma_eq"] = law.sigma_eq;
    j["jitter_used"] = res.jitter_used;
    j["n_paths"] = res.paths.size();
    if (law.variant == LimitVariant::SubFBM34) {
        double disc = subfbm_representation_check(law, cfg.grid);
        j["representation_check"] = disc;
        std::cout << "sub-fBM representation discrepancy: " << disc << "\n";
    }
    write_checksummed(fs::path(cfg.out_dir) /
                          ("limit_provenance_h" + hash_hex(cfg.hash()) + ".json"),
                      j);
    std::cout << law.variant_name() << " coefficient " << law.coefficient << ", "
              << res.paths.size() << " paths -> " << cpath.string() << "\n";
    return 0;
}

int cmd_report(const ExperimentConfig& cfg) {
    bool any_fail = false;
    bool found = false;
    for (const auto& entry : fs::directory_iterator(cfg.out_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("compare_", 0) == 0) {
            found = true;
            ComparisonReport r = comparison_from_json(read_text(entry.path()));
            std::cout << name << ": target " << r.target << ", N=" << r.scale_n
                      << ", max|z|=" << r.max_abs_z
                      << (r.pass ? "  PASS" : "  FAIL") << "\n";
            any_fail = any_fail || !r.pass;
        } else if (name.rfind("trend_", 0) == 0) {
            found = true;
            TrendReport t = trend_from_json(read_text(entry.path()));
            std::cout << name << ": final gap " << t.final_gap
                      << (t.monotone ? " (monotone)" : " (not monotone)") << "\n";
        }
    }
    if (!found) {
        std::cout << "no reports found in " << cfg.out_dir << "\n";
        return 0;
    }
    return any_fail ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"critical branching random walk: simulation and limit-law verification"};
    app.require_subcommand(1);

    std::string config_path, profile, out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;

    app.add_option("--config", config_path, "experiment config (JSON)");
    app.add_option("--profile", profile,
                   "built-in profile: d3-poisson, d3-equilibrium, d4, d5, state-dependent");
    app.add_option("--seed", seed, "override RNG master seed")->each([&](const std::string&) {
        seed_set = true;
    });
    app.add_option("--workers", workers, "worker thread count override");
    app.add_option("--out", out_dir, "output directory override");

    auto* c_analyze = app.add_subcommand("analyze-kernel", "kernel and walk analytics report");
    auto* c_sim = app.add_subcommand("simulate", "build replicate ensembles and summaries");
    auto* c_verify = app.add_subcommand("verify", "compare ensembles to exact formulas");
    auto* c_sample = app.add_subcommand("sample-limit", "sample the Gaussian limit law");
    auto* c_report = app.add_subcommand("report", "print stored reports");

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg;
        if (!config_path.empty())
            cfg = load_config(config_path);
        else if (!profile.empty())
            cfg = profile_config(profile);
        else
            throw ConfigError("either --config or --profile is required");
        if (seed_set) cfg.seed = seed;
        if (workers > 0) cfg.workers = workers;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        cfg.validate();

        if (c_analyze->parsed()) return cmd_analyze_kernel(cfg);
        if (c_sim->parsed()) return cmd_simulate(cfg);
        if (c_verify->parsed()) return cmd_verify(cfg);
        if (c_sample->parsed()) return cmd_sample_limit(cfg);
        if (c_report->parsed()) return cmd_report(cfg);
        throw ConfigError("no subcommand selected");
    } catch (const DataIntegrityError& e) {
        std::cerr << "data integrity error: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
