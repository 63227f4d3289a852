#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "disorder.hpp"
#include "expansion.hpp"
#include "format.hpp"
#include "gibbs.hpp"
#include "graph.hpp"
#include "mcmc.hpp"
#include "meanfield.hpp"
#include "stats.hpp"

// Command-line front end. One executable, subcommand per task:
//   meanfield | expansion-check | enumerate | clt | partition-fluct |
//   mcmc | nu-table
// All flags are global and may come from a flat `key = value` config file
// (--config FILE); explicit flags override file values. DILUTE_ISING_THREADS
// provides the default for --threads. Exit codes: 0 ok, 2 usage, 1 runtime.

namespace dising::cli {

namespace detail {

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
    if (!out) throw std::runtime_error("failed writing output file: " + path);
}

inline std::string kv(const char* key, const std::string& value) {
    return std::string(" ") + key + "=" + value;
}

inline std::string summary_suffix(const stats::ExperimentReport& rep) {
    std::string line;
    line += kv("replicas", fmt::number(rep.aggregate.replicas));
    line += kv("mean", fmt::number(rep.aggregate.mean));
    line += kv("var", fmt::number(rep.aggregate.variance));
    line += kv("ks", fmt::number(rep.aggregate.ks));
    return line;
}

inline void emit_report(const stats::ExperimentReport& rep, const std::string& out,
                        std::string summary) {
    summary.push_back('\n');
    std::fputs(summary.c_str(), stdout);
    if (out == "-") {
        std::fputs(stats::report_json(rep).c_str(), stdout);
    } else if (!out.empty()) {
        write_file(out + ".json", stats::report_json(rep));
        write_file(out + ".csv", stats::report_csv(rep));
    }
}

}  // namespace detail

inline int run(int argc, const char* const* argv) {
    CLI::App app{"Ising models on directed Erdos-Renyi graphs: exact partition sums,\n"
                 "disorder-averaged tilts, Glauber dynamics and CLT experiments."};
    app.require_subcommand(0, 1);
    // the field flag is --h, so help must not claim the single-dash -h
    app.set_help_flag("--help", "print usage and exit");
    app.set_config("--config", "", "flat key = value config file; flags override");

    stats::RunConfig cfg;
    std::string side_str = "plus";
    std::string method_str = "exact";
    std::string out;

    app.add_option("--n", cfg.n, "number of spins N");
    app.add_option("--p", cfg.p, "edge probability p in (0,1]");
    app.add_option("--beta", cfg.beta, "inverse temperature");
    app.add_option("--h", cfg.h, "external field (>= 0)");
    app.add_option("--replicas", cfg.replicas, "independent disorder replicas");
    app.add_option("--seed", cfg.seed, "base seed; replica r uses mix(seed, r)");
    app.add_option("--side", side_str, "conditioning side")
        ->check(CLI::IsMember({"plus", "minus", "both"}));
    app.add_option("--method", method_str, "law construction")
        ->check(CLI::IsMember({"exact", "mcmc"}));
    app.add_option("--sweeps", cfg.sweeps, "Glauber sweeps after burn-in");
    app.add_option("--burnin", cfg.burnin, "Glauber burn-in sweeps");
    app.add_option("--thin", cfg.thin, "record every thin-th sweep");
    app.add_option("--out", out, "output path; '-' prints JSON to stdout");
    app.add_option("--threads", cfg.threads, "worker threads for replica loops")
        ->envname("DILUTE_ISING_THREADS");

    CLI::App* cmd_meanfield =
        app.add_subcommand("meanfield", "solve m = tanh(beta(m+h)) and the CLT variance");
    CLI::App* cmd_expansion =
        app.add_subcommand("expansion-check", "remainder diagnostics for the log-MGF series");
    CLI::App* cmd_enumerate =
        app.add_subcommand("enumerate", "exact partition data for one disorder sample");
    CLI::App* cmd_clt =
        app.add_subcommand("clt", "KS comparison of the rescaled magnetization law");
    CLI::App* cmd_fluct =
        app.add_subcommand("partition-fluct", "standardized log-partition fluctuation");
    CLI::App* cmd_mcmc = app.add_subcommand("mcmc", "Glauber chain totalSpin trace");
    CLI::App* cmd_nu = app.add_subcommand("nu-table", "pair counts nu_N(k,l,n)");
    // Every option lives on the root app (so the config file and fallthrough
    // share one namespace); repeat them in each subcommand's help text.
    static const char* kGlobalFlagHelp =
        "Global flags (valid before or after the subcommand):\n"
        "  --n INT         number of spins N\n"
        "  --p FLOAT       edge probability p in (0,1]\n"
        "  --beta FLOAT    inverse temperature\n"
        "  --h FLOAT       external field (>= 0)\n"
        "  --replicas INT  independent disorder replicas\n"
        "  --seed UINT     base seed; replica r uses mix(seed, r)\n"
        "  --side SIDE     plus|minus|both\n"
        "  --method M      exact|mcmc\n"
        "  --sweeps INT    Glauber sweeps after burn-in\n"
        "  --burnin INT    Glauber burn-in sweeps\n"
        "  --thin INT      record every thin-th sweep\n"
        "  --out PATH      output path; '-' prints JSON to stdout\n"
        "  --threads INT   worker threads (env DILUTE_ISING_THREADS)\n"
        "  --config FILE   flat key = value config file; flags override";
    for (CLI::App* sub : {cmd_meanfield, cmd_expansion, cmd_enumerate, cmd_clt, cmd_fluct,
                          cmd_mcmc, cmd_nu}) {
        sub->fallthrough();
        sub->footer(kGlobalFlagHelp);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);  // --help and friends: exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (app.get_subcommands().empty()) {
        std::fputs(app.help().c_str(), stderr);
        return 2;
    }

    const auto missing = [&](std::initializer_list<const char*> flags) {
        std::string lack;
        for (const char* f : flags)
            if (app.count(f) == 0) lack += std::string(lack.empty() ? "" : ", ") + f;
        if (!lack.empty())
            std::fprintf(stderr, "missing required flag(s): %s\n", lack.c_str());
        return !lack.empty();
    };

    cfg.side = side_str == "plus"    ? gibbs::Side::plus
               : side_str == "minus" ? gibbs::Side::minus
                                     : gibbs::Side::both;
    cfg.method = method_str == "exact" ? stats::Method::exact : stats::Method::mcmc;
    // Field conditioning concerns the full law; pick that default when the
    // user gave a field but no explicit side.
    if (cfg.h > 0.0 && app.count("--side") == 0) cfg.side = gibbs::Side::both;

    try {
        if (app.got_subcommand(cmd_meanfield)) {
            if (missing({"--beta"})) return 2;
            const auto sol = meanfield::solve_magnetization(cfg.beta, cfg.h);
            std::string line = "meanfield";
            line += detail::kv("beta", fmt::number(sol.beta));
            line += detail::kv("h", fmt::number(sol.h));
            line += detail::kv("m", fmt::number(sol.m));
            line += detail::kv("sigma2", sol.sigma2 ? fmt::number(*sol.sigma2) : "degenerate");
            line += detail::kv("residual", fmt::number(sol.residual));
            line.push_back('\n');
            std::fputs(line.c_str(), stdout);
            if (!out.empty()) {
                std::string json = "{\"beta\":" + fmt::number(sol.beta) +
                                   ",\"h\":" + fmt::number(sol.h) +
                                   ",\"m\":" + fmt::number(sol.m) + ",\"sigma2\":" +
                                   (sol.sigma2 ? fmt::number(*sol.sigma2) : "null") +
                                   ",\"residual\":" + fmt::number(sol.residual) + "}\n";
                if (out == "-") std::fputs(json.c_str(), stdout);
                else detail::write_file(out, json);
            }
            return 0;
        }

        if (app.got_subcommand(cmd_expansion)) {
            const double p = app.count("--p") ? cfg.p : 0.3;
            if (!(p > 0.0 && p < 1.0)) {
                std::fprintf(stderr, "expansion-check: p must be in (0,1)\n");
                return 2;
            }
            // |F - S4|/z^5 along halvings of z: bounded ratio drift is the
            // signature of the O(z^5) remainder.
            std::vector<double> ratios;
            double z = 0.1;
            for (int i = 0; i <= 5; ++i, z *= 0.5)
                ratios.push_back(std::abs(expansion::big_F(p, z) -
                                          expansion::series_F(p, z, 4)) / std::pow(z, 5));
            double lo = ratios[0], hi = ratios[0];
            for (double r : ratios) { lo = std::min(lo, r); hi = std::max(hi, r); }
            std::string line = "expansion-check";
            line += detail::kv("p", fmt::number(p));
            line += detail::kv("ratio_min", fmt::number(lo));
            line += detail::kv("ratio_max", fmt::number(hi));
            line += detail::kv("drift", fmt::number(hi / lo));
            line.push_back('\n');
            std::fputs(line.c_str(), stdout);
            if (!out.empty()) {
                std::string json = "{\"p\":" + fmt::number(p) + ",\"ratios\":[";
                for (std::size_t i = 0; i < ratios.size(); ++i) {
                    if (i) json.push_back(',');
                    json += fmt::number(ratios[i]);
                }
                json += "],\"drift\":" + fmt::number(hi / lo) + "}\n";
                if (out == "-") std::fputs(json.c_str(), stdout);
                else detail::write_file(out, json);
            }
            return 0;
        }

        if (app.got_subcommand(cmd_enumerate)) {
            if (missing({"--n", "--p", "--beta"})) return 2;
            const gibbs::ModelParams par = cfg.model();
            par.validate();
            if (par.n > gibbs::kDefaultEnumerationCap) {
                std::fprintf(stderr, "enumerate: N = %lld exceeds the enumeration cap %lld\n",
                             static_cast<long long>(par.n),
                             static_cast<long long>(gibbs::kDefaultEnumerationCap));
                return 2;
            }
            const auto g = graph::GraphSample::sample(par.n, par.p, cfg.seed);
            const auto part = gibbs::enumerate_partition(g, par);
            const double m = (par.beta > 0.0)
                                 ? meanfield::solve_magnetization(par.beta, par.h).m
                                 : 0.0;
            std::string line = "enumerate";
            line += detail::kv("n", fmt::number(par.n));
            line += detail::kv("p", fmt::number(par.p));
            line += detail::kv("beta", fmt::number(par.beta));
            line += detail::kv("h", fmt::number(par.h));
            line += detail::kv("seed", fmt::number(cfg.seed));
            line += detail::kv("logZ", fmt::number(part.log_z));
            line += detail::kv("edges", fmt::number(g.edge_count()));
            line.push_back('\n');
            std::fputs(line.c_str(), stdout);
            if (out == "-") {
                std::string json = "{\"logZ\":" + fmt::number(part.log_z) +
                                   ",\"edges\":" + fmt::number(g.edge_count()) +
                                   ",\"log_weight_by_k\":[";
                for (std::size_t i = 0; i < part.log_weight_by_k.size(); ++i) {
                    if (i) json.push_back(',');
                    json += "[" + fmt::number(part.log_weight_by_k[i].first) + "," +
                            fmt::number(part.log_weight_by_k[i].second) + "]";
                }
                json += "]}\n";
                std::fputs(json.c_str(), stdout);
            } else if (!out.empty()) {
                const auto mu = gibbs::measure_from_partition(part, par.n, m, cfg.side);
                detail::write_file(out, mu.to_csv());
            }
            return 0;
        }

        if (app.got_subcommand(cmd_clt)) {
            if (missing({"--n", "--p", "--beta"})) return 2;
            const auto rep = stats::clt_experiment(cfg);
            std::string line = "clt";
            line += detail::kv("n", fmt::number(cfg.n));
            line += detail::kv("p", fmt::number(cfg.p));
            line += detail::kv("beta", fmt::number(cfg.beta));
            line += detail::kv("h", fmt::number(cfg.h));
            line += detail::kv("side", gibbs::side_name(cfg.side));
            line += detail::kv("method", stats::method_name(cfg.method));
            line += detail::kv("sigma2", fmt::number(rep.sigma2));
            line += detail::summary_suffix(rep);
            detail::emit_report(rep, out, line);
            return 0;
        }

        if (app.got_subcommand(cmd_fluct)) {
            if (missing({"--n", "--p", "--beta"})) return 2;
            const auto rep = stats::partition_fluct_experiment(cfg);
            std::string line = "partition-fluct";
            line += detail::kv("n", fmt::number(cfg.n));
            line += detail::kv("p", fmt::number(cfg.p));
            line += detail::kv("beta", fmt::number(cfg.beta));
            line += detail::kv("h", fmt::number(cfg.h));
            line += detail::summary_suffix(rep);
            line += detail::kv("edge_z_mean", fmt::number(rep.aggregate.edge_z_mean));
            detail::emit_report(rep, out, line);
            return 0;
        }

        if (app.got_subcommand(cmd_mcmc)) {
            if (missing({"--n", "--p", "--beta"})) return 2;
            const gibbs::ModelParams par = cfg.model();
            par.validate();
            const auto g = graph::GraphSample::sample(par.n, par.p, cfg.seed);
            const auto totals = mcmc::sample_chain(g, par, cfg.sweeps, cfg.burnin, cfg.thin,
                                                   rng::derive(cfg.seed, 1));
            double mean_total = 0.0;
            for (std::int64_t k : totals) mean_total += static_cast<double>(k);
            if (!totals.empty()) mean_total /= static_cast<double>(totals.size());
            std::string line = "mcmc";
            line += detail::kv("n", fmt::number(par.n));
            line += detail::kv("p", fmt::number(par.p));
            line += detail::kv("beta", fmt::number(par.beta));
            line += detail::kv("h", fmt::number(par.h));
            line += detail::kv("sweeps", fmt::number(cfg.sweeps));
            line += detail::kv("burnin", fmt::number(cfg.burnin));
            line += detail::kv("thin", fmt::number(cfg.thin));
            line += detail::kv("samples", fmt::number(static_cast<std::int64_t>(totals.size())));
            line += detail::kv("mean_totalSpin", fmt::number(mean_total));
            line.push_back('\n');
            std::fputs(line.c_str(), stdout);
            if (out == "-") {
                std::string json = "{\"totals\":[";
                for (std::size_t i = 0; i < totals.size(); ++i) {
                    if (i) json.push_back(',');
                    json += fmt::number(totals[i]);
                }
                json += "]}\n";
                std::fputs(json.c_str(), stdout);
            } else if (!out.empty()) {
                detail::write_file(out, mcmc::chain_csv(totals, cfg.burnin, cfg.thin));
            }
            return 0;
        }

        if (app.got_subcommand(cmd_nu)) {
            if (missing({"--n"})) return 2;
            if (cfg.n < 1 || cfg.n > 64) {
                std::fprintf(stderr, "nu-table: N must be in [1,64]\n");
                return 2;
            }
            const std::string csv = disorder::nu_table_csv(cfg.n);
            std::size_t rows = 0;
            for (char c : csv) rows += (c == '\n') ? 1 : 0;
            --rows;  // header
            std::string line = "nu-table";
            line += detail::kv("n", fmt::number(cfg.n));
            line += detail::kv("rows", fmt::number(static_cast<std::int64_t>(rows)));
            line.push_back('\n');
            std::fputs(line.c_str(), stdout);
            if (out == "-") std::fputs(csv.c_str(), stdout);
            else if (!out.empty()) detail::write_file(out, csv);
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

}  // namespace dising::cli
