#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "disorder.hpp"
#include "format.hpp"
#include "gibbs.hpp"
#include "graph.hpp"
#include "mcmc.hpp"
#include "meanfield.hpp"
#include "measure.hpp"
#include "rng.hpp"

// Experiment layer: Kolmogorov-Smirnov comparison of rescaled magnetization
// laws against the centered Gaussian sigma^2(beta,h), replicated over
// independent disorder samples, and the standardized partition-function
// fluctuation statistic
//   (log Z - log E Ztilde - beta N m^2 / 2) / sqrt(beta^2 m^4 (1-p)/(4p)).
// Replica r always derives its seed as mix(baseSeed, r), so reports are
// reproducible bit-for-bit regardless of thread count.

namespace dising::stats {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Phi(x) for N(0, sigma2), via erfc (absolute error well below 1e-10).
inline double gaussian_cdf(double x, double sigma2) {
    if (!(sigma2 > 0.0)) throw std::domain_error("gaussian_cdf: sigma2 must be > 0");
    return 0.5 * std::erfc(-x / std::sqrt(2.0 * sigma2));
}

// sup_x |F_mu(x) - Phi(x)| for an atomic mu: at every atom both the left
// and right limits of F are compared. mu must carry unit mass (1e-6 slack).
inline double ks_distance(const WeightedMeasure& mu, double sigma2) {
    if (mu.empty()) throw std::invalid_argument("ks_distance: empty measure");
    if (std::abs(mu.total_mass() - 1.0) > 1e-6)
        throw std::domain_error("ks_distance: total mass must be 1 within 1e-6");
    double cum = 0.0, best = 0.0;
    for (const Atom& a : mu.atoms()) {
        const double phi = gaussian_cdf(a.position, sigma2);
        best = std::max(best, std::abs(cum - phi));
        cum += a.weight;
        best = std::max(best, std::abs(cum - phi));
    }
    return best;
}

inline double ks_distance(const std::vector<double>& samples, double sigma2) {
    return ks_distance(WeightedMeasure::from_samples(samples), sigma2);
}

enum class Method { exact, mcmc };

inline const char* method_name(Method m) { return m == Method::exact ? "exact" : "mcmc"; }

struct RunConfig {
    std::int64_t n = 0;
    double p = 1.0;
    double beta = 0.0;
    double h = 0.0;
    gibbs::Side side = gibbs::Side::both;
    Method method = Method::exact;
    std::int64_t replicas = 1;
    std::uint64_t seed = 1;
    std::int64_t sweeps = 10000;
    std::int64_t burnin = 1000;
    std::int64_t thin = 10;
    int threads = 1;

    gibbs::ModelParams model() const { return {n, p, beta, h}; }
};

struct ReplicaRow {
    std::int64_t replica = 0;
    std::uint64_t seed = 0;
    double ks = kNaN;
    double mean = kNaN;
    double var = kNaN;
    double stat = kNaN;
    double edge_z = kNaN;
};

struct Aggregate {
    std::int64_t replicas = 0;
    double mean = kNaN;      // clt: average of row means; fluct: sample mean of stats
    double variance = kNaN;  // clt: average of row variances; fluct: unbiased var of stats
    double ks = kNaN;        // clt: median of row ks; fluct: KS of the stat sample vs N(0,1)
    double ks_mean = kNaN;   // clt only
    double edge_z_mean = kNaN;  // fluct only
    double edge_z_var = kNaN;   // fluct only (unbiased)
};

struct ExperimentReport {
    std::string kind;          // "clt" or "partition-fluct"
    std::string metric = "ks";
    RunConfig config;
    double m = kNaN;           // mean-field centering used
    double sigma2 = kNaN;      // CLT variance (clt only)
    double log_e_ztilde = kNaN;  // fluct only
    std::vector<ReplicaRow> rows;
    Aggregate aggregate;
};

namespace detail {

template <class Fn>
inline void parallel_for(std::int64_t count, int threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const int workers = static_cast<int>(std::min<std::int64_t>(threads, count));
    std::atomic<std::int64_t> next{0};
    std::exception_ptr first_error = nullptr;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::int64_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline double median(std::vector<double> v) {
    if (v.empty()) return kNaN;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double sample_mean(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
    if (v.size() < 2) return kNaN;
    const double mu = sample_mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - mu) * (x - mu);
    return acc / static_cast<double>(v.size() - 1);
}

inline WeightedMeasure restrict_to_window(const WeightedMeasure& mu, std::int64_t lo,
                                          std::int64_t hi) {
    std::vector<Atom> kept;
    kept.reserve(mu.atoms().size());
    for (const Atom& a : mu.atoms())
        if (a.k >= lo && a.k <= hi) kept.push_back(a);
    return WeightedMeasure::make(std::move(kept));
}

}  // namespace detail

// Re-derive the aggregate block from per-replica rows (deterministic fold
// in replica order).
inline Aggregate aggregate_clt_rows(const std::vector<ReplicaRow>& rows) {
    Aggregate agg;
    agg.replicas = static_cast<std::int64_t>(rows.size());
    std::vector<double> ks, means, vars;
    ks.reserve(rows.size());
    for (const ReplicaRow& r : rows) {
        ks.push_back(r.ks);
        means.push_back(r.mean);
        vars.push_back(r.var);
    }
    agg.mean = detail::sample_mean(means);
    agg.variance = detail::sample_mean(vars);
    agg.ks = detail::median(ks);
    agg.ks_mean = detail::sample_mean(ks);
    return agg;
}

inline Aggregate aggregate_fluct_rows(const std::vector<ReplicaRow>& rows) {
    Aggregate agg;
    agg.replicas = static_cast<std::int64_t>(rows.size());
    std::vector<double> stats, zs;
    stats.reserve(rows.size());
    for (const ReplicaRow& r : rows) {
        stats.push_back(r.stat);
        zs.push_back(r.edge_z);
    }
    agg.mean = detail::sample_mean(stats);
    agg.variance = detail::sample_variance(stats);
    agg.ks = ks_distance(stats, 1.0);
    agg.edge_z_mean = detail::sample_mean(zs);
    agg.edge_z_var = detail::sample_variance(zs);
    return agg;
}

// Rescaled-magnetization CLT experiment. Exact mode enumerates the Gibbs
// law per disorder replica (p=1 uses the grouped fully-connected sum and
// supports large N); mcmc mode reads off thinned Glauber samples started
// in the targeted well (restricted-well sampling, an approximation at
// beta > 1). Measures are normalized before the KS comparison; the minus
// side is centered at -m.
//
// One-sided laws are additionally restricted to the typical total-spin
// window [ceil(Nm - sqrt(N) kappa), floor(Nm + sqrt(N) kappa)]: the
// conditioned CLT is a statement about typical configurations, and while
// the relative weight of the atypical far tail vanishes as N grows, at
// desk scale it still drags the low-temperature one-sided moments (the
// left tail toward k=0 is heavy). side=both uses the full law.
inline ExperimentReport clt_experiment(const RunConfig& cfg) {
    cfg.model().validate();
    if (cfg.replicas < 1) throw std::invalid_argument("clt_experiment: replicas must be >= 1");
    if (cfg.h > 0.0 && cfg.side != gibbs::Side::both)
        throw std::invalid_argument("clt_experiment: h > 0 requires side = both");
    if (!(cfg.beta > 0.0))
        throw std::invalid_argument("clt_experiment: beta must be > 0");

    const auto sol = meanfield::solve_magnetization(cfg.beta, cfg.h);
    if (!sol.sigma2)
        throw std::domain_error("clt_experiment: degenerate variance at the critical point");
    const double m_signed = (cfg.side == gibbs::Side::minus) ? -sol.m : sol.m;

    ExperimentReport report;
    report.kind = "clt";
    report.config = cfg;
    report.m = m_signed;
    report.sigma2 = *sol.sigma2;
    report.rows.assign(static_cast<std::size_t>(cfg.replicas), ReplicaRow{});

    const gibbs::ModelParams par = cfg.model();
    const bool one_sided = cfg.side != gibbs::Side::both;
    const auto window = meanfield::typical_window(par.n, par.p, m_signed);
    detail::parallel_for(cfg.replicas, cfg.threads, [&](std::int64_t r) {
        ReplicaRow row;
        row.replica = r;
        row.seed = rng::derive(cfg.seed, static_cast<std::uint64_t>(r));
        WeightedMeasure mu;
        if (cfg.method == Method::exact) {
            if (par.p == 1.0) {
                const auto part = gibbs::curie_weiss_partition(par);
                mu = gibbs::measure_from_partition(part, par.n, m_signed, cfg.side);
            } else {
                const auto g = graph::GraphSample::sample(par.n, par.p, row.seed);
                const auto part = gibbs::enumerate_partition(g, par);
                mu = gibbs::measure_from_partition(part, par.n, m_signed, cfg.side);
            }
            if (one_sided) mu = detail::restrict_to_window(mu, window.low_k, window.high_k);
        } else {
            const auto g = graph::GraphSample::sample(par.n, par.p, row.seed);
            const auto init = (cfg.side == gibbs::Side::minus)
                                  ? gibbs::SpinConfig::all_minus(par.n)
                                  : gibbs::SpinConfig::all_plus(par.n);
            const auto totals = mcmc::sample_chain(g, par, cfg.sweeps, cfg.burnin, cfg.thin,
                                                   rng::derive(row.seed, 1), init);
            std::vector<double> xs;
            xs.reserve(totals.size());
            const double scale = std::sqrt(static_cast<double>(par.n));
            for (std::int64_t k : totals) {
                if (cfg.side == gibbs::Side::plus && k <= 0) continue;
                if (cfg.side == gibbs::Side::minus && k > 0) continue;
                if (one_sided && (k < window.low_k || k > window.high_k)) continue;
                xs.push_back((static_cast<double>(k) -
                              static_cast<double>(par.n) * m_signed) / scale);
            }
            if (xs.empty())
                throw std::runtime_error("clt_experiment: no chain samples on requested side");
            mu = WeightedMeasure::from_samples(xs);
        }
        const WeightedMeasure normalized = mu.normalized();
        row.ks = ks_distance(normalized, *sol.sigma2);
        row.mean = normalized.mean();
        row.var = normalized.variance();
        report.rows[static_cast<std::size_t>(r)] = row;
    });

    report.aggregate = aggregate_clt_rows(report.rows);
    return report;
}

// Standardized fluctuation of log Z around the annealed tilted partition
// function. Requires p < 1 (the denominator vanishes at p = 1) and a
// strictly positive centering magnetization.
inline double partition_fluct_stat(double log_z, double log_e_ztilde,
                                   const gibbs::ModelParams& par, double m) {
    par.validate();
    if (par.p >= 1.0)
        throw std::domain_error("partition_fluct_stat: denominator degenerates at p = 1");
    if (!(m > 0.0 && m < 1.0))
        throw std::domain_error("partition_fluct_stat: requires m in (0,1)");
    const double dn = static_cast<double>(par.n);
    const double denom =
        std::sqrt(par.beta * par.beta * m * m * m * m * (1.0 - par.p) / (4.0 * par.p));
    return (log_z - log_e_ztilde - par.beta * dn * m * m / 2.0) / denom;
}

inline ExperimentReport partition_fluct_experiment(const RunConfig& cfg) {
    const gibbs::ModelParams par = cfg.model();
    par.validate();
    if (cfg.replicas < 1)
        throw std::invalid_argument("partition_fluct_experiment: replicas must be >= 1");
    if (par.p >= 1.0)
        throw std::invalid_argument("partition_fluct_experiment: requires p < 1");
    if (!(cfg.beta > 0.0))
        throw std::invalid_argument("partition_fluct_experiment: beta must be > 0");

    const auto sol = meanfield::solve_magnetization(cfg.beta, cfg.h);
    const disorder::TiltParams tp{par, sol.m};
    const double log_e_ztilde = disorder::expected_tilted_partition(tp);

    ExperimentReport report;
    report.kind = "partition-fluct";
    report.config = cfg;
    report.m = sol.m;
    report.log_e_ztilde = log_e_ztilde;
    report.rows.assign(static_cast<std::size_t>(cfg.replicas), ReplicaRow{});

    detail::parallel_for(cfg.replicas, cfg.threads, [&](std::int64_t r) {
        ReplicaRow row;
        row.replica = r;
        row.seed = rng::derive(cfg.seed, static_cast<std::uint64_t>(r));
        const auto g = graph::GraphSample::sample(par.n, par.p, row.seed);
        const auto part = gibbs::enumerate_partition(g, par);
        row.stat = partition_fluct_stat(part.log_z, log_e_ztilde, par, sol.m);
        const double dn = static_cast<double>(par.n);
        row.edge_z = (static_cast<double>(g.edge_count()) - par.p * dn * dn) /
                     std::sqrt(dn * dn * par.p * (1.0 - par.p));
        report.rows[static_cast<std::size_t>(r)] = row;
    });

    report.aggregate = aggregate_fluct_rows(report.rows);
    return report;
}

// ---- report serialization ------------------------------------------------
// JSON and CSV writers; every float goes through fmt::number, so identical
// runs give identical bytes. NaN fields are emitted as null / nan.

namespace detail {

inline std::string json_num(double v) {
    if (std::isnan(v)) return "null";
    if (std::isinf(v)) return v > 0 ? "1e999" : "-1e999";
    return fmt::number(v);
}

}  // namespace detail

inline std::string config_json(const RunConfig& cfg) {
    std::string out = "{";
    out += "\"n\":" + fmt::number(cfg.n);
    out += ",\"p\":" + fmt::number(cfg.p);
    out += ",\"beta\":" + fmt::number(cfg.beta);
    out += ",\"h\":" + fmt::number(cfg.h);
    out += ",\"side\":\"" + std::string(gibbs::side_name(cfg.side)) + "\"";
    out += ",\"method\":\"" + std::string(method_name(cfg.method)) + "\"";
    out += ",\"replicas\":" + fmt::number(cfg.replicas);
    out += ",\"seed\":" + fmt::number(cfg.seed);
    out += ",\"sweeps\":" + fmt::number(cfg.sweeps);
    out += ",\"burnin\":" + fmt::number(cfg.burnin);
    out += ",\"thin\":" + fmt::number(cfg.thin);
    out += ",\"threads\":" + fmt::number(static_cast<std::int64_t>(cfg.threads));
    out += "}";
    return out;
}

inline std::string report_json(const ExperimentReport& rep) {
    std::string out = "{";
    out += "\"kind\":\"" + rep.kind + "\"";
    out += ",\"metric\":\"" + rep.metric + "\"";
    out += ",\"config\":" + config_json(rep.config);
    out += ",\"derived\":{";
    out += "\"m\":" + detail::json_num(rep.m);
    out += ",\"sigma2\":" + detail::json_num(rep.sigma2);
    out += ",\"log_e_ztilde\":" + detail::json_num(rep.log_e_ztilde);
    out += "},\"rows\":[";
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const ReplicaRow& r = rep.rows[i];
        if (i) out.push_back(',');
        out += "{\"replica\":" + fmt::number(r.replica);
        out += ",\"seed\":" + fmt::number(r.seed);
        out += ",\"ks\":" + detail::json_num(r.ks);
        out += ",\"mean\":" + detail::json_num(r.mean);
        out += ",\"var\":" + detail::json_num(r.var);
        out += ",\"stat\":" + detail::json_num(r.stat);
        out += ",\"edge_z\":" + detail::json_num(r.edge_z);
        out += "}";
    }
    out += "],\"aggregate\":{";
    out += "\"replicas\":" + fmt::number(rep.aggregate.replicas);
    out += ",\"mean\":" + detail::json_num(rep.aggregate.mean);
    out += ",\"variance\":" + detail::json_num(rep.aggregate.variance);
    out += ",\"ks\":" + detail::json_num(rep.aggregate.ks);
    out += ",\"ks_mean\":" + detail::json_num(rep.aggregate.ks_mean);
    out += ",\"edge_z_mean\":" + detail::json_num(rep.aggregate.edge_z_mean);
    out += ",\"edge_z_var\":" + detail::json_num(rep.aggregate.edge_z_var);
    out += "}}\n";
    return out;
}

inline std::string report_csv(const ExperimentReport& rep) {
    std::string out = "replica,seed,ks,mean,var,stat\n";
    for (const ReplicaRow& r : rep.rows) {
        out += fmt::number(r.replica);
        out.push_back(',');
        out += fmt::number(r.seed);
        out.push_back(',');
        out += fmt::number(r.ks);
        out.push_back(',');
        out += fmt::number(r.mean);
        out.push_back(',');
        out += fmt::number(r.var);
        out.push_back(',');
        out += fmt::number(r.stat);
        out.push_back('\n');
    }
    return out;
}

}  // namespace dising::stats
