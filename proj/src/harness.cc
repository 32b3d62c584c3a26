#include "maxcon/harness.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <limits>
#include <thread>

namespace maxcon {

using nlohmann::json;

std::string_view to_string(Method method) {
    switch (method) {
    case Method::ransac:
        return "ransac";
    case Method::ibco:
        return "ibco";
    case Method::ransac_ibco:
        return "ransac+ibco";
    }
    return "unknown";
}

Method method_from_string(std::string_view name) {
    for (Method m : {Method::ransac, Method::ibco, Method::ransac_ibco})
        if (to_string(m) == name)
            return m;
    throw std::invalid_argument("unknown method: " + std::string(name));
}

Eigen::VectorXd consensus_set_fit(const ModelEstimator &model, const Estimate &estimate) {
    const auto idx = estimate.inlier_indices();
    if (idx.size() < model.minimal_sample_size())
        return estimate.x;
    const auto fit = model.least_squares(idx);
    if (!fit)
        return estimate.x;
    return model.project(*fit).value_or(estimate.x);
}

std::optional<Eigen::MatrixXd> pixel_model(const ModelEstimator &model, const Eigen::VectorXd &x) {
    if (const auto *h = dynamic_cast<const HomographyProblem *>(&model))
        return Eigen::MatrixXd(h->to_matrix(x));
    if (const auto *f = dynamic_cast<const FundamentalProblem *>(&model))
        return Eigen::MatrixXd(f->to_matrix(x));
    return std::nullopt;
}

RunRecord run_method(const ModelEstimator &model, Method method, std::uint64_t seed,
                     const MethodOptions &options, const GroundTruth *truth) {
    RunRecord rec;
    rec.family = model.family();
    rec.method = method;
    rec.seed = seed;
    rec.n = model.size();

    using clock = std::chrono::steady_clock;
    const auto start = clock::now();

    std::optional<RansacResult> ransac;
    if (method != Method::ibco) {
        RansacConfig cfg = options.ransac;
        cfg.seed = seed;
        ransac = run_ransac(model, cfg);
        rec.ransac_iterations = ransac->iterations;
        rec.ransac_polished = ransac->polished;
    }

    if (method == Method::ransac) {
        rec.estimate = ransac->estimate;
        rec.initial_consensus = rec.estimate.consensus;
        rec.ransac_consensus = rec.estimate.consensus;
    } else {
        Eigen::VectorXd x0;
        if (ransac)
            x0 = ransac->estimate.x;
        else if (options.x0)
            x0 = *options.x0;
        else
            x0 = random_init(model, seed);
        if (x0.size() != model.dimension())
            throw std::invalid_argument("starting point has the wrong dimension");

        const ConsensusInstance inst = calibrate_domain_margin(model.instance(), x0);
        const PostStep post = [&model](const Eigen::VectorXd &x) { return model.project(x); };
        IbcoOptions ibco_options;
        ibco_options.bco = options.bco;
        IbcoResult res = run_ibco(inst, x0, post, ibco_options);

        rec.initial_consensus = consensus_count(inst, x0);
        if (ransac)
            rec.ransac_consensus = rec.initial_consensus;
        rec.estimate = std::move(res.estimate);
        rec.solver_failure = res.solver_failure;
        rec.bisection = std::move(res.trace);
    }
    rec.runtime_seconds = std::chrono::duration<double>(clock::now() - start).count();
    rec.consensus = rec.estimate.consensus;
    rec.model_matrix = pixel_model(model, rec.estimate.x);

    if (truth && truth->planted_inliers() > 0)
        rec.e_ls = e_ls(model.instance(), *truth, consensus_set_fit(model, rec.estimate));
    return rec;
}

namespace {

json vec_json(const Eigen::VectorXd &v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const Eigen::MatrixXd &m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        rows.push_back(vec_json(m.row(r).transpose()));
    return rows;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json record_to_json(const RunRecord &rec) {
    json j;
    j["family"] = std::string(to_string(rec.family));
    j["method"] = std::string(to_string(rec.method));
    j["seed"] = rec.seed;
    j["n"] = rec.n;
    j["consensus"] = rec.consensus;
    j["initial_consensus"] = rec.initial_consensus;
    j["ransac_consensus"] = rec.ransac_consensus ? json(*rec.ransac_consensus) : json(nullptr);
    j["runtime_seconds"] = rec.runtime_seconds;
    j["e_ls"] = rec.e_ls ? finite_or_null(*rec.e_ls) : json(nullptr);
    j["x"] = vec_json(rec.estimate.x);
    j["parameter_frame"] = parameter_frame(rec.family);
    j["inliers"] = rec.estimate.inlier_indices();
    if (rec.model_matrix)
        j["model_matrix"] = mat_json(*rec.model_matrix);
    j["solver_failure"] = rec.solver_failure;
    if (rec.method != Method::ibco)
        j["ransac"] = {{"iterations", rec.ransac_iterations}, {"polished", rec.ransac_polished}};
    if (rec.bisection) {
        json steps = json::array();
        for (const auto &s : rec.bisection->steps) {
            json cycles = json::array();
            for (const auto &c : s.bco.trace)
                cycles.push_back({{"cycle", c.cycle},
                                  {"objective_after_y", c.objective_after_y},
                                  {"objective_after_xs", c.objective_after_xs},
                                  {"consensus", c.consensus},
                                  {"status", to_string(c.status)},
                                  {"kkt_residual", c.kkt_residual},
                                  {"accepted", c.accepted}});
            steps.push_back({{"delta_low", s.delta_low},
                             {"delta_high", s.delta_high},
                             {"delta", s.delta},
                             {"achieved", s.achieved},
                             {"bco_consensus", s.bco_consensus},
                             {"adopted", s.adopted},
                             {"next_low", s.next_low},
                             {"next_high", s.next_high},
                             {"bco_converged_to_zero", s.bco.converged_to_zero},
                             {"bco_objective", s.bco.state.objective},
                             {"bco_cycles", std::move(cycles)}});
        }
        j["bisection"] = {{"steps", std::move(steps)},
                          {"final_low", rec.bisection->final_low},
                          {"final_high", rec.bisection->final_high}};
    }
    return j;
}

void ExperimentConfig::validate() const {
    generator.validate();
    if (runs < 1)
        throw std::invalid_argument("runs must be at least 1");
    if (methods.empty())
        throw std::invalid_argument("at least one method is required");
    if (etas.empty())
        throw std::invalid_argument("at least one eta value is required");
    for (double eta : etas)
        if (!(eta >= 0.0 && eta <= 100.0))
            throw std::invalid_argument("eta values must lie in [0, 100]");
    if (ransac_max_iterations < 1)
        throw std::invalid_argument("max_iterations must be at least 1");
    if (!(tolerance > 0.0))
        throw std::invalid_argument("tolerance must be positive");
}

ExperimentConfig experiment_config_from_json(const json &j) {
    if (!j.is_object())
        throw InputError("experiment config: expected an object");
    ExperimentConfig cfg;
    json gen = json::object();
    auto count = [](const std::string &key, const json &v) {
        if (!v.is_number_integer() || v.get<long long>() < 0)
            throw std::invalid_argument(key + ": expected a nonnegative integer");
        return v.get<std::uint64_t>();
    };
    try {
        for (const auto &[key, value] : j.items()) {
            if (key == "methods") {
                cfg.methods.clear();
                for (const auto &m : value)
                    cfg.methods.push_back(method_from_string(m.get<std::string>()));
            } else if (key == "etas") {
                cfg.etas = value.get<std::vector<double>>();
            } else if (key == "runs") {
                cfg.runs = count(key, value);
            } else if (key == "seed") {
                cfg.seed = count(key, value);
            } else if (key == "max_iterations") {
                cfg.ransac_max_iterations = count(key, value);
            } else if (key == "tolerance") {
                cfg.tolerance = value.get<double>();
            } else if (key != "eta") {
                gen[key] = value;
            }
        }
    } catch (const json::exception &e) {
        throw InputError(std::string("experiment config: ") + e.what());
    } catch (const std::invalid_argument &e) {
        throw InputError(std::string("experiment config: ") + e.what());
    }
    cfg.generator = generator_config_from_json(gen);
    try {
        cfg.validate();
    } catch (const std::invalid_argument &e) {
        throw InputError(std::string("experiment config: ") + e.what());
    }
    return cfg;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t instance_seed(std::uint64_t base, std::size_t eta_index, std::size_t run) {
    return splitmix64(splitmix64(base) ^ splitmix64((static_cast<std::uint64_t>(eta_index) << 32) | run));
}

std::size_t worker_count_from_env() {
    if (const char *env = std::getenv("MAXCON_THREADS")) {
        char *end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

SweepResult run_sweep(const ExperimentConfig &config, std::size_t workers) {
    config.validate();
    const std::size_t jobs = config.etas.size() * config.runs;
    const std::size_t per_job = config.methods.size();
    SweepResult result;
    result.runs.resize(jobs * per_job);

    MethodOptions options;
    options.ransac.max_iterations = config.ransac_max_iterations;
    options.bco.socp.tolerance = config.tolerance;

    // Each job owns its instance and writes only its own slots.
    auto do_job = [&](std::size_t job) {
        const std::size_t e = job / config.runs, r = job % config.runs;
        GeneratorConfig gen = config.generator;
        gen.eta = config.etas[e];
        gen.seed = instance_seed(config.seed, e, r);
        for (std::size_t m = 0; m < per_job; ++m) {
            SweepRun &slot = result.runs[job * per_job + m];
            slot.eta_index = e;
            slot.run = r;
            slot.instance_seed = gen.seed;
            slot.method = config.methods[m];
        }
        try {
            const GeneratedProblem g = generate(gen);
            const auto model = make_estimator(g.data);
            for (std::size_t m = 0; m < per_job; ++m) {
                SweepRun &slot = result.runs[job * per_job + m];
                slot.planted_inliers = g.truth.planted_inliers();
                try {
                    slot.record = run_method(*model, slot.method, splitmix64(gen.seed + 1), options, &g.truth);
                } catch (const std::exception &ex) {
                    slot.error = ex.what();
                }
            }
        } catch (const std::exception &ex) {
            for (std::size_t m = 0; m < per_job; ++m)
                result.runs[job * per_job + m].error = ex.what();
        }
    };

    workers = std::max<std::size_t>(1, std::min(workers, jobs));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t job; (job = next.fetch_add(1)) < jobs;)
            do_job(job);
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (auto &t : pool)
            t.join();
    }
    result.rows = aggregate(config, result.runs);
    return result;
}

std::vector<SweepRow> aggregate(const ExperimentConfig &config, const std::vector<SweepRun> &runs) {
    std::vector<SweepRow> rows;
    for (std::size_t e = 0; e < config.etas.size(); ++e) {
        // RANSAC consensus per run, for the paired relative difference.
        std::vector<std::optional<std::size_t>> ransac_by_run(config.runs);
        for (const auto &sr : runs)
            if (sr.eta_index == e && sr.method == Method::ransac && sr.record)
                ransac_by_run[sr.run] = sr.record->consensus;
        const bool have_ransac =
            std::find(config.methods.begin(), config.methods.end(), Method::ransac) != config.methods.end();

        for (Method m : config.methods) {
            SweepRow row;
            row.eta = config.etas[e];
            row.method = m;
            double sum = 0.0, sum_rt = 0.0, sum_els = 0.0, sum_rel = 0.0;
            std::size_t paired = 0;
            std::vector<double> values;
            for (const auto &sr : runs) {
                if (sr.eta_index != e || sr.method != m)
                    continue;
                if (!sr.record) {
                    ++row.failures;
                    continue;
                }
                const RunRecord &rec = *sr.record;
                ++row.runs;
                if (rec.solver_failure)
                    ++row.solver_warnings;
                const auto c = static_cast<double>(rec.consensus);
                values.push_back(c);
                sum += c;
                sum_rt += rec.runtime_seconds;
                sum_els += rec.e_ls.value_or(std::numeric_limits<double>::quiet_NaN());
                if (const auto &rc = ransac_by_run[sr.run]) {
                    sum_rel += (c - static_cast<double>(*rc)) / std::max(1.0, static_cast<double>(*rc));
                    ++paired;
                }
            }
            if (row.runs > 0) {
                const double k = static_cast<double>(row.runs);
                row.consensus_mean = sum / k;
                row.runtime_mean = sum_rt / k;
                row.e_ls_mean = sum_els / k;
                double ss = 0.0;
                for (double v : values)
                    ss += (v - row.consensus_mean) * (v - row.consensus_mean);
                row.consensus_std = row.runs > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
            } else {
                row.consensus_mean = row.runtime_mean = row.e_ls_mean = std::numeric_limits<double>::quiet_NaN();
            }
            if (have_ransac && paired > 0)
                row.rel_diff_to_ransac = sum_rel / static_cast<double>(paired);
            rows.push_back(row);
        }
    }
    return rows;
}

namespace {

struct Num {
    double v;
};

std::ostream &operator<<(std::ostream &os, Num n) {
    if (std::isnan(n.v))
        return os;  // empty cell
    if (std::isinf(n.v))
        return os << (n.v > 0 ? "inf" : "-inf");
    return os << std::setprecision(17) << n.v;
}

}  // namespace

void write_summary_csv(std::ostream &out, Family family, const std::vector<SweepRow> &rows) {
    out << "family,eta,method,runs,failures,solver_warnings,consensus_mean,consensus_std,"
           "runtime_mean_s,e_ls_mean,rel_diff_to_ransac\n";
    for (const auto &r : rows) {
        out << to_string(family) << ',' << Num{r.eta} << ',' << to_string(r.method) << ',' << r.runs << ','
            << r.failures << ',' << r.solver_warnings << ',' << Num{r.consensus_mean} << ','
            << Num{r.consensus_std} << ',' << Num{r.runtime_mean} << ',' << Num{r.e_ls_mean} << ',';
        if (r.rel_diff_to_ransac)
            out << Num{*r.rel_diff_to_ransac};
        out << '\n';
    }
}

void write_runs_csv(std::ostream &out, const ExperimentConfig &config, const std::vector<SweepRun> &runs) {
    out << "family,eta,run,instance_seed,method,n,planted_inliers,initial_consensus,consensus,"
           "runtime_s,e_ls,bisection_steps,solver_failure,error\n";
    for (const auto &sr : runs) {
        out << to_string(config.generator.family) << ',' << Num{config.etas[sr.eta_index]} << ',' << sr.run
            << ',' << sr.instance_seed << ',' << to_string(sr.method) << ',' << config.generator.n << ','
            << sr.planted_inliers << ',';
        if (sr.record) {
            const RunRecord &r = *sr.record;
            out << r.initial_consensus << ',' << r.consensus << ',' << Num{r.runtime_seconds} << ','
                << Num{r.e_ls.value_or(std::numeric_limits<double>::quiet_NaN())} << ','
                << (r.bisection ? r.bisection->steps.size() : 0) << ',' << (r.solver_failure ? 1 : 0) << ',';
        } else {
            out << ",,,,,,";
        }
        std::string err = sr.error;
        std::replace(err.begin(), err.end(), '"', '\'');
        if (!err.empty())
            out << '"' << err << '"';
        out << '\n';
    }
}

}  // namespace maxcon
