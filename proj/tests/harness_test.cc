#include "maxcon/datagen.h"
#include "maxcon/harness.h"
#include "maxcon/io.h"
#include "maxcon/models/regression.h"
#include "test_util.h"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

using namespace maxcon;
using maxcon::testing::vec;

namespace {

std::vector<std::string> split(const std::string &line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

std::vector<std::map<std::string, std::string>> read_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    const auto header = split(line);
    std::vector<std::map<std::string, std::string>> rows;
    while (std::getline(in, line)) {
        const auto cells = split(line);
        std::map<std::string, std::string> row;
        for (std::size_t i = 0; i < header.size(); ++i)
            row[header[i]] = i < cells.size() ? cells[i] : "";
        rows.push_back(row);
    }
    return rows;
}

ExperimentConfig small_sweep() {
    ExperimentConfig cfg;
    cfg.generator.family = Family::regression;
    cfg.generator.n = 40;
    cfg.generator.dimension = 3;
    cfg.methods = {Method::ransac, Method::ransac_ibco};
    for (int eta = 0; eta <= 75; eta += 5)
        cfg.etas.push_back(eta);
    cfg.runs = 2;
    cfg.seed = 11;
    cfg.ransac_max_iterations = 2000;
    return cfg;
}

}  // namespace

TEST(Method, Names) {
    for (Method m : {Method::ransac, Method::ibco, Method::ransac_ibco})
        EXPECT_EQ(method_from_string(to_string(m)), m);
    EXPECT_EQ(to_string(Method::ransac_ibco), "ransac+ibco");
    EXPECT_THROW(method_from_string("lo-ransac"), std::invalid_argument);
}

TEST(RunMethod, ToyInstanceFromGivenStart) {
    RegressionProblem model({{vec({1}), 0.0}, {vec({1}), 0.1}, {vec({1}), 5.0}}, 0.3);
    MethodOptions opt;
    opt.x0 = vec({5.0});
    const RunRecord r = run_method(model, Method::ibco, 0, opt);
    EXPECT_EQ(r.initial_consensus, 1u);
    EXPECT_EQ(r.consensus, 2u);
    EXPECT_FALSE(r.ransac_consensus.has_value());
    ASSERT_TRUE(r.bisection.has_value());
    EXPECT_GE(r.runtime_seconds, 0.0);

    opt.x0 = vec({5.0, 1.0});
    EXPECT_THROW(run_method(model, Method::ibco, 0, opt), std::invalid_argument);
}

TEST(RunMethod, RefinementNeverBelowRansac) {
    for (Family f : {Family::regression, Family::homography, Family::triangulation, Family::fundamental}) {
        GeneratorConfig g;
        g.family = f;
        g.n = 60;
        g.eta = 50;
        g.dimension = 4;
        g.seed = 3;
        const auto gen = generate(g);
        const auto model = make_estimator(gen.data);
        MethodOptions opt;
        opt.ransac.max_iterations = 300;
        const RunRecord r = run_method(*model, Method::ransac_ibco, 4, opt, &gen.truth);
        ASSERT_TRUE(r.ransac_consensus.has_value());
        EXPECT_GE(r.consensus, *r.ransac_consensus) << to_string(f);
        EXPECT_LE(r.consensus, r.n);
        ASSERT_TRUE(r.e_ls.has_value());
        EXPECT_GE(*r.e_ls, 0.0);
        EXPECT_EQ(r.model_matrix.has_value(), f == Family::homography || f == Family::fundamental);
    }
}

TEST(RunMethod, ReproducibleFromSeed) {
    GeneratorConfig g;
    g.family = Family::homography;
    g.n = 50;
    g.eta = 40;
    const auto gen = generate(g);
    const auto model = make_estimator(gen.data);
    const RunRecord a = run_method(*model, Method::ransac_ibco, 9, {});
    const RunRecord b = run_method(*model, Method::ransac_ibco, 9, {});
    EXPECT_EQ(a.estimate.x, b.estimate.x);
    EXPECT_EQ(a.consensus, b.consensus);
    nlohmann::json ja = record_to_json(a), jb = record_to_json(b);
    ja.erase("runtime_seconds");
    jb.erase("runtime_seconds");
    EXPECT_EQ(ja, jb);
}

TEST(RunRecordJson, Fields) {
    RegressionProblem model({{vec({1}), 0.0}, {vec({1}), 0.1}, {vec({1}), 5.0}}, 0.3);
    MethodOptions opt;
    opt.x0 = vec({5.0});
    const nlohmann::json j = record_to_json(run_method(model, Method::ibco, 0, opt));
    for (const char *key : {"family", "method", "seed", "n", "consensus", "initial_consensus", "runtime_seconds",
                            "e_ls", "x", "inliers", "solver_failure", "bisection"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["method"], "ibco");
    EXPECT_EQ(j["bisection"]["final_high"].get<int>(), j["bisection"]["final_low"].get<int>() + 1);
    EXPECT_FALSE(j.contains("ransac"));
}

TEST(Sweep, RowCountsAndRansacSelfDifference) {
    const ExperimentConfig cfg = small_sweep();
    const SweepResult res = run_sweep(cfg, 2);
    EXPECT_EQ(res.rows.size(), 16u * 2u);
    EXPECT_EQ(res.runs.size(), 16u * 2u * 2u);
    for (const auto &row : res.rows) {
        EXPECT_EQ(row.runs + row.failures, 2u);
        EXPECT_GE(row.consensus_std, 0.0);
        ASSERT_TRUE(row.rel_diff_to_ransac.has_value());
        if (row.method == Method::ransac)
            EXPECT_EQ(*row.rel_diff_to_ransac, 0.0);
        else
            EXPECT_GE(*row.rel_diff_to_ransac, 0.0);
    }
}

TEST(Sweep, IndependentOfWorkerCount) {
    ExperimentConfig cfg = small_sweep();
    cfg.etas = {20, 60};
    const SweepResult one = run_sweep(cfg, 1);
    const SweepResult four = run_sweep(cfg, 4);
    ASSERT_EQ(one.runs.size(), four.runs.size());
    for (std::size_t i = 0; i < one.runs.size(); ++i) {
        ASSERT_TRUE(one.runs[i].record && four.runs[i].record);
        EXPECT_EQ(one.runs[i].instance_seed, four.runs[i].instance_seed);
        EXPECT_EQ(one.runs[i].record->estimate.x, four.runs[i].record->estimate.x);
    }
}

TEST(Sweep, AggregatesRecomputableFromRunsCsv) {
    const ExperimentConfig cfg = small_sweep();
    const SweepResult res = run_sweep(cfg, 3);
    std::ostringstream runs_csv, summary_csv;
    write_runs_csv(runs_csv, cfg, res.runs);
    write_summary_csv(summary_csv, cfg.generator.family, res.rows);
    const auto runs = read_csv(runs_csv.str());
    const auto summary = read_csv(summary_csv.str());
    ASSERT_EQ(runs.size(), res.runs.size());
    ASSERT_EQ(summary.size(), res.rows.size());

    for (const auto &row : summary) {
        std::vector<double> consensus, runtime, els;
        std::map<std::string, double> ransac_by_run;
        for (const auto &r : runs)
            if (r.at("eta") == row.at("eta") && r.at("method") == "ransac")
                ransac_by_run[r.at("run")] = std::stod(r.at("consensus"));
        double rel = 0.0;
        for (const auto &r : runs) {
            if (r.at("eta") != row.at("eta") || r.at("method") != row.at("method"))
                continue;
            const double c = std::stod(r.at("consensus"));
            consensus.push_back(c);
            runtime.push_back(std::stod(r.at("runtime_s")));
            els.push_back(std::stod(r.at("e_ls")));
            const double base = ransac_by_run.at(r.at("run"));
            rel += (c - base) / std::max(1.0, base);
        }
        const double k = static_cast<double>(consensus.size());
        ASSERT_EQ(std::to_string(consensus.size()), row.at("runs"));
        double mean = 0.0, rt = 0.0, e = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < consensus.size(); ++i) {
            mean += consensus[i] / k;
            rt += runtime[i] / k;
            e += els[i] / k;
        }
        for (double c : consensus)
            ss += (c - mean) * (c - mean);
        EXPECT_NEAR(std::stod(row.at("consensus_mean")), mean, 1e-12);
        EXPECT_NEAR(std::stod(row.at("consensus_std")), std::sqrt(ss / (k - 1)), 1e-12);
        EXPECT_NEAR(std::stod(row.at("runtime_mean_s")), rt, 1e-12);
        EXPECT_NEAR(std::stod(row.at("e_ls_mean")), e, 1e-12);
        EXPECT_NEAR(std::stod(row.at("rel_diff_to_ransac")), rel / k, 1e-12);
    }
}

TEST(Sweep, CsvHeaders) {
    std::ostringstream s, r;
    write_summary_csv(s, Family::regression, {});
    write_runs_csv(r, small_sweep(), {});
    EXPECT_EQ(s.str(), "family,eta,method,runs,failures,solver_warnings,consensus_mean,consensus_std,"
                       "runtime_mean_s,e_ls_mean,rel_diff_to_ransac\n");
    EXPECT_EQ(r.str(), "family,eta,run,instance_seed,method,n,planted_inliers,initial_consensus,consensus,"
                       "runtime_s,e_ls,bisection_steps,solver_failure,error\n");
}

TEST(Sweep, TinyInstancesRejectedUpFront) {
    ExperimentConfig cfg = small_sweep();
    cfg.generator.n = 2;  // below the minimal sample size
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Aggregate, FailedRunsCountedSeparately) {
    ExperimentConfig cfg = small_sweep();
    cfg.etas = {10};
    cfg.methods = {Method::ransac};
    RunRecord ok;
    ok.consensus = 30;
    ok.runtime_seconds = 0.5;
    ok.e_ls = 0.1;
    ok.solver_failure = true;
    SweepRun good{0, 0, 1, 30, Method::ransac, ok, ""};
    SweepRun bad{0, 1, 2, 30, Method::ransac, std::nullopt, "boom"};
    const auto rows = aggregate(cfg, {good, bad});
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].runs, 1u);
    EXPECT_EQ(rows[0].failures, 1u);
    EXPECT_EQ(rows[0].solver_warnings, 1u);
    EXPECT_EQ(rows[0].consensus_mean, 30.0);
    EXPECT_EQ(rows[0].consensus_std, 0.0);

    std::ostringstream out;
    write_runs_csv(out, cfg, {good, bad});
    const auto parsed = read_csv(out.str());
    ASSERT_EQ(parsed.size(), 2u);
    EXPECT_EQ(parsed[1].at("error"), "\"boom\"");
    EXPECT_EQ(parsed[1].at("consensus"), "");
}

TEST(ExperimentConfigJson, ParsesAndRejects) {
    const nlohmann::json j = {{"family", "homography"}, {"methods", {"ransac", "ransac+ibco"}},
                              {"etas", {0, 10}},         {"runs", 3},
                              {"seed", 5},               {"n", 80},
                              {"max_iterations", 500},   {"tolerance", 1e-7}};
    const ExperimentConfig cfg = experiment_config_from_json(j);
    EXPECT_EQ(cfg.generator.family, Family::homography);
    EXPECT_EQ(cfg.generator.n, 80u);
    EXPECT_EQ(cfg.runs, 3u);
    EXPECT_EQ(cfg.ransac_max_iterations, 500u);
    EXPECT_EQ(cfg.tolerance, 1e-7);
    EXPECT_EQ(cfg.methods.size(), 2u);

    auto bad = j;
    bad["etas"] = {0, 120};
    EXPECT_THROW(experiment_config_from_json(bad), InputError);
    bad = j;
    bad["runs"] = 0;
    EXPECT_THROW(experiment_config_from_json(bad), InputError);
    bad = j;
    bad["runs"] = -2;
    EXPECT_THROW(experiment_config_from_json(bad), InputError);
    bad = j;
    bad["methods"] = {"flrs"};
    EXPECT_THROW(experiment_config_from_json(bad), InputError);
    bad = j;
    bad["colour"] = "red";
    EXPECT_THROW(experiment_config_from_json(bad), InputError);
}

TEST(InstanceSeed, DistinctAndStable) {
    EXPECT_EQ(instance_seed(1, 2, 3), instance_seed(1, 2, 3));
    EXPECT_NE(instance_seed(1, 2, 3), instance_seed(1, 3, 2));
    EXPECT_NE(instance_seed(1, 0, 0), instance_seed(2, 0, 0));
}
