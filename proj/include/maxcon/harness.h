#ifndef MAXCON_HARNESS_H_
#define MAXCON_HARNESS_H_

#include "maxcon/datagen.h"
#include "maxcon/ibco.h"
#include "maxcon/io.h"
#include "maxcon/ransac.h"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace maxcon {

enum class Method { ransac, ibco, ransac_ibco };

std::string_view to_string(Method method);
/// "ransac", "ibco" or "ransac+ibco"; throws std::invalid_argument otherwise.
Method method_from_string(std::string_view name);

struct MethodOptions {
    RansacConfig ransac;                 // seed is overridden per run
    BcoLimits bco;
    std::optional<Eigen::VectorXd> x0;   // IBCO start for Method::ibco
};

struct RunRecord {
    Family family = Family::regression;
    Method method = Method::ransac;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    std::size_t initial_consensus = 0;   // I(x0) seen by IBCO; RANSAC's own result otherwise
    std::optional<std::size_t> ransac_consensus;
    std::size_t consensus = 0;
    double runtime_seconds = 0.0;        // method call only, no I/O
    std::optional<double> e_ls;          // of the least-squares fit on the consensus set
    Estimate estimate;
    std::optional<Eigen::MatrixXd> model_matrix;  // pixel-frame H or F
    std::size_t ransac_iterations = 0;
    bool ransac_polished = false;
    bool solver_failure = false;
    std::optional<BisectionTrace> bisection;
};

/// Least-squares refit on the estimate's consensus set followed by the
/// family's projection; falls back to the estimate when the fit fails.
Eigen::VectorXd consensus_set_fit(const ModelEstimator &model, const Estimate &estimate);

/// Pixel-frame matrix for homography and fundamental, nullopt otherwise.
std::optional<Eigen::MatrixXd> pixel_model(const ModelEstimator &model, const Eigen::VectorXd &x);

RunRecord run_method(const ModelEstimator &model, Method method, std::uint64_t seed,
                     const MethodOptions &options, const GroundTruth *truth = nullptr);

nlohmann::json record_to_json(const RunRecord &record);

struct ExperimentConfig {
    GeneratorConfig generator;        // family, n, epsilon and generator knobs
    std::vector<Method> methods{Method::ransac, Method::ransac_ibco};
    std::vector<double> etas;
    std::size_t runs = 10;
    std::uint64_t seed = 0;
    std::size_t ransac_max_iterations = 100000;
    double tolerance = 1e-8;          // conic solver tolerance

    void validate() const;
};

/// Keys: family, methods, etas, runs, seed, n, epsilon, max_iterations,
/// tolerance, plus any generator field. Throws InputError.
ExperimentConfig experiment_config_from_json(const nlohmann::json &j);

struct SweepRun {
    std::size_t eta_index = 0;
    std::size_t run = 0;
    std::uint64_t instance_seed = 0;
    std::size_t planted_inliers = 0;
    Method method = Method::ransac;
    std::optional<RunRecord> record;  // empty when the run threw
    std::string error;
};

struct SweepRow {
    double eta = 0.0;
    Method method = Method::ransac;
    std::size_t runs = 0;             // completed runs
    std::size_t failures = 0;         // runs that threw
    std::size_t solver_warnings = 0;  // completed runs flagged by the conic solver
    double consensus_mean = 0.0;
    double consensus_std = 0.0;       // sample standard deviation
    double runtime_mean = 0.0;
    double e_ls_mean = 0.0;
    /// Mean over paired runs of (I_method - I_ransac) / max(1, I_ransac).
    std::optional<double> rel_diff_to_ransac;
};

struct SweepResult {
    std::vector<SweepRun> runs;
    std::vector<SweepRow> rows;
};

/// Instance seed for (eta index, run); independent of the worker count.
std::uint64_t instance_seed(std::uint64_t base, std::size_t eta_index, std::size_t run);

/// MAXCON_THREADS when set to a positive integer, else hardware concurrency.
std::size_t worker_count_from_env();

SweepResult run_sweep(const ExperimentConfig &config, std::size_t workers);
std::vector<SweepRow> aggregate(const ExperimentConfig &config, const std::vector<SweepRun> &runs);

void write_summary_csv(std::ostream &out, Family family, const std::vector<SweepRow> &rows);
void write_runs_csv(std::ostream &out, const ExperimentConfig &config, const std::vector<SweepRun> &runs);

}  // namespace maxcon

#endif  // MAXCON_HARNESS_H_
