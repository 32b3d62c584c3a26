// maxcon: generate synthetic instances, fit them, and run eta sweeps.

#include "maxcon/harness.h"
#include "maxcon/io.h"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace maxcon;

namespace {

struct Common {
    std::optional<std::uint64_t> seed;
    std::optional<double> epsilon;
    std::optional<double> tol;
    std::optional<std::size_t> max_iters;
};

void add_common(CLI::App *cmd, Common &c, bool solver_flags) {
    cmd->add_option("--seed", c.seed, "Random seed");
    cmd->add_option("--epsilon", c.epsilon, "Inlier threshold (overrides the file)")->check(CLI::PositiveNumber);
    if (solver_flags) {
        cmd->add_option("--tol", c.tol, "Conic solver tolerance")->check(CLI::PositiveNumber);
        cmd->add_option("--max-iters", c.max_iters, "RANSAC iteration cap")->check(CLI::PositiveNumber);
    }
}

Eigen::VectorXd parse_vector(const std::string &text) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used == 0 || tok.find_first_not_of(" \t", used) != std::string::npos)
            throw InputError("--x0: '" + tok + "' is not a number");
        vals.push_back(v);
    }
    if (vals.empty())
        throw InputError("--x0: empty vector");
    return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

int cmd_generate(const fs::path &config_path, const fs::path &out_dir, const Common &c) {
    nlohmann::json j = read_json_file(config_path);
    const std::string name = j.is_object() && j.contains("name") ? j["name"].get<std::string>() : "instance";
    if (c.seed)
        j["seed"] = *c.seed;
    if (c.epsilon)
        j["epsilon"] = *c.epsilon;
    const GeneratorConfig cfg = generator_config_from_json(j);
    const GeneratedProblem g = generate(cfg);
    fs::create_directories(out_dir);
    const fs::path inst = out_dir / (name + ".json");
    const fs::path truth = out_dir / (name + ".truth.json");
    write_json_file(inst, problem_to_json(g.data));
    write_json_file(truth, truth_to_json(g));
    std::cout << inst.string() << '\n' << truth.string() << '\n';
    return 0;
}

int cmd_fit(const fs::path &instance_path, const std::string &method_name, const std::optional<fs::path> &truth_path,
            const std::optional<std::string> &x0_text, const std::optional<fs::path> &out, const Common &c) {
    const Method method = method_from_string(method_name);
    ProblemData data = read_problem_file(instance_path);
    if (c.epsilon)
        data.epsilon = *c.epsilon;
    const auto model = make_estimator(data);

    std::optional<GroundTruth> truth;
    if (truth_path)
        truth = truth_from_json(read_json_file(*truth_path), data.size());

    MethodOptions options;
    if (c.max_iters)
        options.ransac.max_iterations = *c.max_iters;
    if (c.tol)
        options.bco.socp.tolerance = *c.tol;
    if (x0_text) {
        options.x0 = parse_vector(*x0_text);
        if (options.x0->size() != model->dimension())
            throw InputError("--x0: expected " + std::to_string(model->dimension()) + " entries");
    }
    const RunRecord rec = run_method(*model, method, c.seed.value_or(0), options, truth ? &*truth : nullptr);

    nlohmann::json j = record_to_json(rec);
    j["instance"] = instance_path.string();
    j["epsilon"] = data.epsilon;
    j["config"] = {{"tolerance", options.bco.socp.tolerance},
                   {"max_iterations", options.ransac.max_iterations},
                   {"confidence", options.ransac.confidence}};
    if (options.x0)
        j["config"]["x0"] = std::vector<double>(options.x0->data(), options.x0->data() + options.x0->size());
    if (out)
        write_json_file(*out, j);
    std::cout << j.dump(2) << '\n';
    if (rec.solver_failure)
        std::cerr << "warning: the conic solver did not reach its tolerance in at least one step\n";
    return 0;
}

int cmd_sweep(const fs::path &config_path, const fs::path &out_dir, const Common &c) {
    nlohmann::json j = read_json_file(config_path);
    if (c.seed)
        j["seed"] = *c.seed;
    if (c.epsilon)
        j["epsilon"] = *c.epsilon;
    if (c.tol)
        j["tolerance"] = *c.tol;
    if (c.max_iters)
        j["max_iterations"] = *c.max_iters;
    const ExperimentConfig cfg = experiment_config_from_json(j);
    const SweepResult res = run_sweep(cfg, worker_count_from_env());

    fs::create_directories(out_dir);
    std::ofstream summary(out_dir / "summary.csv"), runs(out_dir / "runs.csv");
    if (!summary || !runs)
        throw std::runtime_error("cannot write to " + out_dir.string());
    write_summary_csv(summary, cfg.generator.family, res.rows);
    write_runs_csv(runs, cfg, res.runs);
    write_summary_csv(std::cout, cfg.generator.family, res.rows);

    std::size_t failed = 0;
    for (const auto &r : res.runs)
        failed += r.record ? 0 : 1;
    if (failed > 0)
        std::cerr << "warning: " << failed << " run(s) failed; see runs.csv\n";
    return 0;
}

int cmd_ingest(const fs::path &path, std::string format, const std::optional<std::string> &family,
               const std::optional<fs::path> &out, const Common &c) {
    if (format == "auto") {
        const auto ext = path.extension().string();
        if (ext == ".csv" || ext == ".txt") {
            format = "csv";
        } else {
            const nlohmann::json j = read_json_file(path);
            format = j.is_object() && j.contains("family") ? "instance" : "tracks";
        }
    }
    ProblemData data;
    if (format == "csv") {
        data.correspondences = read_correspondences_file(path);
        data.family = family ? family_from_string(*family) : Family::homography;
        if (data.family != Family::homography && data.family != Family::fundamental)
            throw InputError("correspondences can only feed homography or fundamental fits");
        std::cout << data.correspondences.size() << " correspondences\n";
    } else if (format == "tracks") {
        data.views = read_tracks_file(path);
        data.family = Family::triangulation;
        std::cout << data.views.size() << " views\n";
    } else if (format == "instance") {
        data = read_problem_file(path);
        std::cout << to_string(data.family) << " instance with " << data.size() << " data, epsilon "
                  << data.epsilon << '\n';
    } else {
        throw InputError("unknown format '" + format + "'");
    }
    if (out) {
        if (format != "instance")
            data.epsilon = c.epsilon.value_or(default_epsilon(data.family));
        else if (c.epsilon)
            data.epsilon = *c.epsilon;
        make_estimator(data);  // validates sizes
        write_json_file(*out, problem_to_json(data));
        std::cout << "wrote " << out->string() << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Consensus maximization: RANSAC and bisection over biconvex refinement"};
    app.require_subcommand(1);

    Common gen_c, fit_c, sweep_c, ingest_c;
    fs::path gen_config, gen_out;
    auto *gen = app.add_subcommand("generate", "Write a synthetic instance and its ground-truth sidecar");
    gen->add_option("config", gen_config, "Generator config JSON")->required()->check(CLI::ExistingFile);
    gen->add_option("--out", gen_out, "Output directory (created if missing)")->required();
    add_common(gen, gen_c, false);

    fs::path fit_instance;
    std::string fit_method = "ransac+ibco";
    std::optional<fs::path> fit_truth, fit_out;
    std::optional<std::string> fit_x0;
    auto *fit = app.add_subcommand("fit", "Fit one instance and print the run record as JSON");
    fit->add_option("instance", fit_instance, "Instance JSON")->required()->check(CLI::ExistingFile);
    fit->add_option("--method", fit_method, "ransac | ibco | ransac+ibco")
        ->check(CLI::IsMember({"ransac", "ibco", "ransac+ibco"}));
    fit->add_option("--truth", fit_truth, "Ground-truth sidecar, enables e_ls")->check(CLI::ExistingFile);
    fit->add_option("--x0", fit_x0, "IBCO start as comma-separated values (method ibco)");
    fit->add_option("--out", fit_out, "Also write the record to this file");
    add_common(fit, fit_c, true);

    fs::path sweep_config, sweep_out;
    auto *sweep = app.add_subcommand("sweep", "Run an eta sweep and write summary.csv and runs.csv");
    sweep->add_option("config", sweep_config, "Experiment config JSON")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", sweep_out, "Output directory (created if missing)")->required();
    add_common(sweep, sweep_c, true);

    fs::path ingest_path;
    std::string ingest_format = "auto";
    std::optional<std::string> ingest_family;
    std::optional<fs::path> ingest_out;
    auto *ingest = app.add_subcommand("ingest-check", "Validate a correspondence CSV, track JSON or instance");
    ingest->add_option("file", ingest_path, "Input file")->required()->check(CLI::ExistingFile);
    ingest->add_option("--format", ingest_format, "auto | csv | tracks | instance")
        ->check(CLI::IsMember({"auto", "csv", "tracks", "instance"}));
    ingest->add_option("--family", ingest_family, "homography | fundamental (CSV input)")
        ->check(CLI::IsMember({"homography", "fundamental"}));
    ingest->add_option("--out", ingest_out, "Write an instance JSON");
    add_common(ingest, ingest_c, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen)
            return cmd_generate(gen_config, gen_out, gen_c);
        if (*fit)
            return cmd_fit(fit_instance, fit_method, fit_truth, fit_x0, fit_out, fit_c);
        if (*sweep)
            return cmd_sweep(sweep_config, sweep_out, sweep_c);
        if (*ingest)
            return cmd_ingest(ingest_path, ingest_format, ingest_family, ingest_out, ingest_c);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
