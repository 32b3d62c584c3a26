#ifndef MAXCON_IO_H_
#define MAXCON_IO_H_

#include "maxcon/datagen.h"
#include "maxcon/models/factory.h"

#include <json.hpp>

#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace maxcon {

/// Malformed or empty input. Messages carry line numbers for text formats.
class InputError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;

/// Short description of the frame parameter vectors live in.
std::string parameter_frame(Family family);

// Instance files: {"schema_version", "family", "epsilon", "epsilon_frame", "data"}.
nlohmann::json problem_to_json(const ProblemData &data);
ProblemData problem_from_json(const nlohmann::json &j);

// Ground-truth sidecar written next to a generated instance.
nlohmann::json truth_to_json(const GeneratedProblem &generated);
GroundTruth truth_from_json(const nlohmann::json &j, std::size_t expected_size);

nlohmann::json generator_config_to_json(const GeneratorConfig &cfg);
/// Unknown keys are rejected so that typos do not pass silently.
GeneratorConfig generator_config_from_json(const nlohmann::json &j);

/// Correspondence CSV: four numeric columns u_x,u_y,v_x,v_y separated by
/// commas or whitespace. '#' starts a comment; one header line is allowed
/// before the first data row.
std::vector<Correspondence> parse_correspondences(std::istream &in);

/// Track JSON: {"schema_version": 1, "views": [{"camera": 3x4, "point": [x, y]}]}.
std::vector<ViewObservation> parse_tracks(const nlohmann::json &j);

nlohmann::json read_json_file(const std::filesystem::path &path);
/// Creates missing parent directories.
void write_json_file(const std::filesystem::path &path, const nlohmann::json &j);

std::vector<Correspondence> read_correspondences_file(const std::filesystem::path &path);
std::vector<ViewObservation> read_tracks_file(const std::filesystem::path &path);
ProblemData read_problem_file(const std::filesystem::path &path);

}  // namespace maxcon

#endif  // MAXCON_IO_H_
