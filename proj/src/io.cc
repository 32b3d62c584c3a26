#include "maxcon/io.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

namespace maxcon {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string &msg) { throw InputError(msg); }

const json &field(const json &j, const char *key, const std::string &where) {
    if (!j.is_object() || !j.contains(key))
        fail(where + ": missing field '" + key + "'");
    return j.at(key);
}

double number(const json &j, const std::string &where) {
    if (!j.is_number())
        fail(where + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v))
        fail(where + ": non-finite value");
    return v;
}

Eigen::VectorXd vector_of(const json &j, const std::string &where) {
    if (!j.is_array())
        fail(where + ": expected an array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v(static_cast<Eigen::Index>(i)) = number(j[i], where + "[" + std::to_string(i) + "]");
    return v;
}

Eigen::MatrixXd matrix_of(const json &j, const std::string &where) {
    if (!j.is_array() || j.empty())
        fail(where + ": expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    Eigen::MatrixXd m;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::VectorXd row = vector_of(j[static_cast<std::size_t>(r)], where + "[" + std::to_string(r) + "]");
        if (r == 0)
            m.resize(rows, row.size());
        else if (row.size() != m.cols())
            fail(where + ": rows have different lengths");
        m.row(r) = row.transpose();
    }
    return m;
}

json to_json(const Eigen::VectorXd &v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json to_json(const Eigen::MatrixXd &m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        rows.push_back(to_json(Eigen::VectorXd(m.row(r).transpose())));
    return rows;
}

ViewObservation view_of(const json &j, const std::string &where) {
    const Eigen::MatrixXd cam = matrix_of(field(j, "camera", where), where + ".camera");
    if (cam.rows() != 3 || cam.cols() != 4)
        fail(where + ".camera: expected a 3x4 matrix");
    const Eigen::VectorXd pt = vector_of(field(j, "point", where), where + ".point");
    if (pt.size() != 2)
        fail(where + ".point: expected two coordinates");
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(cam);
    if (!(svd.singularValues()(2) > 1e-12 * svd.singularValues()(0)))
        fail(where + ".camera: matrix is rank deficient");
    ViewObservation v;
    v.camera = cam;
    v.point = pt;
    return v;
}

json view_to_json(const ViewObservation &v) {
    return {{"camera", to_json(Eigen::MatrixXd(v.camera))}, {"point", {v.point.x(), v.point.y()}}};
}

void check_schema(const json &j, const std::string &where) {
    const json &v = field(j, "schema_version", where);
    if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
        fail(where + ": unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
}

std::string epsilon_frame(Family family) {
    switch (family) {
    case Family::regression:
        return "data units";
    case Family::homography:
    case Family::triangulation:
        return "pixels";
    case Family::fundamental:
        return "normalized coordinates";
    }
    return "";
}

bool parse_double(std::string_view s, double &out) {
    const auto *end = s.data() + s.size();
    const auto res = std::from_chars(s.data(), end, out);
    return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

// Comma-separated when the line has a comma, whitespace-separated otherwise.
std::vector<std::string_view> split_fields(std::string_view line) {
    constexpr std::string_view blank = " \t\r";
    auto trim = [&](std::string_view t) {
        const auto b = t.find_first_not_of(blank);
        if (b == std::string_view::npos)
            return std::string_view{};
        return t.substr(b, t.find_last_not_of(blank) - b + 1);
    };
    std::vector<std::string_view> out;
    if (trim(line).empty())
        return out;
    const bool commas = line.find(',') != std::string_view::npos;
    const std::string_view seps = commas ? std::string_view(",") : blank;
    std::size_t start = commas ? 0 : line.find_first_not_of(blank);
    while (start != std::string_view::npos && start <= line.size()) {
        const auto end = line.find_first_of(seps, start);
        out.push_back(trim(line.substr(start, end == std::string_view::npos ? end : end - start)));
        if (end == std::string_view::npos)
            break;
        start = commas ? end + 1 : line.find_first_not_of(blank, end);
    }
    return out;
}

std::ifstream open_input(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        fail("cannot open " + path.string());
    return in;
}

}  // namespace

std::string parameter_frame(Family family) {
    switch (family) {
    case Family::regression:
        return "x";
    case Family::homography:
        return "first eight entries (row-major) of T2 H inv(T1), scaled so entry (3,3) is 1; "
               "T1, T2 are the isotropic normalizations of each image";
    case Family::triangulation:
        return "3D point in world coordinates";
    case Family::fundamental:
        return "first eight entries (row-major) of inv(T2)' F inv(T1), scaled so entry (3,3) is 1; "
               "T1, T2 are the isotropic normalizations of each image";
    }
    return "";
}

json problem_to_json(const ProblemData &data) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["family"] = std::string(to_string(data.family));
    j["epsilon"] = data.epsilon;
    j["epsilon_frame"] = epsilon_frame(data.family);
    json d = json::object();
    switch (data.family) {
    case Family::regression: {
        json a = json::array(), b = json::array();
        for (const auto &r : data.regression) {
            a.push_back(to_json(r.a));
            b.push_back(r.b);
        }
        d["a"] = std::move(a);
        d["b"] = std::move(b);
        break;
    }
    case Family::homography:
    case Family::fundamental: {
        json rows = json::array();
        for (const auto &c : data.correspondences)
            rows.push_back({c.u.x(), c.u.y(), c.v.x(), c.v.y()});
        d["correspondences"] = std::move(rows);
        break;
    }
    case Family::triangulation: {
        json views = json::array();
        for (const auto &v : data.views)
            views.push_back(view_to_json(v));
        d["views"] = std::move(views);
        break;
    }
    }
    j["data"] = std::move(d);
    return j;
}

ProblemData problem_from_json(const json &j) {
    check_schema(j, "instance");
    ProblemData out;
    const json &fam = field(j, "family", "instance");
    if (!fam.is_string())
        fail("instance.family: expected a string");
    try {
        out.family = family_from_string(fam.get<std::string>());
    } catch (const std::invalid_argument &e) {
        fail(std::string("instance.family: ") + e.what());
    }
    out.epsilon = number(field(j, "epsilon", "instance"), "instance.epsilon");
    if (!(out.epsilon > 0.0))
        fail("instance.epsilon: must be positive");
    const json &d = field(j, "data", "instance");

    switch (out.family) {
    case Family::regression: {
        const Eigen::MatrixXd a = matrix_of(field(d, "a", "instance.data"), "instance.data.a");
        const Eigen::VectorXd b = vector_of(field(d, "b", "instance.data"), "instance.data.b");
        if (b.size() != a.rows())
            fail("instance.data: 'a' and 'b' have different lengths");
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            out.regression.push_back({a.row(i).transpose(), b(i)});
        break;
    }
    case Family::homography:
    case Family::fundamental: {
        const json &rows = field(d, "correspondences", "instance.data");
        const Eigen::MatrixXd m = matrix_of(rows, "instance.data.correspondences");
        if (m.cols() != 4)
            fail("instance.data.correspondences: expected rows [u_x, u_y, v_x, v_y]");
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            out.correspondences.push_back({{m(i, 0), m(i, 1)}, {m(i, 2), m(i, 3)}});
        break;
    }
    case Family::triangulation: {
        const json &views = field(d, "views", "instance.data");
        if (!views.is_array())
            fail("instance.data.views: expected an array");
        for (std::size_t i = 0; i < views.size(); ++i)
            out.views.push_back(view_of(views[i], "instance.data.views[" + std::to_string(i) + "]"));
        break;
    }
    }
    if (out.size() == 0)
        fail("instance: no data");
    return out;
}

json generator_config_to_json(const GeneratorConfig &cfg) {
    json j;
    j["family"] = std::string(to_string(cfg.family));
    j["n"] = cfg.n;
    j["eta"] = cfg.eta;
    j["epsilon"] = cfg.resolved_epsilon();
    j["seed"] = cfg.seed;
    if (cfg.family == Family::regression) {
        j["dimension"] = cfg.dimension;
        j["inlier_noise_bound"] = cfg.inlier_noise_bound.value_or(cfg.resolved_epsilon());
        j["outlier_sigma"] = cfg.outlier_sigma;
        j["a_distribution"] = "uniform[-1,1]";
        j["x_true_distribution"] = "uniform[-1,1]";
    } else {
        j["image_width"] = cfg.image_width;
        j["image_height"] = cfg.image_height;
        j["focal"] = cfg.focal;
        if (cfg.family == Family::fundamental)
            j["pixel_noise"] = cfg.pixel_noise;
    }
    return j;
}

GeneratorConfig generator_config_from_json(const json &j) {
    if (!j.is_object())
        fail("generator config: expected an object");
    GeneratorConfig cfg;
    const json &fam = field(j, "family", "generator config");
    if (!fam.is_string())
        fail("generator config.family: expected a string");
    try {
        cfg.family = family_from_string(fam.get<std::string>());
    } catch (const std::invalid_argument &e) {
        fail(std::string("generator config.family: ") + e.what());
    }
    for (const auto &[key, value] : j.items()) {
        const std::string where = "generator config." + key;
        if (key == "family" || key == "a_distribution" || key == "x_true_distribution" || key == "name")
            continue;
        if (key == "n" || key == "seed" || key == "dimension") {
            if (!value.is_number_integer() || value.get<long long>() < 0)
                fail(where + ": expected a nonnegative integer");
            if (key == "n")
                cfg.n = value.get<std::size_t>();
            else if (key == "seed")
                cfg.seed = value.get<std::uint64_t>();
            else
                cfg.dimension = value.get<int>();
        } else if (key == "eta") {
            cfg.eta = number(value, where);
        } else if (key == "epsilon") {
            cfg.epsilon = number(value, where);
        } else if (key == "inlier_noise_bound") {
            cfg.inlier_noise_bound = number(value, where);
        } else if (key == "outlier_sigma") {
            cfg.outlier_sigma = number(value, where);
        } else if (key == "image_width") {
            cfg.image_width = number(value, where);
        } else if (key == "image_height") {
            cfg.image_height = number(value, where);
        } else if (key == "focal") {
            cfg.focal = number(value, where);
        } else if (key == "pixel_noise") {
            cfg.pixel_noise = number(value, where);
        } else {
            fail(where + ": unknown field");
        }
    }
    try {
        cfg.validate();
    } catch (const std::invalid_argument &e) {
        fail(std::string("generator config: ") + e.what());
    }
    return cfg;
}

json truth_to_json(const GeneratedProblem &generated) {
    const GroundTruth &t = generated.truth;
    json j;
    j["schema_version"] = kSchemaVersion;
    j["family"] = std::string(to_string(generated.data.family));
    j["parameter_frame"] = parameter_frame(generated.data.family);
    j["x_true"] = to_json(t.x_true);
    j["inlier_mask"] = t.inlier_mask;
    j["planted_inliers"] = t.planted_inliers();
    if (t.model.size() > 0)
        j["model"] = to_json(t.model);
    j["generator"] = generator_config_to_json(generated.config);
    return j;
}

GroundTruth truth_from_json(const json &j, std::size_t expected_size) {
    check_schema(j, "truth");
    GroundTruth t;
    t.x_true = vector_of(field(j, "x_true", "truth"), "truth.x_true");
    const json &mask = field(j, "inlier_mask", "truth");
    if (!mask.is_array())
        fail("truth.inlier_mask: expected an array of booleans");
    for (const auto &m : mask) {
        if (!m.is_boolean())
            fail("truth.inlier_mask: expected an array of booleans");
        t.inlier_mask.push_back(m.get<bool>());
    }
    if (t.inlier_mask.size() != expected_size)
        fail("truth.inlier_mask: length differs from the instance size");
    if (j.contains("model"))
        t.model = matrix_of(j.at("model"), "truth.model");
    return t;
}

std::vector<Correspondence> parse_correspondences(std::istream &in) {
    std::vector<Correspondence> out;
    std::string line;
    std::size_t lineno = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos)
            view = view.substr(0, hash);
        const auto fields = split_fields(view);
        if (fields.empty())
            continue;
        double vals[4];
        bool numeric = fields.size() == 4;
        for (std::size_t k = 0; numeric && k < 4; ++k)
            numeric = parse_double(fields[k], vals[k]);
        if (!numeric) {
            bool all_text = true;
            for (auto f : fields) {
                double dummy;
                all_text = all_text && !f.empty() && !parse_double(f, dummy);
            }
            if (header_allowed && all_text && fields.size() == 4) {
                header_allowed = false;
                continue;
            }
            fail("line " + std::to_string(lineno) + ": expected four numeric fields u_x,u_y,v_x,v_y");
        }
        header_allowed = false;
        out.push_back({{vals[0], vals[1]}, {vals[2], vals[3]}});
    }
    if (out.empty())
        fail("empty input: no correspondences found");
    return out;
}

std::vector<ViewObservation> parse_tracks(const json &j) {
    check_schema(j, "tracks");
    const json &views = field(j, "views", "tracks");
    if (!views.is_array())
        fail("tracks.views: expected an array");
    std::vector<ViewObservation> out;
    for (std::size_t i = 0; i < views.size(); ++i)
        out.push_back(view_of(views[i], "tracks.views[" + std::to_string(i) + "]"));
    if (out.empty())
        fail("empty input: no views found");
    return out;
}

json read_json_file(const std::filesystem::path &path) {
    std::ifstream in = open_input(path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        fail(path.string() + ": empty input");
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        // Translate the byte offset into a line number.
        const std::size_t upto = std::min(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        fail(path.string() + ": line " + std::to_string(line) + ": invalid JSON");
    }
}

void write_json_file(const std::filesystem::path &path, const json &j) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

std::vector<Correspondence> read_correspondences_file(const std::filesystem::path &path) {
    std::ifstream in = open_input(path);
    try {
        return parse_correspondences(in);
    } catch (const InputError &e) {
        fail(path.string() + ": " + e.what());
    }
}

std::vector<ViewObservation> read_tracks_file(const std::filesystem::path &path) {
    const json j = read_json_file(path);
    try {
        return parse_tracks(j);
    } catch (const InputError &e) {
        fail(path.string() + ": " + e.what());
    } catch (const json::exception &e) {
        fail(path.string() + ": " + e.what());
    }
}

ProblemData read_problem_file(const std::filesystem::path &path) {
    const json j = read_json_file(path);
    try {
        return problem_from_json(j);
    } catch (const InputError &e) {
        fail(path.string() + ": " + e.what());
    } catch (const json::exception &e) {
        fail(path.string() + ": " + e.what());
    }
}

}  // namespace maxcon
