#pragma once

#include "wishful/decision.hpp"
#include "wishful/divergence.hpp"
#include "wishful/dual_solver.hpp"
#include "wishful/errors.hpp"

#include <json.hpp>

#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace wishful {

inline constexpr int kSchemaVersion = 1;

struct SweepSettings {
    std::optional<std::size_t> state;
    std::size_t action = 0;
    int grid_points = 100;
    std::vector<std::string> divergences;
    std::optional<std::string> csv;
};

struct VerifySettings {
    std::optional<int> resolution;
    int refine_iterations = 50;
};

struct OutputSettings {
    std::optional<std::string> format; ///< "text" or "json"
    std::optional<std::string> directory;
};

/// On-disk problem description. Divergences are named; custom specs are a
/// library-only feature.
struct ProblemFile {
    int schema_version = kSchemaVersion;
    DecisionProblem problem;
    std::string divergence = "kl";
    double tol = kDefaultTolerance;
    std::optional<SweepSettings> sweep;
    std::optional<VerifySettings> verify;
    std::optional<OutputSettings> output;
};

namespace detail {

using json = nlohmann::ordered_json;

inline std::string describe_parse_error(const std::string& text, std::size_t byte, const char* what) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    std::ostringstream msg;
    msg << "line " << line << ", column " << col << ": " << what;
    return msg.str();
}

template <class T>
T read_field(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key)) throw input_error("field '" + path + key + "': missing");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw input_error("field '" + path + key + "': " + e.what());
    }
}

template <class T>
std::optional<T> read_optional(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    return read_field<T>(obj, key, path);
}

inline std::vector<std::string> default_labels(const char* prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
    return out;
}

} // namespace detail

/// Parses and validates a problem file. Throws input_error naming the line or
/// field at fault.
inline ProblemFile parse_problem_file(const std::string& text) {
    using detail::json;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw input_error(detail::describe_parse_error(text, e.byte, e.what()));
    }
    if (!root.is_object()) throw input_error("line 1, column 1: top level must be an object");

    ProblemFile file;
    file.schema_version = detail::read_field<int>(root, "schema_version", "");
    if (file.schema_version != kSchemaVersion)
        throw input_error("field 'schema_version': version " + std::to_string(file.schema_version) +
                          " is not supported (expected " + std::to_string(kSchemaVersion) + ")");

    auto& problem = file.problem;
    problem.utilities = detail::read_field<std::vector<std::vector<double>>>(root, "utilities", "");
    problem.prior = detail::read_field<std::vector<double>>(root, "prior", "");
    problem.action_labels = detail::read_optional<std::vector<std::string>>(root, "actions", "")
                                .value_or(detail::default_labels("a", problem.utilities.size()));
    problem.state_labels = detail::read_optional<std::vector<std::string>>(root, "states", "")
                               .value_or(detail::default_labels("w", problem.prior.size()));
    problem.delta = detail::read_optional<double>(root, "delta", "").value_or(1.0);
    file.divergence = detail::read_optional<std::string>(root, "divergence", "").value_or("kl");
    file.tol = detail::read_optional<double>(root, "tol", "").value_or(kDefaultTolerance);
    if (!(file.tol > 0.0)) throw input_error("field 'tol': must be positive");
    problem.divergence = builtin_divergence(file.divergence);

    if (root.contains("sweep") && !root.at("sweep").is_null()) {
        const auto& s = root.at("sweep");
        if (!s.is_object()) throw input_error("field 'sweep': expected an object");
        SweepSettings sweep;
        sweep.state = detail::read_optional<std::size_t>(s, "state", "sweep.");
        sweep.action = detail::read_optional<std::size_t>(s, "action", "sweep.").value_or(0);
        sweep.grid_points = detail::read_optional<int>(s, "grid_points", "sweep.").value_or(100);
        sweep.divergences = detail::read_optional<std::vector<std::string>>(s, "divergences", "sweep.").value_or(std::vector<std::string>{});
        sweep.csv = detail::read_optional<std::string>(s, "csv", "sweep.");
        for (const auto& name : sweep.divergences) parse_divergence_kind(name);
        file.sweep = sweep;
    }
    if (root.contains("verify") && !root.at("verify").is_null()) {
        const auto& v = root.at("verify");
        if (!v.is_object()) throw input_error("field 'verify': expected an object");
        VerifySettings verify;
        verify.resolution = detail::read_optional<int>(v, "resolution", "verify.");
        verify.refine_iterations = detail::read_optional<int>(v, "refine_iterations", "verify.").value_or(50);
        file.verify = verify;
    }
    if (root.contains("output") && !root.at("output").is_null()) {
        const auto& o = root.at("output");
        if (!o.is_object()) throw input_error("field 'output': expected an object");
        OutputSettings output;
        output.format = detail::read_optional<std::string>(o, "format", "output.");
        output.directory = detail::read_optional<std::string>(o, "directory", "output.");
        if (output.format && *output.format != "text" && *output.format != "json")
            throw input_error("field 'output.format': expected \"text\" or \"json\"");
        file.output = output;
    }

    validate(problem);
    return file;
}

inline ProblemFile load_problem_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open problem file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_problem_file(buf.str());
}

/// Serializes with shortest round-trip number formatting, so parsing the
/// result restores every double bit for bit.
inline std::string serialize_problem_file(const ProblemFile& file) {
    using detail::json;
    json root;
    root["schema_version"] = file.schema_version;
    root["actions"] = file.problem.action_labels;
    root["states"] = file.problem.state_labels;
    root["utilities"] = file.problem.utilities;
    root["prior"] = file.problem.prior;
    root["delta"] = file.problem.delta;
    root["divergence"] = file.divergence;
    root["tol"] = file.tol;
    if (file.sweep) {
        json s;
        if (file.sweep->state) s["state"] = *file.sweep->state;
        s["action"] = file.sweep->action;
        s["grid_points"] = file.sweep->grid_points;
        s["divergences"] = file.sweep->divergences;
        if (file.sweep->csv) s["csv"] = *file.sweep->csv;
        root["sweep"] = s;
    }
    if (file.verify) {
        json v;
        if (file.verify->resolution) v["resolution"] = *file.verify->resolution;
        v["refine_iterations"] = file.verify->refine_iterations;
        root["verify"] = v;
    }
    if (file.output) {
        json o = json::object();
        if (file.output->format) o["format"] = *file.output->format;
        if (file.output->directory) o["directory"] = *file.output->directory;
        root["output"] = o;
    }
    return root.dump(2) + "\n";
}

} // namespace wishful
