#pragma once

// Command implementations behind the wtsolve executable. Each command returns
// its stdout/stderr text and exit status instead of printing, so the same code
// path is exercised by the tests.

#include "wishful/beliefs.hpp"
#include "wishful/decision.hpp"
#include "wishful/errors.hpp"
#include "wishful/oracle.hpp"
#include "wishful/problem_file.hpp"
#include "wishful/verify.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace wishful::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitSolverError = 3;

/// Relative output paths are resolved against this directory when it is set.
inline constexpr const char* kOutputDirEnv = "WTSOLVE_OUTPUT_DIR";

struct CommandOutput {
    int exit_code = kExitOk;
    std::string out;
    std::string err;
};

enum class ReportFormat { text, json };

struct AnalyzeFlags {
    std::optional<std::string> divergence;
    std::optional<double> delta;
    std::optional<double> tol;
    std::optional<ReportFormat> format;
};

struct SweepFlags {
    std::optional<std::string> state; ///< index or label
    std::optional<int> grid_points;
    std::vector<std::string> divergences;
    std::optional<std::string> csv;
};

struct VerifyFlags {
    std::optional<int> resolution;
    std::optional<int> refine_iterations;
};

/// 12 significant digits; glibc rounds ties to even.
inline std::string format_number(double x) {
    if (x == 0.0) return "0";
    if (x == kInf) return "inf";
    if (x == -kInf) return "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

namespace detail {

inline std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

inline std::vector<std::string> labels_of(const std::vector<std::size_t>& idx, const std::vector<std::string>& labels) {
    std::vector<std::string> out;
    for (auto i : idx) out.push_back(labels.at(i));
    return out;
}

inline std::string vector_text(const std::vector<double>& v) {
    std::vector<std::string> parts;
    for (double x : v) parts.push_back(format_number(x));
    return "(" + join(parts, ", ") + ")";
}

inline std::string table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& r : rows)
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (width.size() <= c) width.push_back(0);
            width[c] = std::max(width[c], r[c].size());
        }
    std::ostringstream out;
    for (const auto& r : rows) {
        std::string line;
        for (std::size_t c = 0; c < r.size(); ++c) {
            line += r[c];
            if (c + 1 < r.size()) line += std::string(width[c] - r[c].size() + 2, ' ');
        }
        out << line << "\n";
    }
    return out.str();
}

inline std::string resolve_output_path(const std::string& path, const std::optional<std::string>& file_dir) {
    namespace fs = std::filesystem;
    fs::path p(path);
    if (p.is_absolute()) return path;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return (fs::path(env) / p).string();
    if (file_dir) return (fs::path(*file_dir) / p).string();
    return path;
}

template <class Fn>
CommandOutput guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const input_error& e) {
        return {kExitInputError, "", std::string("input error: ") + e.what() + "\n"};
    } catch (const solver_error& e) {
        return {kExitSolverError, "", std::string("solver error: ") + e.what() + "\n"};
    }
}

} // namespace detail

inline std::string analysis_text(const ProblemFile& file, const WTAnalysis& analysis, double tol) {
    const auto& problem = file.problem;
    std::ostringstream out;
    out << "divergence: " << problem.divergence.name << "\n";
    out << "delta: " << format_number(problem.delta) << "\n";
    out << "tol: " << format_number(tol) << "\n";
    out << "states: " << detail::join(problem.state_labels, ", ") << "\n";
    out << "prior: " << detail::vector_text(problem.prior) << "\n\n";

    std::vector<std::vector<std::string>> rows{
        {"action", "lambda_star", "value", "expected_u", "beliefs", "weights", "censored", "emergent", "overprecise"}};
    for (std::size_t a = 0; a < problem.num_actions(); ++a) {
        const auto& r = analysis.per_action[a];
        std::vector<std::string> weights;
        for (const auto& w : r.profile.weights) weights.push_back(w ? format_number(*w) : "n/a");
        auto set_text = [&](const std::vector<std::size_t>& s) {
            return s.empty() ? std::string("-") : detail::join(detail::labels_of(s, problem.state_labels), ",");
        };
        std::string lambda = format_number(r.dual.lambda_star);
        if (r.dual.constrained_at_emergence) lambda += "*";
        rows.push_back({problem.action_labels[a], lambda, format_number(r.dual.value),
                        format_number(analysis.expected_utilities[a]), detail::vector_text(r.profile.beliefs),
                        "(" + detail::join(weights, ", ") + ")", set_text(r.profile.censored),
                        set_text(r.profile.emergent), set_text(r.profile.overprecise)});
    }
    out << detail::table(rows);
    bool pinned = false;
    for (const auto& r : analysis.per_action) pinned = pinned || r.dual.constrained_at_emergence;
    if (pinned) out << "(* multiplier pinned at the emergence constraint)\n";
    for (std::size_t a = 0; a < problem.num_actions(); ++a)
        for (const auto& w : analysis.per_action[a].profile.warnings)
            out << "warning: " << problem.action_labels[a] << ": " << w << "\n";
    out << "\n";
    out << "WT-optimal: " << detail::join(detail::labels_of(analysis.wt_optimal, problem.action_labels), ", ") << "\n";
    out << "EU-optimal: " << detail::join(detail::labels_of(analysis.eu_optimal, problem.action_labels), ", ") << "\n";
    out << "value gap: " << format_number(analysis.value_gap) << "\n";
    if (analysis.wt_optimal != analysis.eu_optimal) out << "note: wishful thinking and expected utility disagree\n";
    return out.str();
}

inline std::string analysis_json(const ProblemFile& file, const WTAnalysis& analysis, double tol) {
    using json = nlohmann::ordered_json;
    const auto& problem = file.problem;
    json root;
    root["divergence"] = problem.divergence.name;
    root["delta"] = problem.delta;
    root["tol"] = tol;
    root["states"] = problem.state_labels;
    root["prior"] = problem.prior;
    json actions = json::array();
    for (std::size_t a = 0; a < problem.num_actions(); ++a) {
        const auto& r = analysis.per_action[a];
        json weights = json::array();
        for (const auto& w : r.profile.weights) weights.push_back(w ? json(*w) : json(nullptr));
        json item;
        item["label"] = problem.action_labels[a];
        item["lambda_star"] = r.dual.lambda_star;
        item["value"] = r.dual.value;
        item["expected_utility"] = analysis.expected_utilities[a];
        item["transformed_utility"] = analysis.transformed_utilities[a];
        item["bracket"] = {r.dual.bracket.first, r.dual.bracket.second};
        item["foc_residual"] = r.dual.foc_residual;
        item["constrained_at_emergence"] = r.dual.constrained_at_emergence;
        item["iterations"] = r.dual.iterations;
        item["weights"] = weights;
        item["beliefs"] = r.profile.beliefs;
        item["censored"] = detail::labels_of(r.profile.censored, problem.state_labels);
        item["emergent"] = detail::labels_of(r.profile.emergent, problem.state_labels);
        item["overprecise"] = detail::labels_of(r.profile.overprecise, problem.state_labels);
        item["residual_mass"] = r.profile.residual_mass;
        item["warnings"] = r.profile.warnings;
        actions.push_back(item);
    }
    root["actions"] = actions;
    root["wt_optimal"] = detail::labels_of(analysis.wt_optimal, problem.action_labels);
    root["eu_optimal"] = detail::labels_of(analysis.eu_optimal, problem.action_labels);
    root["value_gap"] = analysis.value_gap;
    return root.dump(2) + "\n";
}

inline CommandOutput run_analyze(ProblemFile file, const AnalyzeFlags& flags) {
    return detail::guarded([&]() -> CommandOutput {
        if (flags.divergence) {
            file.divergence = *flags.divergence;
            file.problem.divergence = builtin_divergence(file.divergence);
        }
        if (flags.delta) file.problem.delta = *flags.delta;
        const double tol = flags.tol.value_or(file.tol);
        if (!(tol > 0.0)) throw input_error("tol must be positive");
        ReportFormat format = ReportFormat::text;
        if (file.output && file.output->format == "json") format = ReportFormat::json;
        if (flags.format) format = *flags.format;

        const auto analysis = analyze(file.problem, tol);
        CommandOutput out;
        out.out = format == ReportFormat::json ? analysis_json(file, analysis, tol) : analysis_text(file, analysis, tol);
        return out;
    });
}

inline CommandOutput cmd_analyze(const std::string& path, const AnalyzeFlags& flags) {
    ProblemFile file;
    if (auto failed = detail::guarded([&] {
            file = load_problem_file(path);
            return CommandOutput{};
        });
        failed.exit_code != kExitOk)
        return failed;
    return run_analyze(std::move(file), flags);
}

inline constexpr const char* kSweepHeader = "divergence,q,lambda_star,p_star,censored,emergent";

/// CSV text for the prior sweep, one row per (divergence, grid point).
inline std::string sweep_csv(const DecisionProblem& problem, std::size_t state, std::size_t action, int grid_points,
                             const std::vector<std::string>& divergences, double tol) {
    if (grid_points < 1) throw input_error("sweep: grid points must be at least 1");
    std::vector<double> grid;
    for (int i = 0; i <= grid_points; ++i) grid.push_back(static_cast<double>(i) / grid_points);
    std::ostringstream csv;
    csv << kSweepHeader << "\n";
    for (const auto& name : divergences) {
        DecisionProblem p = problem;
        p.divergence = builtin_divergence(name);
        for (const auto& row : sweep_prior(p, state, grid, action, tol))
            csv << name << "," << format_number(row.q) << "," << format_number(row.lambda_star) << ","
                << format_number(row.p_star) << "," << (row.censored ? "true" : "false") << ","
                << (row.emergent ? "true" : "false") << "\n";
    }
    return csv.str();
}

inline CommandOutput run_sweep(const ProblemFile& file, const SweepFlags& flags) {
    return detail::guarded([&]() -> CommandOutput {
        const auto& problem = file.problem;
        if (problem.num_states() != 2) throw input_error("sweep: the problem must have exactly two states");
        const SweepSettings settings = file.sweep.value_or(SweepSettings{});

        std::size_t state = settings.state.value_or(0);
        if (flags.state) {
            const auto& labels = problem.state_labels;
            auto it = std::find(labels.begin(), labels.end(), *flags.state);
            if (it != labels.end()) {
                state = static_cast<std::size_t>(it - labels.begin());
            } else {
                try {
                    std::size_t used = 0;
                    state = std::stoul(*flags.state, &used);
                    if (used != flags.state->size()) throw std::invalid_argument("trailing characters");
                } catch (const std::logic_error&) {
                    throw input_error("sweep: unknown state '" + *flags.state + "'");
                }
            }
        }
        if (state >= 2) throw input_error("sweep: state index out of range");
        const int points = flags.grid_points.value_or(settings.grid_points);
        std::vector<std::string> divergences = flags.divergences;
        if (divergences.empty()) divergences = settings.divergences;
        if (divergences.empty()) divergences = {file.divergence};
        for (const auto& d : divergences) parse_divergence_kind(d);

        const std::string csv = sweep_csv(problem, state, settings.action, points, divergences, file.tol);
        CommandOutput out;
        std::optional<std::string> target = flags.csv ? flags.csv : settings.csv;
        if (!target) {
            out.out = csv;
            return out;
        }
        const auto dir = file.output ? file.output->directory : std::nullopt;
        const std::string path = detail::resolve_output_path(*target, dir);
        std::ofstream f(path, std::ios::binary);
        if (!f) throw input_error("cannot write CSV to '" + path + "'");
        f << csv;
        const auto rows = static_cast<int>(divergences.size()) * (points + 1);
        out.out = "wrote " + std::to_string(rows) + " rows to " + path + "\n";
        return out;
    });
}

inline CommandOutput cmd_sweep(const std::string& path, const SweepFlags& flags) {
    ProblemFile file;
    if (auto failed = detail::guarded([&] {
            file = load_problem_file(path);
            return CommandOutput{};
        });
        failed.exit_code != kExitOk)
        return failed;
    return run_sweep(file, flags);
}

inline CommandOutput run_verify(const ProblemFile& file, const VerifyFlags& flags) {
    return detail::guarded([&]() -> CommandOutput {
        const auto& problem = file.problem;
        const std::size_t n = problem.num_states();
        if (n > oracle::kMaxStates)
            throw input_error("verify: " + std::to_string(n) + " states exceeds the oracle enumeration bound of " +
                              std::to_string(oracle::kMaxStates));
        const VerifySettings settings = file.verify.value_or(VerifySettings{});
        oracle::GridSpec grid;
        grid.resolution = flags.resolution.value_or(settings.resolution.value_or(oracle::max_resolution(n)));
        const int refine = flags.refine_iterations.value_or(settings.refine_iterations);

        std::vector<std::vector<std::string>> rows{{"action", "dual", "oracle", "gap", "bound", "status"}};
        bool all_pass = true;
        for (std::size_t a = 0; a < problem.num_actions(); ++a) {
            VerifyRow row;
            try {
                row = verify_action(problem.divergence, problem.row(a), problem.prior, problem.delta, grid, refine,
                                    file.tol);
            } catch (const solver_error& e) {
                throw solver_error("action '" + problem.action_labels[a] + "': " + e.what());
            }
            all_pass = all_pass && row.pass;
            rows.push_back({problem.action_labels[a], format_number(row.dual_value), format_number(row.oracle_value),
                            format_number(row.gap), format_number(row.bound), row.pass ? "PASS" : "FAIL"});
        }
        CommandOutput out;
        out.out = "divergence: " + problem.divergence.name + "\nresolution: " + std::to_string(grid.resolution) +
                  "\nrefine iterations: " + std::to_string(refine) + "\n\n" + detail::table(rows);
        out.exit_code = all_pass ? kExitOk : kExitCheckFailed;
        return out;
    });
}

inline CommandOutput cmd_verify(const std::string& path, const VerifyFlags& flags) {
    ProblemFile file;
    if (auto failed = detail::guarded([&] {
            file = load_problem_file(path);
            return CommandOutput{};
        });
        failed.exit_code != kExitOk)
        return failed;
    return run_verify(file, flags);
}

} // namespace wishful::cli
