#include "wishful/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

int main(int argc, char** argv) {
    using namespace wishful::cli;

    CLI::App app{"wtsolve: optimal wishful-thinking beliefs and actions under phi-divergence costs"};
    app.require_subcommand(1);
    app.footer("Precedence: command-line flags override file values, which override the defaults\n"
               "(divergence=kl, delta=1, tol=1e-10). Relative output paths are resolved against\n"
               "$WTSOLVE_OUTPUT_DIR when set.\n"
               "Exit status: 0 success, 1 verification failure, 2 input error, 3 solver error.");

    std::string path;
    const std::map<std::string, ReportFormat> formats{{"text", ReportFormat::text}, {"json", ReportFormat::json}};

    AnalyzeFlags analyze_flags;
    auto* analyze = app.add_subcommand("analyze", "Solve every action and report beliefs and optimal sets");
    analyze->add_option("file", path, "Problem file (JSON)")->required();
    analyze->add_option("--divergence", analyze_flags.divergence, "kl | hellinger | mod_chi2 | burg");
    analyze->add_option("--delta", analyze_flags.delta, "Marginal distortion cost");
    analyze->add_option("--tol", analyze_flags.tol, "Absolute tolerance on the dual multiplier");
    analyze->add_option("--format", analyze_flags.format, "text | json")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

    SweepFlags sweep_flags;
    auto* sweep = app.add_subcommand("sweep", "Sweep the prior of one state of a two-state problem (CSV)");
    sweep->add_option("file", path, "Problem file (JSON)")->required();
    sweep->add_option("--state", sweep_flags.state, "Swept state (index or label)");
    sweep->add_option("--grid-points,-N", sweep_flags.grid_points, "Grid is {0, 1/N, ..., 1}");
    sweep->add_option("--divergences", sweep_flags.divergences, "Divergences to sweep")->delimiter(',');
    sweep->add_option("--csv", sweep_flags.csv, "Write the CSV here instead of stdout");

    VerifyFlags verify_flags;
    auto* verify = app.add_subcommand("verify", "Check dual values against the brute-force primal oracle");
    verify->add_option("file", path, "Problem file (JSON)")->required();
    verify->add_option("--resolution", verify_flags.resolution, "Lattice subdivisions per simplex edge");
    verify->add_option("--refine-iterations", verify_flags.refine_iterations, "Local refinement sweeps");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInputError;
    }

    CommandOutput result;
    if (*analyze) result = cmd_analyze(path, analyze_flags);
    else if (*sweep) result = cmd_sweep(path, sweep_flags);
    else result = cmd_verify(path, verify_flags);

    std::cout << result.out;
    std::cerr << result.err;
    return result.exit_code;
}
