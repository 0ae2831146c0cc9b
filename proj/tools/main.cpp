#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "vmemflow/experiment.hpp"

namespace {

struct SubcommandArgs {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, SubcommandArgs& args) {
    cmd->add_option("--config", args.config, "configuration file path")->required();
    cmd->add_option("--out", args.out, "output directory")->required();
    cmd->add_option("--seed", args.seed, "random seed for sampled diagnostics");
}

int dispatch(vmemflow::ExperimentKind kind, const SubcommandArgs& args) {
    std::ifstream in(args.config);
    if (!in) {
        std::cerr << "error: cannot open config file " << args.config << "\n";
        return vmemflow::kExitConfig;
    }
    std::ostringstream text;
    text << in.rdbuf();
    vmemflow::ExperimentSpec spec;
    try {
        spec = vmemflow::parse_config(text.str(), kind);
    } catch (const vmemflow::ConfigError& e) {
        std::cerr << "config error";
        if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
        std::cerr << ": " << e.what() << "\n";
        std::error_code ec;
        std::filesystem::create_directories(args.out, ec);
        std::ofstream err(std::filesystem::path(args.out) / "error.txt");
        err << "code = " << vmemflow::kExitConfig << "\n";
        err << "type = config\n";
        err << "message = " << e.what() << "\n";
        if (e.line() > 0) err << "line = " << e.line() << "\n";
        return vmemflow::kExitConfig;
    }
    const int rc = vmemflow::run_experiment(spec, args.out, args.seed);
    if (rc == vmemflow::kExitPass)
        std::cout << "OK: artifacts written to " << args.out << "\n";
    else
        std::cerr << "exit " << rc << ": see " << args.out << " for details\n";
    return rc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"viscoelastic flow laboratory: kernel quadrature, steady and transient "
                 "solvers, decay and convergence studies"};
    app.require_subcommand(1);

    SubcommandArgs a_kernel, a_trans, a_steady, a_decay, a_conv;
    add_common(app.add_subcommand("kernel-check",
                                  "weight table, positivity certificate, kernel identities"),
               a_kernel);
    add_common(app.add_subcommand("run-transient", "time-march the flow with memory"), a_trans);
    add_common(app.add_subcommand("solve-steady", "solve the effective-viscosity steady state"),
               a_steady);
    add_common(app.add_subcommand("decay-study",
                                  "fit the exponential convergence to the steady state"),
               a_decay);
    add_common(app.add_subcommand("convergence-study", "refinement study with observed orders"),
               a_conv);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : vmemflow::kExitConfig;
    }

    if (app.got_subcommand("kernel-check"))
        return dispatch(vmemflow::ExperimentKind::kernel_check, a_kernel);
    if (app.got_subcommand("run-transient"))
        return dispatch(vmemflow::ExperimentKind::run_transient, a_trans);
    if (app.got_subcommand("solve-steady"))
        return dispatch(vmemflow::ExperimentKind::solve_steady, a_steady);
    if (app.got_subcommand("decay-study"))
        return dispatch(vmemflow::ExperimentKind::decay_study, a_decay);
    return dispatch(vmemflow::ExperimentKind::convergence_study, a_conv);
}
