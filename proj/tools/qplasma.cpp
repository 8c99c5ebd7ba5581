#include "qplasma/commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
    CLI::App app{"Quantum two-stream dispersion, stability maps and Wigner-Poisson simulation"};
    std::string command;
    std::string config_path;
    std::string out_dir = "out";
    std::string format = "csv";
    app.add_option("command", command, "dispersion | map | bands | simulate | sweep | verify")
        ->required()
        ->check(CLI::IsMember({"dispersion", "map", "bands", "simulate", "sweep", "verify"}));
    app.add_option("--config", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--format", format, "csv or json-lines")
        ->capture_default_str()
        ->check(CLI::IsMember({"csv", "json-lines"}));
    CLI11_PARSE(app, argc, argv);

    try {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) throw qplasma::Error("cannot read " + config_path);
        std::ostringstream text;
        text << in.rdbuf();
        const qplasma::RunSpec spec = qplasma::parse_config(text.str());
        if (command != qplasma::to_string(spec.command))
            throw qplasma::ConfigError("command line asks for '" + command + "' but " + config_path +
                                       " configures '" + qplasma::to_string(spec.command) + "'");
        qplasma::OutputSink sink(out_dir, qplasma::parse_format(format));
        return qplasma::run_command(spec, sink, std::cout);
    } catch (const qplasma::ConfigError& e) {
        std::cerr << "qplasma: config error in " << config_path << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "qplasma " << command << ": " << e.what() << '\n';
        return 1;
    }
}
