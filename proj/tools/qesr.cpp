// qesr: qubit-detected ESR simulator.
//
//   qesr <spectrum|swap|transfer|sensitivity|density> --config FILE [--out DIR]
//        [--threads N] [--mode narrow-pulse|exact-convolution]
//   qesr --config FILE --print-effective-config
//
// Exit status: 0 success, 2 configuration error, 3 numerical guard
// violation, 4 I/O error.

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "qesr/app.hpp"
#include "qesr/config.hpp"

int main(int argc, char** argv) {
  using namespace qesr;
  CLI::App cli{"Qubit-detected ESR simulator"};
  cli.require_subcommand(0, 1);
  cli.fallthrough();

  std::string config_path;
  std::string out_dir;
  unsigned threads = 1;
  std::string mode_text;
  bool print_config = false;

  cli.add_option("--config", config_path, "JSON run configuration (frequencies in Hz)")->required();
  cli.add_option("--out", out_dir, "Output directory (default: output.directory of the config)");
  cli.add_option("--threads", threads, "Worker threads for parameter sweeps (0 = all cores)")->default_val(1);
  cli.add_option("--mode", mode_text, "Transfer mode for spectrum and transfer")
      ->check(CLI::IsMember({"narrow-pulse", "exact-convolution"}));
  cli.add_flag("--print-effective-config", print_config, "Print the resolved configuration and exit");

  const std::pair<app::Subcommand, const char*> commands[] = {
      {app::Subcommand::spectrum, "Qubit-detected ESR spectrum P_e(omega_p)"},
      {app::Subcommand::swap, "Single-photon swap oscillation"},
      {app::Subcommand::transfer, "Transfer amplitude beta(t), contour and time-domain"},
      {app::Subcommand::sensitivity, "Weak-coupling minimum detectable spin number"},
      {app::Subcommand::density, "Discretized spin densities"},
  };
  for (const auto& [sub, help] : commands) cli.add_subcommand(std::string(app::to_string(sub)), help);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.exit(e);
    return app::config_error;
  }

  try {
    const RunConfig config = parse_config_file(config_path);
    if (print_config) {
      std::cout << print_effective_config(config);
      return app::success;
    }
    if (cli.get_subcommands().empty()) {
      std::cerr << "error: a subcommand is required (spectrum, swap, transfer, sensitivity, density)\n";
      return app::config_error;
    }

    app::RunOptions options;
    options.output_directory = out_dir;
    options.threads = threads;
    if (mode_text == "narrow-pulse") options.mode = TransferMode::narrow_pulse;
    if (mode_text == "exact-convolution") options.mode = TransferMode::exact_convolution;

    const auto name = cli.get_subcommands().front()->get_name();
    std::optional<app::Subcommand> sub;
    for (const auto& [s, help] : commands)
      if (app::to_string(s) == name) sub = s;

    const auto report = app::run(*sub, config, options);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& f : report.files) std::cout << f.string() << "\n";
    return app::success;
  } catch (const std::exception& e) {
    const int code = app::exit_code_for(e);
    std::cerr << "error: " << e.what() << "\n";
    return code;
  }
}
