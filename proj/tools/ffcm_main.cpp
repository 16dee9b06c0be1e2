// Command-line front end: exact circle-method verification and prediction
// over F_q[t].  Subcommands mirror the library surface; configuration is a
// JSON file, reports are JSON/CSV in the output directory.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ffcm/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"exact function-field circle method toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "ffcm-out";
  std::vector<std::string> files;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config)
      sub->add_option("-c,--config", config_path, "JSON config file")
          ->required();
    sub->add_option("-o,--out", out_dir, "output directory for reports");
  };

  add_common(app.add_subcommand("count", "exact N_{a,b}(d) counts"), true);
  add_common(app.add_subcommand(
                 "predict", "density report and dominance profile"),
             true);
  add_common(app.add_subcommand("singular-series",
                                "truncated singular series"),
             true);
  add_common(app.add_subcommand("expsum", "one complete exponential sum"),
             true);
  add_common(app.add_subcommand("verify-identities",
                                "exact identity suite; exit 1 on mismatch"),
             true);
  auto* rep = app.add_subcommand("report", "merge CSV sweep files");
  rep->add_option("files", files, "CSV files to merge")->required();
  add_common(rep, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : ffcm::kExitConfigError;
  }

  std::string sub = app.get_subcommands().front()->get_name();
  try {
    ffcm::RunConfig cfg;
    if (sub != "report") cfg = ffcm::load_config(config_path);
    return ffcm::run(sub, cfg, out_dir, std::cout, files);
  } catch (const ffcm::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return ffcm::kExitConfigError;
  } catch (const ffcm::capacity_error& e) {
    std::cerr << "budget exhausted: " << e.what() << "\n";
    return ffcm::kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ffcm::kExitConfigError;
  }
}
