#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "engage/error.hpp"

namespace {

constexpr int kUsage = 2;
constexpr int kData = 3;
constexpr int kNumeric = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Engagement prediction pipeline: corpus ingestion, position-bias normalized datasets, "
               "classifiers, explanations and reports.\n"
               "Relative output paths resolve against $ENGAGE_OUTPUT_ROOT when set."};
  app.set_version_flag("--version", "engage 0.1.0");
  app.require_subcommand(1);
  engage::cli::Registry registry;
  engage::cli::add_data_commands(app, registry);
  engage::cli::add_model_commands(app, registry);
  engage::cli::add_explain_commands(app, registry);
  engage::cli::add_report_commands(app, registry);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    for (const auto& cmd : registry)
      if (cmd.app->parsed()) {
        cmd.run();
        return 0;
      }
    std::cerr << "error: no command given\n";
    return kUsage;
  } catch (const engage::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const engage::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const engage::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
