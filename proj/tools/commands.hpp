#pragma once

#include <functional>
#include <vector>

#include <CLI11.hpp>

namespace engage::cli {

// A parsed subcommand and the action it runs once parsing succeeded.
struct Command {
  CLI::App* app = nullptr;
  std::function<void()> run;
};

using Registry = std::vector<Command>;

void add_data_commands(CLI::App& app, Registry& registry);      // ingest, build-dataset, stats
void add_model_commands(CLI::App& app, Registry& registry);     // train-embeddings, train, evaluate, run-protocol
void add_explain_commands(CLI::App& app, Registry& registry);   // explain, delete-eval
void add_report_commands(CLI::App& app, Registry& registry);    // report, significance

}  // namespace engage::cli
