#include <algorithm>
#include <iostream>
#include <memory>
#include <sstream>

#include "commands.hpp"
#include "common.hpp"
#include "engage/error.hpp"
#include "engage/eval.hpp"

namespace engage::cli {

namespace {

void load_file(const fs::path& path, std::vector<RunResult>& out) {
  if (path.extension() == ".jsonl") {
    std::istringstream in(read_text_file(path));
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) {
      ++n;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        if (nlohmann::json::parse(line).contains("error")) continue;  // failed protocol run
        out.push_back(parse_run_result(line));
      } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ":" + std::to_string(n) + ": " + e.what());
      } catch (const DataError& e) {
        throw DataError(path.string() + ":" + std::to_string(n) + ": " + e.what());
      }
    }
  } else {
    out.push_back(read_run_result(path));
  }
}

// Files are read as given; directories contribute every result.json and
// runs.jsonl beneath them, in path order.
std::vector<RunResult> load_results(const std::vector<std::string>& paths) {
  std::vector<RunResult> out;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& entry : fs::recursive_directory_iterator(p))
        if (entry.is_regular_file() &&
            (entry.path().filename() == "result.json" || entry.path().filename() == "runs.jsonl"))
          files.push_back(entry.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) load_file(f, out);
    } else {
      load_file(p, out);
    }
  }
  return out;
}

struct ReportArgs {
  int table = 2;
  std::vector<std::string> results;
  std::string out;
};

void run_report(const ReportArgs& a, const CLI::App& cmd) {
  const auto results = load_results(a.results);
  const ReportTable table = a.table == 2 ? comment_table(results) : review_table(results);
  const fs::path out = resolve_output(a.out, "report");
  fs::create_directories(out);
  const std::string stem = "table" + std::to_string(a.table);
  std::ostringstream csv, text;
  write_table_csv(csv, table);
  write_table_text(text, table);
  write_text_file(out / (stem + ".csv"), csv.str());
  write_text_file(out / (stem + ".txt"), text.str());
  write_frozen_config(out / ("report-" + stem + ".config.json"), cmd,
                      {{"output", out.string()}, {"runs", results.size()}});
  std::cout << text.str();
}

struct SignificanceArgs {
  std::vector<std::string> a, b;
  std::string out;
};

void run_significance(const SignificanceArgs& args, const CLI::App& cmd) {
  const auto ra = load_results(args.a);
  const auto rb = load_results(args.b);
  std::map<std::uint64_t, double> by_seed;
  for (const auto& r : rb)
    if (!by_seed.emplace(r.seed, r.accuracy).second) throw DataError("duplicate seed in --b results");
  std::vector<double> xa, xb;
  std::vector<std::uint64_t> seeds;
  for (const auto& r : ra) {
    auto it = by_seed.find(r.seed);
    if (it == by_seed.end()) throw DataError("seed " + std::to_string(r.seed) + " has no partner in --b results");
    xa.push_back(r.accuracy);
    xb.push_back(it->second);
    seeds.push_back(r.seed);
  }
  if (xa.size() != rb.size()) throw DataError("--a and --b cover different seeds");
  const auto s = paired_ttest(xa, xb);
  nlohmann::json j{{"n", s.n},
                   {"df", s.df},
                   {"mean_difference", s.mean_difference},
                   {"critical", s.critical},
                   {"alpha", 0.05},
                   {"reject", s.reject},
                   {"seeds", seeds},
                   {"model_a", ra.empty() ? "" : ra.front().model},
                   {"model_b", rb.empty() ? "" : rb.front().model}};
  j["t"] = std::isfinite(s.t) ? nlohmann::json(s.t) : nlohmann::json(s.t > 0 ? "inf" : "-inf");
  const fs::path out = resolve_output(args.out, "significance");
  fs::create_directories(out);
  write_text_file(out / "significance.json", j.dump(2) + "\n");
  write_frozen_config(out / "significance.config.json", cmd, {{"output", out.string()}});
  std::cout << "n " << s.n << ", mean difference " << s.mean_difference << ", t " << s.t << ", critical "
            << s.critical << ": " << (s.reject ? "reject" : "fail to reject") << " H0 (a <= b)\n";
}

}  // namespace

void add_report_commands(CLI::App& app, Registry& registry) {
  {
    auto a = std::make_shared<ReportArgs>();
    auto* c = app.add_subcommand("report", "Accuracy tables from evaluation results");
    c->add_option("--table", a->table, "2: comments by signal and band, 3: reviews by band")
        ->required()
        ->check(CLI::IsMember({2, 3}));
    c->add_option("--results", a->results, "result.json / runs.jsonl files or directories holding them")
        ->required()
        ->check(CLI::ExistingPath);
    c->add_option("-o,--out", a->out, "Output directory");
    registry.push_back({c, [a, c] { run_report(*a, *c); }});
  }
  {
    auto a = std::make_shared<SignificanceArgs>();
    auto* c = app.add_subcommand("significance", "Paired one-tailed t-test of model a over model b");
    c->add_option("--a", a->a, "Results of the model expected to be better")->required()->check(CLI::ExistingPath);
    c->add_option("--b", a->b, "Results of the reference model")->required()->check(CLI::ExistingPath);
    c->add_option("-o,--out", a->out, "Output directory");
    registry.push_back({c, [a, c] { run_significance(*a, *c); }});
  }
}

}  // namespace engage::cli
