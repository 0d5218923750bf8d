#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gadgetforge/pipeline.h"
#include "gadgetforge/sarif.h"
#include "gadgetforge/store.h"

namespace fs = std::filesystem;
using namespace gadgetforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNoEffect = 1;
constexpr int kExitIo = 2;

struct Options {
  std::string out = "results.jsonl";
  int max_runs = kDefaultMaxRuns;
  std::uint64_t step_budget = kDefaultStepBudget;
  std::vector<std::string> allow;
  std::vector<std::string> deny;
  int jobs = 1;
  std::string special_table;
  std::vector<std::string> packages;
  std::string list_file;
  int top = 0;
  std::string package;
  std::string sarif_dir = ".";
  std::vector<std::string> pollute;
  std::string command;
};

AnalysisContext make_context(const Options& o) {
  AnalysisContext ctx;
  ctx.max_runs = o.max_runs;
  ctx.step_budget = o.step_budget;
  if (!o.allow.empty()) ctx.strategy.allow = o.allow;
  if (!o.deny.empty()) ctx.strategy.deny = o.deny;
  if (!o.special_table.empty()) ctx.special_table = load_special_table(o.special_table);
  return ctx;
}

bool is_package_dir(const fs::path& p) { return fs::is_regular_file(p / "package.json"); }

// Expands the command-line package arguments into package directories.
// Returns false when any argument could not be read.
bool collect_packages(const Options& o, std::vector<fs::path>& out) {
  bool ok = true;
  std::vector<std::string> args = o.packages;
  if (!o.list_file.empty()) {
    std::ifstream in(o.list_file);
    if (!in) {
      std::cerr << "error: cannot read package list " << o.list_file << "\n";
      return false;
    }
    for (std::string line; std::getline(in, line);)
      if (!line.empty() && line[0] != '#') args.push_back(line);
  }
  for (const auto& a : args) {
    fs::path p(a);
    std::error_code ec;
    if (!fs::is_directory(p, ec)) {
      std::cerr << "error: not a directory: " << a << "\n";
      ok = false;
      continue;
    }
    if (is_package_dir(p)) {
      out.push_back(p);
      continue;
    }
    std::vector<fs::path> children;
    for (const auto& e : fs::directory_iterator(p, ec))
      if (e.is_directory() && is_package_dir(e.path())) children.push_back(e.path());
    std::sort(children.begin(), children.end());
    if (children.empty()) out.push_back(p);
    out.insert(out.end(), children.begin(), children.end());
  }
  return ok;
}

int cmd_analyze(const Options& o) {
  std::vector<fs::path> dirs;
  bool ok = collect_packages(o, dirs);
  AnalysisContext ctx;
  try {
    ctx = make_context(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }

  std::vector<PackageReport> reports(dirs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < dirs.size(); i = next++) reports[i] = analyze_package(dirs[i], ctx);
  };
  std::vector<std::thread> pool;
  int jobs = std::max(1, std::min<int>(o.jobs, static_cast<int>(dirs.size())));
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  ResultsStore store(o.out);
  for (const auto& r : reports) {
    try {
      store.append(r);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitIo;
    }
    std::cout << r.summary_line() << "\n";
  }
  return ok ? kExitOk : kExitIo;
}

int cmd_report(const Options& o) {
  std::vector<PackageReport> reports;
  try {
    reports = ResultsStore(o.out).latest_reports();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  if (reports.empty()) {
    std::cout << "no reports\n";
    return kExitOk;
  }
  reports = prioritize(std::move(reports));
  if (o.top > 0 && reports.size() > static_cast<std::size_t>(o.top)) reports.resize(o.top);

  const SinkCategory categories[] = {SinkCategory::ACE, SinkCategory::ACI, SinkCategory::LFI,
                                     SinkCategory::FileWrite, SinkCategory::FileRead,
                                     SinkCategory::Network};
  std::printf("%-4s %-20s %-5s %5s", "rank", "package", "best", "hits");
  for (auto c : categories) std::printf(" %9s", std::string(to_string(c)).c_str());
  std::printf(" %8s %8s %12s %4s  %s\n", "standard", "special", "name-matched", "runs", "status");
  int rank = 0;
  for (const auto& r : reports) {
    auto cat = r.category_summary();
    auto mode = r.mode_summary();
    bool any = !r.hits.empty();
    std::printf("%-4d %-20s %-5s %5zu", ++rank, r.name.c_str(),
                any ? std::string(to_string(r.best_category())).c_str() : "-", r.hits.size());
    for (auto c : categories) std::printf(" %9zu", cat[c]);
    std::printf(" %8zu %8zu %12zu %4zu  %s\n", mode[SinkMode::Standard], mode[SinkMode::Special],
                mode[SinkMode::NameMatched], r.runs.size(),
                r.skipped ? ("skipped " + std::string(to_string(*r.skipped))).c_str() : "analyzed");
  }
  return kExitOk;
}

int cmd_export_sarif(const Options& o) {
  std::optional<PackageReport> report;
  try {
    report = ResultsStore(o.out).latest(o.package);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  if (!report) {
    std::cerr << "error: no report for package '" << o.package << "'\n";
    return kExitIo;
  }
  fs::path target = fs::path(o.sarif_dir) / (report->name + ".sarif");
  std::ofstream out(target, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "error: cannot write " << target.string() << "\n";
    return kExitIo;
  }
  out << export_sarif(*report).dump(2) << "\n";
  std::cout << target.string() << ": " << report->hits.size() << " result"
            << (report->hits.size() == 1 ? "" : "s") << "\n";
  return kExitOk;
}

int cmd_verify(const Options& o) {
  fs::path dir(o.package);
  if (!is_package_dir(dir)) {
    std::cerr << "error: unknown package " << o.package << "\n";
    return kExitIo;
  }
  std::vector<Pollution> pollutions;
  std::vector<VerifyRun> runs;
  try {
    for (const auto& p : o.pollute) pollutions.push_back(parse_pollution(p));
    runs = verify_with_pollution(dir, pollutions, o.command, make_context(o));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  bool fired = false;
  for (const auto& run : runs) {
    std::cout << run.command << ": " << to_string(run.outcome.status);
    if (!run.outcome.error.empty()) std::cout << " (" << run.outcome.error << ")";
    std::cout << "\n";
    for (const auto& line : run.outcome.stdout_log) std::cout << "  stdout " << line << "\n";
    for (const auto& e : run.outcome.effects_log) {
      std::cout << "  effect " << e.module << "." << e.name << " [" << to_string(e.category)
                << "] " << e.text << "\n";
      if (e.category != SinkCategory::None) fired = true;
    }
  }
  return fired ? kExitOk : kExitNoEffect;
}

int cmd_compact(const Options& o) {
  try {
    std::size_t dropped = ResultsStore(o.out).compact();
    std::cout << "dropped " << dropped << " line" << (dropped == 1 ? "" : "s") << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gadgetforge: prototype-pollution gadget detection for MiniJS packages"};
  app.require_subcommand(1);
  Options o;

  auto out_flag = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Results store (JSON Lines)")
        ->envname("GADGETFORGE_OUT")
        ->capture_default_str();
  };
  auto run_flags = [&](CLI::App* sub) {
    sub->add_option("--step-budget", o.step_budget, "Interpreter steps per test command")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--allow", o.allow, "Allowed test command patterns");
    sub->add_option("--deny", o.deny, "Denied test command patterns");
    sub->add_option("--special-table", o.special_table, "Special-sink table (JSON)")
        ->check(CLI::ExistingFile);
  };

  auto* analyze = app.add_subcommand("analyze", "Analyze packages and append results");
  out_flag(analyze);
  run_flags(analyze);
  analyze->add_option("packages", o.packages, "Package directories or directories of packages");
  analyze->add_option("--list", o.list_file, "File listing package directories");
  analyze->add_option("--max-runs", o.max_runs, "Runs per package")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  analyze->add_option("--jobs,-j", o.jobs, "Parallel workers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* report = app.add_subcommand("report", "Print prioritized packages");
  out_flag(report);
  report->add_option("--top", o.top, "Only the first N packages")->check(CLI::PositiveNumber);

  auto* sarif = app.add_subcommand("export-sarif", "Write <package>.sarif from the latest report");
  out_flag(sarif);
  sarif->add_option("package", o.package, "Package name")->required();
  sarif->add_option("--dir", o.sarif_dir, "Output directory")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "Replay tests with a polluted root prototype");
  run_flags(verify);
  verify->add_option("package", o.package, "Package directory")->required();
  verify->add_option("--pollute", o.pollute, "key=value, value as a literal or JSON");
  verify->add_option("--command", o.command, "Single test command to run");

  auto* compact = app.add_subcommand("compact", "Keep only the latest report per package");
  out_flag(compact);

  CLI11_PARSE(app, argc, argv);

  if (analyze->parsed()) return cmd_analyze(o);
  if (report->parsed()) return cmd_report(o);
  if (sarif->parsed()) return cmd_export_sarif(o);
  if (verify->parsed()) return cmd_verify(o);
  return cmd_compact(o);
}
