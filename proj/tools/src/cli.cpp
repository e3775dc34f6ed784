#include "con360/cli.hpp"

#include <algorithm>
#include <cmath>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iostream>

#include "con360/error.hpp"
#include "con360/parallel.hpp"
#include "context.hpp"

namespace con360::cli {
namespace {

int fail(std::ostream& err, std::string_view kind, const std::string& message, int code) {
  err << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
  return code;
}

const CLI::App* leaf_of(const CLI::App& app) {
  const CLI::App* node = &app;
  for (;;) {
    const auto subs = node->get_subcommands();
    if (subs.empty()) return node;
    node = subs.front();
  }
}

std::string timestamp_run_id() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &utc);
  return buf;
}

unsigned parse_threads(const std::string& text) {
  if (text == "auto") return 0;
  const auto values = parse_list(text, "--threads");
  if (values.size() != 1 || values[0] < 1 || values[0] != std::floor(values[0])) {
    throw UsageError("--threads must be a positive integer or 'auto'");
  }
  return static_cast<unsigned>(values[0]);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"con360: 360-degree conditioning pipeline tools", "con360"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");

  RunContext ctx;
  ctx.out = &out;
  std::string threads = "auto";
  std::string data_root;
  if (const char* env = std::getenv("CON360_DATA_ROOT")) data_root = env;
  app.add_option("--threads", threads, "Worker threads: a count or 'auto'")
      ->capture_default_str();
  app.add_option("--data-root", data_root, "Base directory for relative paths (CON360_DATA_ROOT)");
  app.add_option("--run-id", ctx.run_id, "Run directory name under <data-root>/runs");
  app.add_option("--seed", ctx.seed, "Seed for seeded steps")->capture_default_str();

  Registry reg;
  add_project_commands(app, reg, ctx);
  add_cond_commands(app, reg, ctx);
  add_eval_commands(app, reg, ctx);
  add_dataset_commands(app, reg, ctx);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return fail(err, "usage", e.what(), kExitUsage);
  }

  try {
    set_thread_count(parse_threads(threads));
    ctx.data_root = data_root;
    if (ctx.run_id.empty()) ctx.run_id = timestamp_run_id();
    const auto* action = reg.find(leaf_of(app));
    if (action == nullptr) return fail(err, "usage", "missing subcommand", kExitUsage);
    (*action)();
  } catch (const UsageError& e) {
    return fail(err, "usage", e.what(), kExitUsage);
  } catch (const Error& e) {
    const int code = e.kind() == ErrorKind::kIo ? kExitIo : kExitValidation;
    return fail(err, error_kind_name(e.kind()), e.what(), code);
  } catch (const fs::filesystem_error& e) {
    return fail(err, "io", e.what(), kExitIo);
  } catch (const json::exception& e) {
    return fail(err, "schema", e.what(), kExitValidation);
  } catch (const std::exception& e) {
    return fail(err, "internal", e.what(), 1);
  }
  return kExitOk;
}

int run(const std::vector<std::string>& args) { return run(args, std::cout, std::cerr); }

}  // namespace con360::cli
