#pragma once

#ifdef CON360_CLI11_SINGLE_HEADER
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "con360/geometry.hpp"
#include "con360/tensor.hpp"

namespace con360::cli {

namespace fs = std::filesystem;
using nlohmann::json;

// Bad flag values detected after CLI11 has parsed the line.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunContext {
  fs::path data_root;  // empty means the working directory
  std::string run_id;
  std::uint64_t seed = 0;
  std::ostream* out = nullptr;

  // Relative inputs resolve against the data root.
  fs::path input(const std::string& arg) const;
  // Relative outputs resolve against <data_root>/runs/<run_id>; parents are
  // created.
  fs::path output(const std::string& arg) const;
  fs::path output_dir(const std::string& arg) const;
  void report(const fs::path& written) const;
};

// Parameters, input digests and output digests of one command invocation.
class Sidecar {
 public:
  explicit Sidecar(std::string command) : command_(std::move(command)) {}

  json params = json::object();

  void add_input(const std::string& role, const std::string& arg, const fs::path& resolved);
  void add_output(const fs::path& file);
  // Writes to `path`; output names are stored relative to its directory.
  void write(const fs::path& path) const;

 private:
  std::string command_;
  json inputs_ = json::array();
  std::vector<fs::path> outputs_;
};

// <dir>/sidecar.json for directory outputs, <stem>.sidecar.json for files.
fs::path sidecar_path_for_file(const fs::path& file);
fs::path sidecar_path_for_dir(const fs::path& dir);

// Keeps option storage alive and maps each leaf subcommand to its action.
class Registry {
 public:
  template <typename T>
  std::shared_ptr<T> make() {
    auto p = std::make_shared<T>();
    storage_.push_back(p);
    return p;
  }
  void on(const CLI::App* sub, std::function<void()> action) { actions_[sub] = std::move(action); }
  const std::function<void()>* find(const CLI::App* sub) const {
    auto it = actions_.find(sub);
    return it == actions_.end() ? nullptr : &it->second;
  }

 private:
  std::vector<std::shared_ptr<void>> storage_;
  std::map<const CLI::App*, std::function<void()>> actions_;
};

void add_project_commands(CLI::App& app, Registry& reg, RunContext& ctx);
void add_cond_commands(CLI::App& app, Registry& reg, RunContext& ctx);
void add_eval_commands(CLI::App& app, Registry& reg, RunContext& ctx);
void add_dataset_commands(CLI::App& app, Registry& reg, RunContext& ctx);

// "90x90" -> (90, 90), in the units given.
std::pair<double, double> parse_pair(const std::string& text, char sep, const char* what);
std::vector<double> parse_list(const std::string& text, const char* what);
double deg_to_rad(double deg);
double rad_to_deg(double rad);

// Min-max packs a single-channel plane into 16-bit samples for viewing.
void write_preview_pgm(std::span<const float> plane, std::size_t width, std::size_t height,
                       const fs::path& path);

json fov_to_json(const geometry::FovSpec& fov);
geometry::FovSpec fov_from_json(const json& j);

}  // namespace con360::cli
