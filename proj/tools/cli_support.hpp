#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "roofkit/error.hpp"

namespace roofkit::cli {

namespace fs = std::filesystem;

// Outcome of one unit of work: a log line or an error.
struct FileResult {
  std::string log;
  std::string error_kind;
  std::string error_message;
  std::string file;

  bool failed() const { return !error_kind.empty(); }
};

int exit_code_for(const std::string& kind);
std::string error_json(const std::string& kind, const std::string& message,
                       const std::string& file = {});

// Runs body(i) for i in [0, n) on `workers` threads. Exceptions are turned
// into FileResult errors; results come back in index order.
std::vector<FileResult> run_files(std::size_t n, int workers,
                                  const std::function<std::string(std::size_t)>& body,
                                  const std::function<std::string(std::size_t)>& name_of);

// Prints logs to stdout and errors to stderr in index order and returns
// the process exit code.
int report(const std::vector<FileResult>& results, std::ostream& log = std::cout);

// Sorted regular files in `dir` ending in `suffix`; throws IoError if the
// directory is missing.
std::vector<fs::path> list_files(const fs::path& dir, const std::string& suffix);

// Filename with `suffix` removed.
std::string stem_of(const fs::path& path, const std::string& suffix);

void ensure_directory(const fs::path& dir);

// Config-file values for options not given on the command line.
class ConfigBinder {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& flag, T& target, const std::string& help) {
    CLI::Option* opt = app->add_option(flag, target, help);
    std::string key = flag.substr(flag.find_first_not_of('-'));
    for (auto& ch : key) {
      if (ch == '-') ch = '_';
    }
    bindings_.push_back({app, opt, key, [&target](const nlohmann::json& v) { target = v.get<T>(); }});
    return opt;
  }

  // Applies `config` to every option of `app` that was not set by a flag.
  void apply(const nlohmann::json& config, const CLI::App* app) const;

 private:
  struct Binding {
    const CLI::App* app;
    CLI::Option* option;
    std::string key;
    std::function<void(const nlohmann::json&)> assign;
  };
  std::vector<Binding> bindings_;
};

std::vector<std::vector<std::string>> read_csv(const fs::path& path);

}  // namespace roofkit::cli
