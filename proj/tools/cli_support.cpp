#include "cli_support.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

namespace roofkit::cli {

int exit_code_for(const std::string& kind) {
  if (kind == "validation") return 2;
  return 3;
}

std::string error_json(const std::string& kind, const std::string& message,
                       const std::string& file) {
  nlohmann::json j = {{"error", kind}, {"message", message}};
  if (!file.empty()) j["file"] = file;
  return j.dump();
}

std::vector<FileResult> run_files(std::size_t n, int workers,
                                  const std::function<std::string(std::size_t)>& body,
                                  const std::function<std::string(std::size_t)>& name_of) {
  std::vector<FileResult> results(n);
  auto one = [&](std::size_t i) {
    FileResult& r = results[i];
    r.file = name_of(i);
    try {
      r.log = body(i);
    } catch (const Error& e) {
      r.error_kind = e.kind();
      r.error_message = e.what();
    } catch (const std::filesystem::filesystem_error& e) {
      r.error_kind = "io";
      r.error_message = e.what();
    } catch (const std::exception& e) {
      r.error_kind = "error";
      r.error_message = e.what();
    }
  };
  const std::size_t threads = std::min<std::size_t>(std::max(1, workers), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) one(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) one(i);
      });
    }
  }
  return results;
}

int report(const std::vector<FileResult>& results, std::ostream& log) {
  int code = 0;
  for (const auto& r : results) {
    if (r.failed()) {
      std::cerr << error_json(r.error_kind, r.error_message, r.file) << "\n";
      if (code == 0) code = exit_code_for(r.error_kind);
    } else if (!r.log.empty()) {
      log << r.log << "\n";
    }
  }
  return code;
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& suffix) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() >= suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string stem_of(const fs::path& path, const std::string& suffix) {
  const std::string name = path.filename().string();
  return name.substr(0, name.size() - suffix.size());
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

void ConfigBinder::apply(const nlohmann::json& config, const CLI::App* app) const {
  for (const auto& b : bindings_) {
    if (b.app != app || b.option->count() > 0) continue;
    if (!config.contains(b.key)) continue;
    try {
      b.assign(config.at(b.key));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("config key '" + b.key + "': " + e.what());
    }
  }
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace roofkit::cli
