#include <fmt/format.h>

#include <json.hpp>

#include "roofkit/geojson.hpp"
#include "roofkit/metrics.hpp"

namespace roofkit {

namespace {

std::string number(double v) { return is_absent(v) ? "null" : fmt::format("{:.6f}", v); }
std::string cell(double v) { return is_absent(v) ? "" : fmt::format("{:.6f}", v); }

const char* mode_name(EvalMode mode) {
  return mode == EvalMode::kBinary ? "binary" : "multiclass";
}

struct Field {
  const char* name;
  double MetricsReport::*member;
};

constexpr Field kScalarFields[] = {
    {"iou", &MetricsReport::iou},
    {"miou3", &MetricsReport::miou3},
    {"miou5", &MetricsReport::miou5},
    {"ap50", &MetricsReport::ap50},
    {"ap50_95", &MetricsReport::ap50_95},
    {"map50_3", &MetricsReport::map50_3},
    {"map50_5", &MetricsReport::map50_5},
    {"map50_95_3", &MetricsReport::map50_95_3},
    {"map50_95_5", &MetricsReport::map50_95_5},
};

double read_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return kAbsent;
  return j.at(key).get<double>();
}

}  // namespace

std::string format_report(const MetricsReport& r, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::kCsv) {
    out = "metric,value\n";
    if (r.image_count == 0) return out;
    out += fmt::format("images,{}\n", r.image_count);
    for (const auto& f : kScalarFields) {
      out += fmt::format("{},{}\n", f.name, cell(r.*f.member));
    }
    out += fmt::format("tps,{}\n", r.tps);
    for (const auto& [c, m] : r.per_class) {
      out += fmt::format("iou_class_{},{}\n", c, cell(m.iou));
      out += fmt::format("ap50_class_{},{}\n", c, cell(m.ap50));
      out += fmt::format("ap50_95_class_{},{}\n", c, cell(m.ap50_95));
    }
    return out;
  }

  out = "{\n";
  out += fmt::format("  \"mode\": \"{}\",\n", mode_name(r.mode));
  out += fmt::format("  \"images\": {},\n", r.image_count);
  for (const auto& f : kScalarFields) {
    out += fmt::format("  \"{}\": {},\n", f.name, number(r.*f.member));
  }
  out += fmt::format("  \"tps\": {},\n", r.tps);
  out += "  \"per_class\": {";
  bool first = true;
  for (const auto& [c, m] : r.per_class) {
    out += first ? "\n" : ",\n";
    first = false;
    out += fmt::format("    \"{}\": {{\"iou\": {}, \"ap50\": {}, \"ap50_95\": {}}}", c,
                       number(m.iou), number(m.ap50), number(m.ap50_95));
  }
  out += first ? "}\n}\n" : "\n  }\n}\n";
  return out;
}

void write_report(const MetricsReport& report, const std::filesystem::path& path,
                  ReportFormat format) {
  write_text_file(path, format_report(report, format));
}

MetricsReport parse_report_json(const std::string& text) {
  MetricsReport r;
  try {
    const auto j = nlohmann::json::parse(text);
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "binary") {
      r.mode = EvalMode::kBinary;
    } else if (mode == "multiclass") {
      r.mode = EvalMode::kMulticlass;
    } else {
      throw FormatError("report: unknown mode '" + mode + "'");
    }
    r.image_count = j.at("images").get<std::size_t>();
    for (const auto& f : kScalarFields) r.*f.member = read_number(j, f.name);
    r.tps = j.at("tps").get<std::size_t>();
    for (const auto& [key, value] : j.at("per_class").items()) {
      ClassMetrics m;
      m.iou = read_number(value, "iou");
      m.ap50 = read_number(value, "ap50");
      m.ap50_95 = read_number(value, "ap50_95");
      r.per_class[std::stoi(key)] = m;
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("report: ") + e.what());
  }
  return r;
}

}  // namespace roofkit
