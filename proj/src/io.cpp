#include "mobo/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mobo/errors.hpp"

namespace mobo {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field");
  fields.push_back(std::move(cur));
  return fields;
}

std::string metric_row(const MetricRecord& r) {
  std::string ids;
  for (std::size_t i = 0; i < r.batch_ids.size(); ++i) {
    if (i) ids += ';';
    ids += r.batch_ids[i];
  }
  std::string row = std::to_string(r.iteration) + "," + format_double(r.hv) + ",";
  if (r.relative_hvi) row += format_double(*r.relative_hvi);
  row += ",";
  if (r.fraction_recovered) row += format_double(*r.fraction_recovered);
  row += "," + csv_field(ids);
  return row;
}

std::string metrics_csv(const std::vector<MetricRecord>& rows) {
  std::string out(kMetricsCsvHeader);
  out += '\n';
  for (const auto& r : rows) out += metric_row(r) + '\n';
  return out;
}

json metric_to_json(const MetricRecord& r) {
  json j;
  j["iteration"] = r.iteration;
  j["hv"] = r.hv;
  j["relative_hvi"] = r.relative_hvi ? json(*r.relative_hvi) : json(nullptr);
  j["fraction_recovered"] = r.fraction_recovered ? json(*r.fraction_recovered) : json(nullptr);
  j["batch_ids"] = r.batch_ids;
  return j;
}

MetricRecord metric_from_json(const json& j) {
  MetricRecord r;
  r.iteration = j.at("iteration").get<std::size_t>();
  r.hv = j.at("hv").get<double>();
  if (!j.at("relative_hvi").is_null()) r.relative_hvi = j.at("relative_hvi").get<double>();
  if (!j.at("fraction_recovered").is_null()) r.fraction_recovered = j.at("fraction_recovered").get<double>();
  r.batch_ids = j.at("batch_ids").get<std::vector<std::string>>();
  return r;
}

json front_to_json(const ParetoFront& front) {
  json pts = json::array();
  for (const auto& p : front.points()) {
    json e;
    e["id"] = p.id ? json(*p.id) : json(nullptr);
    e["values"] = p.values;
    pts.push_back(std::move(e));
  }
  return json{{"ref_point", front.ref_point()}, {"points", std::move(pts)}};
}

ParetoFront front_from_json(const json& j) {
  try {
    ParetoFront front(j.at("ref_point").get<ObjectiveVector>());
    for (const auto& e : j.at("points")) {
      std::optional<std::string> id;
      if (e.contains("id") && !e.at("id").is_null()) id = e.at("id").get<std::string>();
      front.insert(e.at("values").get<ObjectiveVector>(), std::move(id));
    }
    return front;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed front document: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write file: " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw InvalidInput("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::vector<double> parse_number_list(std::string_view s) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find(',', start);
    if (end == std::string_view::npos) end = s.size();
    std::string tok(s.substr(start, end - start));
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw ParseError("not a number: '" + tok + "'");
    }
    if (used != tok.size()) throw ParseError("not a number: '" + tok + "'");
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

}  // namespace mobo
