#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace rtcli {

using json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Cell = std::variant<double, long long, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  json summary = json::object();
};

inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_cell(const Cell& c) {
  struct {
    std::string operator()(double v) const { return fmt_double(v); }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string q = "\"";
      for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      return q + "\"";
    }
  } visit;
  return std::visit(visit, c);
}

inline json json_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? json(*d) : json(nullptr);
  if (const auto* i = std::get_if<long long>(&c)) return *i;
  if (const auto* b = std::get_if<bool>(&c)) return *b;
  return std::get<std::string>(c);
}

// JSON numbers keep 17 significant digits through a custom serializer pass
inline void dump_json(std::ostream& os, const json& j, int indent = 0) {
  const std::string pad(indent, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      std::size_t i = 0;
      for (const auto& [key, val] : j.items()) {
        os << pad << "  " << json(key).dump() << ": ";
        dump_json(os, val, indent + 2);
        os << (++i < j.size() ? ",\n" : "\n");
      }
      os << pad << "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        os << pad << "  ";
        dump_json(os, j[i], indent + 2);
        os << (i + 1 < j.size() ? ",\n" : "\n");
      }
      os << pad << "]";
      return;
    }
    case json::value_t::number_float:
      os << fmt_double(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

inline void write_csv(std::ostream& os, const json& meta, const Table& t) {
  os << "# rtevans " << meta["version"].get<std::string>() << " " << meta["command"].get<std::string>() << "\n";
  std::ostringstream cfg;
  dump_json(cfg, meta["config"]);
  std::string line;
  std::istringstream in(cfg.str());
  os << "# config:\n";
  while (std::getline(in, line)) os << "#   " << line << "\n";
  if (!t.summary.empty()) {
    std::ostringstream sm;
    dump_json(sm, t.summary);
    std::istringstream in2(sm.str());
    os << "# summary:\n";
    while (std::getline(in2, line)) os << "#   " << line << "\n";
  }
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
    os << "\n";
  }
}

inline void write_json(std::ostream& os, const json& meta, const Table& t) {
  json doc = json::object();
  doc["meta"] = meta;
  if (!t.summary.empty()) doc["meta"]["summary"] = t.summary;
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = json_cell(row[i]);
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  dump_json(os, doc);
  os << "\n";
}

inline void emit(const std::string& path, const std::string& format, const json& meta, const Table& t) {
  auto write = [&](std::ostream& os) { format == "json" ? write_json(os, meta, t) : write_csv(os, meta, t); };
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open output file " + path);
  write(f);
  if (!f) throw IoError("failed writing " + path);
}

}  // namespace rtcli
