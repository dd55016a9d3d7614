#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "aggflow/dynamics.hpp"
#include "aggflow/measure.hpp"

namespace aggflow {

// Fixed 17-significant-digit float format so that summaries are byte-stable.
inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Streaming JSON emitter with explicit number formatting. nlohmann::json is
// used for parsing; summaries go through this writer to pin the byte layout.
class JsonWriter {
 public:
  void begin_object() {
    comma();
    out_ += '{';
    stack_.push_back(false);
  }
  void end_object() {
    out_ += '}';
    stack_.pop_back();
    mark();
  }
  void begin_array() {
    comma();
    out_ += '[';
    stack_.push_back(false);
  }
  void end_array() {
    out_ += ']';
    stack_.pop_back();
    mark();
  }
  void key(const std::string& k) {
    comma();
    out_ += quote(k);
    out_ += ':';
    pending_value_ = true;
  }
  void value(double v) {
    comma();
    out_ += format_double(v);
    mark();
  }
  void value(int v) { value(static_cast<std::int64_t>(v)); }
  void value(std::int64_t v) {
    comma();
    out_ += std::to_string(v);
    mark();
  }
  void value(std::uint64_t v) {
    comma();
    out_ += std::to_string(v);
    mark();
  }
  void value(bool b) {
    comma();
    out_ += b ? "true" : "false";
    mark();
  }
  void value(const std::string& s) {
    comma();
    out_ += quote(s);
    mark();
  }
  void value(const char* s) { value(std::string(s)); }
  void null() {
    comma();
    out_ += "null";
    mark();
  }

  void kv(const std::string& k, double v) {
    key(k);
    value(v);
  }
  void kv(const std::string& k, const std::string& v) {
    key(k);
    value(v);
  }
  void kv(const std::string& k, const char* v) {
    key(k);
    value(std::string(v));
  }
  void kv(const std::string& k, bool v) {
    key(k);
    value(v);
  }
  void kv_int(const std::string& k, std::int64_t v) {
    key(k);
    value(v);
  }

  void vec(const Vec& v) {
    begin_array();
    for (int i = 0; i < v.dim(); ++i) value(v[i]);
    end_array();
  }

  // re-emits a parsed JSON tree (keys in nlohmann's sorted order)
  void tree(const nlohmann::json& j) {
    if (j.is_object()) {
      begin_object();
      for (auto it = j.begin(); it != j.end(); ++it) {
        key(it.key());
        tree(it.value());
      }
      end_object();
    } else if (j.is_array()) {
      begin_array();
      for (const auto& e : j) tree(e);
      end_array();
    } else if (j.is_number_integer()) {
      value(static_cast<std::int64_t>(j.get<std::int64_t>()));
    } else if (j.is_number_unsigned()) {
      value(j.get<std::uint64_t>());
    } else if (j.is_number_float()) {
      value(j.get<double>());
    } else if (j.is_boolean()) {
      value(j.get<bool>());
    } else if (j.is_string()) {
      value(j.get<std::string>());
    } else {
      null();
    }
  }

  const std::string& str() const { return out_; }

 private:
  void comma() {
    if (pending_value_) {
      pending_value_ = false;
      return;
    }
    if (!stack_.empty() && stack_.back()) out_ += ',';
  }
  void mark() {
    if (!stack_.empty()) stack_.back() = true;
  }
  static std::string quote(const std::string& s) {
    std::string q = "\"";
    for (char c : s) {
      switch (c) {
        case '"': q += "\\\""; break;
        case '\\': q += "\\\\"; break;
        case '\n': q += "\\n"; break;
        case '\t': q += "\\t"; break;
        case '\r': q += "\\r"; break;
        default: q += c;
      }
    }
    q += '"';
    return q;
  }

  std::string out_;
  std::vector<bool> stack_;  // element-written flag per nesting level
  bool pending_value_ = false;
};

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << text;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// ---- measures ----

inline void write_measure(JsonWriter& w, const ParticleMeasure& mu) {
  w.begin_object();
  w.key("positions");
  w.begin_array();
  for (const Vec& p : mu.positions) w.vec(p);
  w.end_array();
  w.key("masses");
  w.begin_array();
  for (double m : mu.masses) w.value(m);
  w.end_array();
  w.end_object();
}

inline std::string measure_to_json(const ParticleMeasure& mu) {
  JsonWriter w;
  write_measure(w, mu);
  return w.str();
}

inline ParticleMeasure measure_from_json(const nlohmann::json& j) {
  if (!j.contains("positions") || !j.contains("masses"))
    throw std::invalid_argument("measure JSON needs \"positions\" and \"masses\"");
  std::vector<Vec> pos;
  for (const auto& row : j.at("positions")) {
    std::vector<double> x = row.get<std::vector<double>>();
    if (x.empty() || x.size() > 3) throw std::invalid_argument("measure JSON: bad position row");
    Vec p(static_cast<int>(x.size()));
    for (std::size_t k = 0; k < x.size(); ++k) p[static_cast<int>(k)] = x[k];
    pos.push_back(p);
  }
  std::vector<double> mass = j.at("masses").get<std::vector<double>>();
  return ParticleMeasure::normalized(std::move(pos), std::move(mass));
}

// CSV, one atom per row: x1[,x2[,x3]],mass
inline std::string measure_to_csv(const ParticleMeasure& mu) {
  std::string s;
  for (int i = 0; i < mu.size(); ++i) {
    for (int k = 0; k < mu.dim(); ++k) {
      s += format_double(mu.positions[i][k]);
      s += ',';
    }
    s += format_double(mu.masses[i]);
    s += '\n';
  }
  return s;
}

inline ParticleMeasure measure_from_csv(const std::string& text) {
  std::vector<Vec> pos;
  std::vector<double> mass;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(std::stod(cell));
    if (cells.size() < 2 || cells.size() > 4) throw std::invalid_argument("measure CSV: bad row");
    Vec p(static_cast<int>(cells.size()) - 1);
    for (int k = 0; k + 1 < static_cast<int>(cells.size()); ++k) p[k] = cells[k];
    pos.push_back(p);
    mass.push_back(cells.back());
  }
  return ParticleMeasure::normalized(std::move(pos), std::move(mass));
}

// ---- trajectories ----

// Header t,atom_id,x1[,x2[,x3]],mass; one row per atom per saved frame. The
// final frame is always written.
inline std::string trajectory_to_csv(const Trajectory& traj, int stride = 1) {
  if (stride < 1) stride = 1;
  const int d = traj.states.front().dim();
  std::string s = "t,atom_id";
  for (int k = 0; k < d; ++k) s += ",x" + std::to_string(k + 1);
  s += ",mass\n";
  const std::size_t last = traj.states.size() - 1;
  for (std::size_t f = 0; f < traj.states.size(); ++f) {
    if (f % stride != 0 && f != last) continue;
    const ParticleMeasure& mu = traj.states[f];
    for (int i = 0; i < mu.size(); ++i) {
      s += format_double(traj.times[f]);
      s += ',' + std::to_string(i);
      for (int k = 0; k < d; ++k) s += ',' + format_double(mu.positions[i][k]);
      s += ',' + format_double(mu.masses[i]);
      s += '\n';
    }
  }
  return s;
}

}  // namespace aggflow
