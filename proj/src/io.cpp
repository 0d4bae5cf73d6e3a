#include "spinal/io.hpp"

#include "json.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace spinal::io {

using nlohmann::json;
using experiment::LayerTrace;
using experiment::Trajectory;
using experiment::TrajectoryRow;

ParseError::ParseError(const std::string& path, std::size_t line, const std::string& what)
    : std::runtime_error(line ? path + ":" + std::to_string(line) + ": " + what
                              : path + ": " + what),
      line_(line) {}

const std::vector<std::string> kTrajectoryColumns = {
    "t", "phi_h", "phi_k", "phi_h_dot", "phi_k_dot", "alpha", "alpha_dot", "l",
    "tau_h", "tau_k", "phase", "contact"};

namespace {

const char* const kFields[3] = {"G", "pi", "r"};

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(const std::string& s, const std::string& name, std::size_t line,
                    const std::string& column) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError(name, line, "column " + column + ": not a number: '" + s + "'");
  }
  return v;
}

// "{model}_{field}_{k}" -> parts; false if the name does not fit.
bool parse_layer_column(const std::string& col, std::string& model, int& field, int& k) {
  const auto last = col.rfind('_');
  if (last == std::string::npos || last == 0) return false;
  const auto mid = col.rfind('_', last - 1);
  if (mid == std::string::npos || mid == 0) return false;
  model = col.substr(0, mid);
  const std::string f = col.substr(mid + 1, last - mid - 1);
  field = -1;
  for (int i = 0; i < 3; ++i)
    if (f == kFields[i]) field = i;
  const std::string num = col.substr(last + 1);
  const auto res = std::from_chars(num.data(), num.data() + num.size(), k);
  return field >= 0 && res.ec == std::errc() && res.ptr == num.data() + num.size() && k >= 1;
}

json matrix_json(const mulnet::WeightMatrix& w) {
  return json(std::vector<double>(w.a.begin(), w.a.end()));
}

mulnet::WeightMatrix matrix_from(const json& j, const std::string& name, const std::string& key) {
  if (!j.is_array() || j.size() != simd::kCells) {
    throw ParseError(name, 0, key + ": expected 64 numbers (row-major 8x8)");
  }
  mulnet::WeightMatrix w;
  for (std::size_t c = 0; c < simd::kCells; ++c) {
    if (!j[c].is_number()) throw ParseError(name, 0, key + ": entry " + std::to_string(c) + " is not a number");
    w.a[c] = j[c].get<double>();
  }
  return w;
}

}  // namespace

std::string format_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string out;
  for (std::size_t c = 0; c < kTrajectoryColumns.size(); ++c) {
    if (c) out += ',';
    out += kTrajectoryColumns[c];
  }
  for (const auto& m : traj.models) {
    for (int k = 1; k <= m.layers; ++k) {
      for (const char* f : kFields) out += ',' + m.name + '_' + f + '_' + std::to_string(k);
    }
  }
  out += '\n';
  for (std::size_t r = 0; r < traj.rows.size(); ++r) {
    const TrajectoryRow& row = traj.rows[r];
    const double fixed[] = {row.state.t,         row.state.phi_h,     row.state.phi_k,
                            row.state.phi_h_dot, row.state.phi_k_dot, row.kin.alpha,
                            row.kin.alpha_dot,   row.kin.l,           row.torques.tau_h,
                            row.torques.tau_k};
    for (std::size_t c = 0; c < std::size(fixed); ++c) {
      if (c) out += ',';
      append_double(out, fixed[c]);
    }
    out += ',' + std::to_string(static_cast<int>(row.phase)) + ',' + (row.contact ? '1' : '0');
    for (const auto& m : traj.models) {
      for (int k = 0; k < m.layers; ++k) {
        for (int f = 0; f < 3; ++f) {
          out += ',';
          append_double(out, m.at(r, k, f));
        }
      }
    }
    out += '\n';
  }
  return out;
}

void write_trajectory(const std::string& path, const Trajectory& traj) {
  write_text(path, trajectory_csv(traj));
}

Trajectory parse_trajectory(const std::string& text, const std::string& name) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(name, 1, "missing header");
  const auto header = split(line);
  if (header.size() < kTrajectoryColumns.size()) {
    throw ParseError(name, 1, "header has " + std::to_string(header.size()) +
                                  " columns, expected at least " +
                                  std::to_string(kTrajectoryColumns.size()));
  }
  for (std::size_t c = 0; c < kTrajectoryColumns.size(); ++c) {
    if (header[c] != kTrajectoryColumns[c]) {
      throw ParseError(name, 1, "column " + std::to_string(c + 1) + " is '" + header[c] +
                                    "', expected '" + kTrajectoryColumns[c] + "'");
    }
  }

  // Layer columns must come as complete G, pi, r triples for k = 1, 2, ...
  Trajectory traj;
  for (std::size_t c = kTrajectoryColumns.size(); c < header.size(); ++c) {
    std::string model;
    int field = 0, k = 0;
    if (!parse_layer_column(header[c], model, field, k)) {
      throw ParseError(name, 1, "unrecognised column '" + header[c] + "'");
    }
    if (traj.models.empty() || traj.models.back().name != model) {
      if (field != 0 || k != 1) throw ParseError(name, 1, "column '" + header[c] + "' out of order");
      traj.models.push_back({model, 0, {}});
    }
    LayerTrace& m = traj.models.back();
    const int expected_k = field == 0 ? m.layers + 1 : m.layers;
    if (k != expected_k || field != static_cast<int>((c - kTrajectoryColumns.size()) % 3)) {
      throw ParseError(name, 1, "column '" + header[c] + "' out of order");
    }
    if (field == 0) ++m.layers;
  }
  if ((header.size() - kTrajectoryColumns.size()) % 3 != 0) {
    throw ParseError(name, 1, "incomplete per-layer column triple");
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ParseError(name, line_no, "row has " + std::to_string(cells.size()) +
                                          " fields, header has " + std::to_string(header.size()));
    }
    auto num = [&](std::size_t c) { return parse_double(cells[c], name, line_no, header[c]); };
    TrajectoryRow row;
    row.state.t = num(0);
    row.state.phi_h = num(1);
    row.state.phi_k = num(2);
    row.state.phi_h_dot = num(3);
    row.state.phi_k_dot = num(4);
    row.kin.alpha = num(5);
    row.kin.alpha_dot = num(6);
    row.kin.l = num(7);
    row.torques.tau_h = num(8);
    row.torques.tau_k = num(9);
    if (cells[10] != "1" && cells[10] != "2" && cells[10] != "3") {
      throw ParseError(name, line_no, "phase must be 1, 2 or 3, got '" + cells[10] + "'");
    }
    row.phase = static_cast<control::Phase>(cells[10][0] - '0');
    if (cells[11] != "0" && cells[11] != "1") {
      throw ParseError(name, line_no, "contact must be 0 or 1, got '" + cells[11] + "'");
    }
    row.contact = cells[11] == "1";
    std::size_t c = kTrajectoryColumns.size();
    for (auto& m : traj.models) {
      for (int k = 0; k < m.layers * 3; ++k, ++c) m.cells.push_back(num(c));
    }
    traj.rows.push_back(row);
  }
  return traj;
}

Trajectory read_trajectory(const std::string& path) {
  return parse_trajectory(read_text(path), path);
}

std::string model_json(const grp::GrpModel& model) {
  const auto& c = model.config;
  json layers = json::array();
  for (const auto& layer : model.layers) {
    layers.push_back({{"W", matrix_json(layer.generator)}, {"R", matrix_json(layer.predictor)}});
  }
  json doc = {{"format", "spinal-grp-model"},
              {"version", kModelFormatVersion},
              {"config",
               {{"layers", c.layers}, {"mu", c.mu}, {"lambda", c.lambda}, {"gamma0", c.gamma0},
                {"beta", c.beta}, {"w_gain", c.w_gain}, {"init_scale", c.init_scale},
                {"seed", c.seed}}},
              {"gamma", model.gamma},
              {"episode_count", model.episode_count},
              {"layers", layers}};
  return doc.dump(1) + "\n";
}

grp::GrpModel parse_model(const std::string& text, const std::string& name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(name, 0, std::string("malformed JSON: ") + e.what());
  }
  try {
    if (doc.at("format") != "spinal-grp-model") throw ParseError(name, 0, "not a model file");
    if (doc.at("version") != kModelFormatVersion) {
      throw ParseError(name, 0, "unsupported model format version " + doc.at("version").dump());
    }
    grp::GrpModel model;
    const json& c = doc.at("config");
    model.config.layers = c.at("layers").get<int>();
    model.config.mu = c.at("mu").get<double>();
    model.config.lambda = c.at("lambda").get<double>();
    model.config.gamma0 = c.at("gamma0").get<double>();
    model.config.beta = c.at("beta").get<double>();
    model.config.w_gain = c.at("w_gain").get<double>();
    model.config.init_scale = c.at("init_scale").get<double>();
    model.config.seed = c.at("seed").get<std::uint64_t>();
    model.config.validate();
    model.gamma = doc.at("gamma").get<double>();
    model.episode_count = doc.at("episode_count").get<std::uint64_t>();
    const json& layers = doc.at("layers");
    if (!layers.is_array() || static_cast<int>(layers.size()) != model.config.layers) {
      throw ParseError(name, 0, "layer count does not match config.layers");
    }
    for (std::size_t k = 0; k < layers.size(); ++k) {
      const std::string key = "layers[" + std::to_string(k) + "]";
      model.layers.push_back({matrix_from(layers[k].at("W"), name, key + ".W"),
                              matrix_from(layers[k].at("R"), name, key + ".R")});
    }
    return model;
  } catch (const json::exception& e) {
    throw ParseError(name, 0, e.what());
  } catch (const grp::ConfigError& e) {
    throw ParseError(name, 0, std::string("config.") + e.what());
  }
}

void write_model(const std::string& path, const grp::GrpModel& model) {
  write_text(path, model_json(model));
}

grp::GrpModel read_model(const std::string& path) { return parse_model(read_text(path), path); }

std::string report_json(const experiment::EvalReport& report) {
  using dynamics::rad2deg;
  json rows = json::array();
  for (std::size_t i = 0; i < report.trajectories.size(); ++i) {
    const auto& t = report.trajectories[i];
    rows.push_back({{"index", i},
                    {"alpha_tgt_deg", rad2deg(t.alpha_tgt)},
                    {"alpha_end_deg", rad2deg(t.alpha_end)},
                    {"error_deg", t.error_deg()},
                    {"contact", t.contact},
                    {"timed_out", t.timed_out},
                    {"integration_failed", t.integration_failed}});
  }
  json doc = {{"trajectories", rows},
              {"average_error_deg", report.average_error_deg},
              {"max_error_deg", report.max_error_deg},
              {"active_threshold", report.active_threshold},
              {"hip",
               {{"active_generators", report.hip_active},
                {"peak_responsibility", report.hip_peak_responsibility}}},
              {"knee",
               {{"active_generators", report.knee_active},
                {"peak_responsibility", report.knee_peak_responsibility}}}};
  return doc.dump(2) + "\n";
}

void write_report(const std::string& path, const experiment::EvalReport& report) {
  write_text(path, report_json(report));
}

void write_training_log(const std::string& path, const experiment::TrainingLog& log) {
  std::string out = "episode,hip_responsible,knee_responsible";
  const std::size_t hm = log.hip_error.empty() ? 0 : log.hip_error.front().size();
  const std::size_t km = log.knee_error.empty() ? 0 : log.knee_error.front().size();
  for (std::size_t k = 1; k <= hm; ++k) out += ",hip_eG_" + std::to_string(k);
  for (std::size_t k = 1; k <= km; ++k) out += ",knee_eG_" + std::to_string(k);
  out += '\n';
  for (std::size_t e = 0; e < log.hip_responsible_error.size(); ++e) {
    out += std::to_string(e) + ',';
    append_double(out, log.hip_responsible_error[e]);
    out += ',';
    append_double(out, log.knee_responsible_error[e]);
    for (double v : log.hip_error[e]) {
      out += ',';
      append_double(out, v);
    }
    for (double v : log.knee_error[e]) {
      out += ',';
      append_double(out, v);
    }
    out += '\n';
  }
  write_text(path, out);
}

std::string weight_summary_json(const grp::GrpModel& model) {
  json layers = json::array();
  const auto summary = experiment::weight_summary(model);
  for (std::size_t k = 0; k < summary.size(); ++k) {
    const auto& s = summary[k];
    layers.push_back({{"layer", k + 1},
                      {"generator_norm", s.generator_norm},
                      {"generator_max_abs", s.generator_max_abs},
                      {"predictor_norm", s.predictor_norm},
                      {"predictor_max_abs", s.predictor_max_abs},
                      {"W", matrix_json(s.generator)},
                      {"R", matrix_json(s.predictor)}});
  }
  return json{{"layers", layers}}.dump(1) + "\n";
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out.flush()) throw std::runtime_error("failed writing " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace spinal::io
