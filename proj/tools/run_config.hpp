#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "neurocoarse/errors.hpp"
#include "neurocoarse/version.hpp"

namespace neurocoarse::cli {

// Every semantic knob of every subcommand, with the reference defaults
// (N = 20000, d = 4, T = 5, copies = 10000, dT = 1, fd_delta = 1e-2).
// out_dir and threads are execution details and stay out of manifests.
struct RunConfig {
  // network
  int n_neurons = 20000;
  int degree = 4;
  std::uint64_t master_seed = 1;
  // model / ensemble
  double epsilon = 0.162;
  int copies = 10000;
  int horizon_T = 5;
  int dT = 1;
  std::string lift_mode = "manifold";  // or "uniform"
  // simulate
  std::vector<double> p0_list{0.1, 0.7};
  int steps = 400;
  // portrait
  double p0 = 0.6;
  std::vector<double> rho11_targets{0.26, 0.31, 0.36, 0.40, 0.41};
  int portrait_steps = 12;
  int portrait_copies = 500;
  // continuation
  double epsilon_min = 0.10;
  double epsilon_max = 0.30;
  double delta_s = 0.01;
  double fd_delta = 1e-2;
  double newton_tol = 5e-4;
  int max_newton_iters = 12;
  int max_points = 200;
  // rare events
  double p_node = -1.0;  // < 0: locate from the branch
  int psi_points = 41;
  double psi_below = 0.3;   // grid margin beyond the unstable point (gap units)
  double psi_above = 0.25;  // grid margin above the node (gap units)
  int delta_T = 1;
  int escapes = 30;
  long long max_steps = 200000;
  double exit_threshold = -1.0;  // < 0: half the unstable density
  bool direct = false;
  // oracle check
  int oracle_samples = 100000;
  int oracle_realizations = 20000;
  int oracle_n = 0;  // optional extra ring case
  // execution (not recorded in manifests)
  int threads = 0;
  std::string out_dir = ".";
};

inline nlohmann::ordered_json config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["n_neurons"] = c.n_neurons;
  j["degree"] = c.degree;
  j["master_seed"] = c.master_seed;
  j["epsilon"] = c.epsilon;
  j["copies"] = c.copies;
  j["horizon_T"] = c.horizon_T;
  j["dT"] = c.dT;
  j["lift_mode"] = c.lift_mode;
  j["p0_list"] = c.p0_list;
  j["steps"] = c.steps;
  j["p0"] = c.p0;
  j["rho11_targets"] = c.rho11_targets;
  j["portrait_steps"] = c.portrait_steps;
  j["portrait_copies"] = c.portrait_copies;
  j["epsilon_min"] = c.epsilon_min;
  j["epsilon_max"] = c.epsilon_max;
  j["delta_s"] = c.delta_s;
  j["fd_delta"] = c.fd_delta;
  j["newton_tol"] = c.newton_tol;
  j["max_newton_iters"] = c.max_newton_iters;
  j["max_points"] = c.max_points;
  j["p_node"] = c.p_node;
  j["psi_points"] = c.psi_points;
  j["psi_below"] = c.psi_below;
  j["psi_above"] = c.psi_above;
  j["delta_T"] = c.delta_T;
  j["escapes"] = c.escapes;
  j["max_steps"] = c.max_steps;
  j["exit_threshold"] = c.exit_threshold;
  j["direct"] = c.direct;
  j["oracle_samples"] = c.oracle_samples;
  j["oracle_realizations"] = c.oracle_realizations;
  j["oracle_n"] = c.oracle_n;
  return j;
}

inline void config_from_json(const nlohmann::json& j, RunConfig& c) {
  j.at("n_neurons").get_to(c.n_neurons);
  j.at("degree").get_to(c.degree);
  j.at("master_seed").get_to(c.master_seed);
  j.at("epsilon").get_to(c.epsilon);
  j.at("copies").get_to(c.copies);
  j.at("horizon_T").get_to(c.horizon_T);
  j.at("dT").get_to(c.dT);
  j.at("lift_mode").get_to(c.lift_mode);
  j.at("p0_list").get_to(c.p0_list);
  j.at("steps").get_to(c.steps);
  j.at("p0").get_to(c.p0);
  j.at("rho11_targets").get_to(c.rho11_targets);
  j.at("portrait_steps").get_to(c.portrait_steps);
  j.at("portrait_copies").get_to(c.portrait_copies);
  j.at("epsilon_min").get_to(c.epsilon_min);
  j.at("epsilon_max").get_to(c.epsilon_max);
  j.at("delta_s").get_to(c.delta_s);
  j.at("fd_delta").get_to(c.fd_delta);
  j.at("newton_tol").get_to(c.newton_tol);
  j.at("max_newton_iters").get_to(c.max_newton_iters);
  j.at("max_points").get_to(c.max_points);
  j.at("p_node").get_to(c.p_node);
  j.at("psi_points").get_to(c.psi_points);
  j.at("psi_below").get_to(c.psi_below);
  j.at("psi_above").get_to(c.psi_above);
  j.at("delta_T").get_to(c.delta_T);
  j.at("escapes").get_to(c.escapes);
  j.at("max_steps").get_to(c.max_steps);
  j.at("exit_threshold").get_to(c.exit_threshold);
  j.at("direct").get_to(c.direct);
  j.at("oracle_samples").get_to(c.oracle_samples);
  j.at("oracle_realizations").get_to(c.oracle_realizations);
  j.at("oracle_n").get_to(c.oracle_n);
}

// flat "key = value" overrides; lists comma-separated; '#' starts a comment
inline void load_config_file(const std::filesystem::path& path, RunConfig& c) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  nlohmann::json patch = config_to_json(c);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw std::invalid_argument(path.string() + ":" +
                                    std::to_string(lineno) +
                                    ": expected key = value");
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!patch.contains(key))
      throw std::invalid_argument(path.string() + ": unknown key '" + key +
                                  "'");
    if (patch[key].is_string()) {
      patch[key] = value;
    } else if (patch[key].is_array()) {
      std::vector<double> vs;
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) vs.push_back(std::stod(item));
      patch[key] = vs;
    } else if (patch[key].is_boolean()) {
      patch[key] = (value == "true" || value == "1" || value == "yes");
    } else {
      patch[key] = nlohmann::json::parse(value);
    }
  }
  config_from_json(patch, c);
}

inline void write_manifest(const std::filesystem::path& path,
                           const std::string& command, const RunConfig& c) {
  nlohmann::ordered_json j;
  j["tool"] = "neurocoarse";
  j["version"] = std::string(kVersion);
  j["command"] = command;
  j["config"] = config_to_json(c);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("manifest write failed: " + path.string());
}

inline std::string load_manifest(const std::filesystem::path& path,
                                 RunConfig& c) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  nlohmann::json j;
  in >> j;
  if (!j.contains("command") || !j.contains("config"))
    throw std::invalid_argument("not a run manifest: " + path.string());
  config_from_json(j.at("config"), c);
  return j.at("command").get<std::string>();
}

}  // namespace neurocoarse::cli
