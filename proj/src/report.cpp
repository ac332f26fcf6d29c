// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

#include "diffmorph/report.hpp"

#include <sstream>

#include "diffmorph/io.hpp"

namespace diffmorph {
namespace {

void flatten(const nlohmann::json& j, const std::string& prefix, std::ostringstream& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      flatten(value, prefix.empty() ? key : prefix + "." + key, out);
    }
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
    }
  } else if (j.is_number_float()) {
    out << prefix << ',' << format_double(j.get<double>()) << '\n';
  } else if (j.is_string()) {
    out << prefix << ',' << j.get<std::string>() << '\n';
  } else {
    out << prefix << ',' << j.dump() << '\n';
  }
}

}  // namespace

nlohmann::json make_report(const std::string& command, const nlohmann::json& config,
                           const std::vector<std::filesystem::path>& inputs, std::uint64_t seed,
                           nlohmann::json results) {
  nlohmann::json report;
  report["tool"] = {{"name", "diffmorph"}, {"version", DIFFMORPH_VERSION}};
  report["command"] = command;
  report["seed"] = seed;
  report["config"] = config;
  report["config_digest"] = sha256_hex(config.dump());
  nlohmann::json in = nlohmann::json::array();
  for (const auto& p : inputs) {
    in.push_back({{"path", p.generic_string()}, {"sha256", file_sha256(p)}});
  }
  report["inputs"] = in;
  report["conventions"] = {
      {"fid", "squared Frechet (2-Wasserstein) distance between Gaussian fits"},
      {"match", "distance < threshold; ties do not match"},
      {"rsm_log", "natural logarithm"},
      {"calibration", "conservative empirical quantile, no interpolation"},
  };
  report["results"] = std::move(results);
  return report;
}

std::string render_json(const nlohmann::json& report) { return report.dump(2) + "\n"; }

std::string render_csv(const nlohmann::json& report) {
  std::ostringstream out;
  out << "key,value\n";
  out << "command," << report.value("command", "") << '\n';
  out << "seed," << report.value("seed", 0ULL) << '\n';
  out << "config_digest," << report.value("config_digest", "") << '\n';
  flatten(report.at("results"), "", out);
  return out.str();
}

}  // namespace diffmorph
