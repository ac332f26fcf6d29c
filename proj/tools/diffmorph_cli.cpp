// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

// Batch front end: synthetic morph demos, metric evaluation over embedding
// and decision files, threshold calibration, and fixture generation.
//
// Exit codes: 0 success, 2 input/schema error, 3 undefined metric.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "diffmorph/demo.hpp"
#include "diffmorph/errors.hpp"
#include "diffmorph/io.hpp"
#include "diffmorph/metrics.hpp"
#include "diffmorph/report.hpp"
#include "diffmorph/rsm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace diffmorph;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitUndefined = 3;

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Run seed (recorded in every report)");
  app->add_option("--out", c.out, "Output file (default: stdout)");
  app->add_option("--format", c.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}));
}

void emit(const Common& c, const json& report) {
  const std::string text = c.format == "csv" ? render_csv(report) : render_json(report);
  if (c.out.empty()) {
    std::cout << text;
  } else {
    write_file_atomic(c.out, text);
  }
}

std::string label_of(const fs::path& p) { return p.stem().string(); }

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

std::vector<fs::path> as_paths(const std::vector<std::string>& v) {
  return {v.begin(), v.end()};
}

// ---- demo-morph ------------------------------------------------------------

struct DemoArgs {
  Common common;
  std::string variant = "C";
  std::string spacing = "linear";
  double gamma_z = 0.5;
  double gamma_x = 0.5;
  int n_encode = 250;
  int n_decode = 100;
  int dim = 8;
  double s = 1.0;
  double mean_norm = 3.0;
  double separation = 4.0;
  double image_noise = 0.0;
  int pairs = 500;
  int schedule_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  std::string premorph;
  std::string morphs_out;
};

void run_demo(const DemoArgs& a) {
  DemoConfig cfg;
  cfg.morph.variant = parse_variant(a.variant);
  cfg.morph.spacing = a.spacing == "quadratic" ? Spacing::kQuadratic : Spacing::kLinear;
  cfg.morph.gamma_z = a.gamma_z;
  cfg.morph.gamma_x = a.gamma_x;
  cfg.morph.n_encode = a.n_encode;
  cfg.morph.n_decode = a.n_decode;
  cfg.world = {a.s, a.dim};
  cfg.mean_norm = a.mean_norm;
  cfg.separation = a.separation;
  cfg.image_noise = a.image_noise;
  cfg.pairs = a.pairs;
  cfg.seed = a.common.seed;

  const auto sched = make_linear_schedule(a.schedule_steps, a.beta_start, a.beta_end);
  std::vector<fs::path> inputs;
  PremorphTable premorph;
  if (!a.premorph.empty()) {
    premorph = ingest_premorph(a.premorph);
    inputs.emplace_back(a.premorph);
  }
  const auto res = run_demo_morph(cfg, sched, a.premorph.empty() ? nullptr : &premorph);

  std::ostringstream csv;
  csv << "pair";
  for (int i = 0; i < a.dim; ++i) csv << ",f_" << i;
  csv << '\n';
  for (std::size_t k = 0; k < res.pairs.size(); ++k) {
    csv << k;
    for (Eigen::Index i = 0; i < res.pairs[k].morph.size(); ++i) {
      csv << ',' << format_double(res.pairs[k].morph[i]);
    }
    csv << '\n';
  }
  if (!a.morphs_out.empty()) write_file_atomic(a.morphs_out, csv.str());

  const json config = {
      {"variant", std::string(to_string(cfg.morph.variant))},
      {"spacing", a.spacing},
      {"gamma_z", a.gamma_z},
      {"gamma_x", a.gamma_x},
      {"N_encode", a.n_encode},
      {"N_decode", a.n_decode},
      {"dim", a.dim},
      {"s", a.s},
      {"mean_norm", a.mean_norm},
      {"separation", a.separation},
      {"image_noise", a.image_noise},
      {"pairs", a.pairs},
      {"schedule", {{"T", a.schedule_steps}, {"beta_start", a.beta_start}, {"beta_end", a.beta_end}}},
  };
  json results = {
      {"midpoint_fraction", res.midpoint_fraction},
      {"mean_dist_midpoint", res.mean_dist_mid},
      {"mean_dist_nearest_endpoint", res.mean_dist_nearest},
      {"all_finite", res.all_finite},
      {"morphs_sha256", sha256_hex(csv.str())},
  };
  if (!a.morphs_out.empty()) results["morphs_path"] = fs::path(a.morphs_out).generic_string();
  emit(a.common, make_report("demo-morph", config, inputs, a.common.seed, results));
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  Common common;
  std::vector<std::string> embeddings;
  std::vector<std::string> scores;
  std::string decisions;
  std::string impostor;
  double threshold = -1.0;
  double fmr = 0.0;
  std::vector<double> bpcer = {0.001, 0.01, 0.05};
  bool skip_missing = false;
  bool smoothing = false;
};

void run_fid(const EvalArgs& a) {
  if (a.embeddings.empty()) throw InputError("eval fid needs --embeddings");
  json rows = json::array();
  for (const auto& path : a.embeddings) {
    const auto table = ingest_embeddings(path);
    std::vector<Eigen::VectorXd> bona;
    std::vector<Eigen::VectorXd> morph;
    for (const auto& [id, imgs] : table.bona_fide()) {
      for (const auto& img : imgs) bona.push_back(img.features);
    }
    for (const auto& m : table.morphs()) morph.push_back(m.features);
    if (bona.size() < 2 || morph.size() < 2) {
      throw InputError(path + ": FID needs at least 2 bona fide and 2 morph rows");
    }
    const double fid = frechet_distance(fit_gaussian(bona), fit_gaussian(morph));
    rows.push_back({{"attack", label_of(path)},
                    {"fid", fid},
                    {"n_bona_fide", bona.size()},
                    {"n_morph", morph.size()}});
  }
  const json config = {{"embeddings", a.embeddings}};
  emit(a.common, make_report("eval fid", config, as_paths(a.embeddings), a.common.seed,
                             {{"attacks", rows}}));
}

void run_mmpmr(const EvalArgs& a) {
  if (a.embeddings.empty()) throw InputError("eval mmpmr needs --embeddings");
  std::vector<fs::path> inputs = as_paths(a.embeddings);
  double threshold = a.threshold;
  json config = {{"embeddings", a.embeddings}, {"skip_missing", a.skip_missing}};
  if (a.fmr > 0.0) {
    if (a.impostor.empty()) {
      throw InputError("--fmr needs an impostor protocol file (--impostor scores.csv)");
    }
    const auto s = ingest_scores(a.impostor);
    threshold = calibrate_threshold_fmr(s.impostor, a.fmr);
    inputs.emplace_back(a.impostor);
    config["fmr"] = a.fmr;
    config["impostor"] = a.impostor;
  } else if (a.threshold <= 0.0) {
    throw InputError("eval mmpmr needs --threshold > 0 or --fmr with --impostor");
  } else {
    config["threshold"] = a.threshold;
  }
  json rows = json::array();
  for (const auto& path : a.embeddings) {
    const auto table = ingest_embeddings(path);
    const auto r = mmpmr_prodavg_detail(
        table, threshold, a.skip_missing ? MissingReference::kSkip : MissingReference::kError);
    rows.push_back({{"attack", label_of(path)},
                    {"mmpmr", r.value},
                    {"per_morph", r.per_morph},
                    {"skipped", r.skipped}});
  }
  emit(a.common, make_report("eval mmpmr", config, inputs, a.common.seed,
                             {{"threshold", threshold}, {"attacks", rows}}));
}

void run_apcer(const EvalArgs& a) {
  if (a.embeddings.empty() && a.scores.empty()) {
    throw InputError("eval apcer needs --embeddings or --scores");
  }
  std::vector<std::pair<std::string, ScoreSet>> sets;
  for (const auto& path : a.embeddings) sets.emplace_back(label_of(path), compute_scores(ingest_embeddings(path)));
  for (const auto& path : a.scores) sets.emplace_back(label_of(path), ingest_scores(path));

  json config = {{"embeddings", a.embeddings}, {"scores", a.scores}};
  if (a.threshold > 0.0) {
    config["threshold"] = a.threshold;
  } else {
    config["bpcer"] = a.bpcer;
  }
  json rows = json::array();
  for (const auto& [label, s] : sets) {
    if (s.morph.empty()) throw InputError(label + ": no morph scores");
    json points = json::array();
    if (a.threshold > 0.0) {
      points.push_back({{"threshold", a.threshold}, {"apcer", apcer_at(s.morph, a.threshold)}});
    } else {
      if (s.genuine.empty()) throw InputError(label + ": no genuine scores for BPCER calibration");
      for (double target : a.bpcer) {
        const double t = bpcer_threshold(s.genuine, target);
        points.push_back({{"bpcer_target", target},
                          {"threshold", t},
                          {"bpcer", rejection_rate(s.genuine, t)},
                          {"apcer", apcer_at(s.morph, t)}});
      }
    }
    rows.push_back({{"attack", label}, {"points", points}});
  }
  std::vector<fs::path> inputs = as_paths(a.embeddings);
  for (const auto& p : a.scores) inputs.emplace_back(p);
  emit(a.common, make_report("eval apcer", config, inputs, a.common.seed, {{"attacks", rows}}));
}

void run_rsm(const EvalArgs& a) {
  if (a.decisions.empty()) throw InputError("eval rsm needs --decisions");
  const auto records = ingest_decisions(a.decisions);
  const auto m = rsm_matrix(records, {a.smoothing});
  const json config = {{"decisions", a.decisions}, {"laplace_smoothing", a.smoothing}};
  emit(a.common, make_report("eval rsm", config, {fs::path(a.decisions)}, a.common.seed,
                             {{"attacks", m.attacks},
                              {"transferability", matrix_json(m.transfer)},
                              {"rsm", matrix_json(m.delta)}}));
}

// ---- calibrate -------------------------------------------------------------

struct CalibrateArgs {
  Common common;
  std::string scores;
  std::vector<double> targets;
};

void run_calibrate(const CalibrateArgs& a, bool fmr) {
  const auto s = ingest_scores(a.scores);
  std::vector<double> targets = a.targets;
  if (targets.empty()) targets = fmr ? std::vector<double>{0.001} : std::vector<double>{0.001, 0.01, 0.05};
  json points = json::array();
  for (double target : targets) {
    if (fmr) {
      if (s.impostor.empty()) throw InputError(a.scores + ": no impostor scores");
      const double t = calibrate_threshold_fmr(s.impostor, target);
      points.push_back({{"target", target}, {"threshold", t}, {"fmr", match_rate(s.impostor, t)}});
    } else {
      if (s.genuine.empty()) throw InputError(a.scores + ": no genuine scores");
      const double t = bpcer_threshold(s.genuine, target);
      points.push_back({{"target", target}, {"threshold", t}, {"bpcer", rejection_rate(s.genuine, t)}});
    }
  }
  const json config = {{"scores", a.scores}, {"targets", targets}};
  emit(a.common, make_report(fmr ? "calibrate fmr" : "calibrate bpcer", config,
                             {fs::path(a.scores)}, a.common.seed, {{"points", points}}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diffmorph: diffusion-autoencoder morphing and biometric attack evaluation"};
  app.require_subcommand(1);

  DemoArgs demo;
  auto* demo_cmd = app.add_subcommand("demo-morph", "Morph identity pairs in a synthetic Gaussian world");
  add_common(demo_cmd, demo.common);
  demo_cmd->add_option("--variant", demo.variant, "A, B, C or external");
  demo_cmd->add_option("--spacing", demo.spacing)->check(CLI::IsMember({"linear", "quadratic"}));
  demo_cmd->add_option("--gamma-z", demo.gamma_z, "Semantic blend weight of the first input");
  demo_cmd->add_option("--gamma-x", demo.gamma_x, "Stochastic blend weight of the first input");
  demo_cmd->add_option("--n-encode", demo.n_encode, "Stochastic encoder steps");
  demo_cmd->add_option("--n-decode", demo.n_decode, "DDIM sampler steps");
  demo_cmd->add_option("--dim", demo.dim);
  demo_cmd->add_option("--s", demo.s, "Data standard deviation around identity means");
  demo_cmd->add_option("--mean-norm", demo.mean_norm, "Norm of identity means");
  demo_cmd->add_option("--separation", demo.separation, "Distance between paired means, in units of s");
  demo_cmd->add_option("--image-noise", demo.image_noise, "Input noise around the means, in units of s");
  demo_cmd->add_option("--pairs", demo.pairs);
  demo_cmd->add_option("--schedule-steps", demo.schedule_steps);
  demo_cmd->add_option("--beta-start", demo.beta_start);
  demo_cmd->add_option("--beta-end", demo.beta_end);
  demo_cmd->add_option("--premorph", demo.premorph, "Pre-morph CSV for --variant external");
  demo_cmd->add_option("--morphs-out", demo.morphs_out, "Write morph vectors to this CSV");
  demo_cmd->callback([&] { run_demo(demo); });

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate attack metrics");
  eval_cmd->require_subcommand(1);
  auto* fid = eval_cmd->add_subcommand("fid", "Frechet distance of morph vs bona fide features");
  auto* mmpmr = eval_cmd->add_subcommand("mmpmr", "ProdAvg-MMPMR at a threshold or calibrated FMR");
  auto* apcer = eval_cmd->add_subcommand("apcer", "APCER at BPCER operating points");
  auto* rsm_cmd = eval_cmd->add_subcommand("rsm", "Transferability and relative strength matrix");
  for (auto* c : {fid, mmpmr, apcer, rsm_cmd}) add_common(c, eval.common);
  for (auto* c : {fid, mmpmr, apcer}) {
    c->add_option("--embeddings", eval.embeddings, "Embedding CSV, one per attack")->check(CLI::ExistingFile);
  }
  apcer->add_option("--scores", eval.scores, "Score CSV, one per attack")->check(CLI::ExistingFile);
  mmpmr->add_option("--threshold", eval.threshold, "Match threshold gamma");
  mmpmr->add_option("--fmr", eval.fmr, "Calibrate gamma at this false match rate");
  mmpmr->add_option("--impostor", eval.impostor, "Impostor protocol (score CSV)")->check(CLI::ExistingFile);
  mmpmr->add_flag("--skip-missing", eval.skip_missing, "Skip morphs without remaining references");
  apcer->add_option("--bpcer", eval.bpcer, "BPCER targets")->delimiter(',');
  apcer->add_option("--threshold", eval.threshold, "Fixed threshold instead of BPCER targets");
  rsm_cmd->add_option("--decisions", eval.decisions, "Decision CSV")->check(CLI::ExistingFile);
  rsm_cmd->add_flag("--smoothing", eval.smoothing, "Add-one smoothing of detection counts");
  fid->callback([&] { run_fid(eval); });
  mmpmr->callback([&] { run_mmpmr(eval); });
  apcer->callback([&] { run_apcer(eval); });
  rsm_cmd->callback([&] { run_rsm(eval); });

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "Calibrate decision thresholds");
  cal_cmd->require_subcommand(1);
  auto* cal_fmr = cal_cmd->add_subcommand("fmr", "Threshold at a false match rate");
  auto* cal_bpcer = cal_cmd->add_subcommand("bpcer", "Threshold at a bona fide rejection rate");
  for (auto* c : {cal_fmr, cal_bpcer}) {
    add_common(c, cal.common);
    c->add_option("--scores", cal.scores, "Score CSV")->required()->check(CLI::ExistingFile);
    c->add_option("--target", cal.targets, "Target rates")->delimiter(',');
  }
  cal_fmr->callback([&] { run_calibrate(cal, true); });
  cal_bpcer->callback([&] { run_calibrate(cal, false); });

  std::string fixtures_dir;
  std::uint64_t fixtures_seed = 7;
  auto* fx = app.add_subcommand("fixtures", "Desk-scale fixture files");
  fx->require_subcommand(1);
  auto* fx_emit = fx->add_subcommand("emit", "Write the fixture set");
  fx_emit->add_option("--out", fixtures_dir, "Output directory")->required();
  fx_emit->add_option("--seed", fixtures_seed);
  fx_emit->callback([&] {
    for (const auto& p : emit_fixtures(fixtures_dir, fixtures_seed)) {
      std::cout << p.generic_string() << '\n';
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  } catch (const UndefinedMetricError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUndefined;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return 0;
}
