#include "tecromac/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "tecromac/config.hpp"
#include "tecromac/io.hpp"

namespace tecromac {

namespace fs = std::filesystem;

namespace {

// Flag values collected from the command line; applied on top of --config.
struct Overrides {
  std::optional<double> gamma;
  std::optional<long long> k;
  std::optional<std::string> method;
  std::optional<std::string> algorithm;
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  std::optional<long long> rank;
  std::optional<long long> seed;
  std::optional<double> coverage;
  std::optional<std::string> full_cover;
  std::string config;
};

void apply_overrides(RunSettings &s, const Overrides &o) {
  if (!o.config.empty()) apply_settings(s, load_key_values(o.config));
  auto set = [&](const char *key, const auto &value) {
    if (!value) return;
    std::ostringstream text;
    text << std::setprecision(17) << *value;
    apply_setting(s, key, text.str());
  };
  set("gamma", o.gamma);
  set("k", o.k);
  set("method", o.method);
  set("algorithm", o.algorithm);
  set("lambda1", o.lambda1);
  set("lambda2", o.lambda2);
  set("rank", o.rank);
  set("seed", o.seed);
  set("coverage", o.coverage);
  set("full_cover_frames", o.full_cover);
}

// Bad parameter values are usage errors, not runtime failures.
void check_settings(const RunSettings &s, const Dims &d, bool solve) {
  try {
    s.detector.validate(d.t);
    if (solve) s.solver.validate(d.pixels(), d.columns());
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what());
  }
}

bool is_raw_path(const fs::path &p) { return p.extension() == ".tcrm"; }

void write_sequence(const ImageSequence &seq, const fs::path &path, int bit_depth) {
  if (is_raw_path(path)) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    save_raw(seq, path);
    return;
  }
  FrameDirSpec spec;
  spec.path = path;
  spec.channels = static_cast<int>(seq.dims().c);
  spec.bit_depth = bit_depth;
  save_frames(seq, spec);
}

void configure_threads() {
  if (const char *env = std::getenv("TECROMAC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) Eigen::setNbThreads(n);
  }
}

void add_detector_flags(CLI::App *cmd, Overrides &o) {
  cmd->add_option("--gamma", o.gamma, "Dark-channel threshold (default 0.6)");
  cmd->add_option("--k", o.k, "Neighbours kept per always-white pixel (default ceil(0.1 t))");
}

void add_solver_flags(CLI::App *cmd, Overrides &o) {
  cmd->add_option("--method", o.method, "tecromac | tecmac | mc | rmc | interp")
      ->check(CLI::IsMember({"tecromac", "tecmac", "mc", "rmc", "interp"}));
  cmd->add_option("--algorithm", o.algorithm, "ipg | alt")->check(CLI::IsMember({"ipg", "alt"}));
  cmd->add_option("--lambda1", o.lambda1, "Nuclear-norm weight (default 20)");
  cmd->add_option("--lambda2", o.lambda2, "Temporal smoothness weight (default 0.5)");
  cmd->add_option("--rank", o.rank, "Factor rank for the alt algorithm (default 20)");
}

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

}  // namespace

int cli_main(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Cloud removal and scene reconstruction for temporal image sequences"};
  app.require_subcommand(1);
  configure_threads();

  Overrides o;
  std::string input, output, mask_dir, truth, truth_mask, estimate, trace_path;
  int bit_depth = 8;

  auto *detect = app.add_subcommand("detect", "Cloud mask from a cloudy sequence");
  detect->add_option("--input", input, "Frame directory or .tcrm file")->required();
  detect->add_option("--output", output, "Mask directory")->required();
  detect->add_option("--config", o.config, "key=value settings file");
  add_detector_flags(detect, o);

  auto *recon = app.add_subcommand("reconstruct", "Reconstruct a sequence from observations and a mask");
  recon->add_option("--input", input, "Frame directory or .tcrm file")->required();
  recon->add_option("--mask", mask_dir, "Mask directory")->required();
  recon->add_option("--output", output, "Output frame directory or .tcrm file")->required();
  recon->add_option("--seed", o.seed, "Seed");
  recon->add_option("--config", o.config, "key=value settings file");
  recon->add_option("--trace", trace_path, "Write the per-iteration solver trace here");
  recon->add_option("--bit-depth", bit_depth, "8 or 16")->check(CLI::IsMember({8, 16}));
  add_solver_flags(recon, o);

  auto *simulate = app.add_subcommand("simulate", "Composite synthetic clouds over a clean sequence");
  simulate->add_option("--input", input, "Clean frame directory or .tcrm file")->required();
  simulate->add_option("--output", output, "Cloudy output frame directory or .tcrm file")->required();
  simulate->add_option("--truth-mask", truth_mask, "Ground-truth mask directory")->required();
  simulate->add_option("--coverage", o.coverage, "Target cloud coverage per frame (default 0.4)");
  simulate->add_option("--full-cover", o.full_cover, "Comma-separated fully covered frames");
  simulate->add_option("--seed", o.seed, "Seed");
  simulate->add_option("--config", o.config, "key=value settings file");
  simulate->add_option("--bit-depth", bit_depth, "8 or 16")->check(CLI::IsMember({8, 16}));

  auto *evaluate = app.add_subcommand("evaluate", "Relative reconstruction error between two sequences");
  evaluate->add_option("--estimate", estimate, "Reconstructed sequence")->required();
  evaluate->add_option("--truth", truth, "Reference sequence")->required();

  auto *pipeline = app.add_subcommand("pipeline", "detect + reconstruct (+ evaluate)");
  pipeline->add_option("--input", input, "Cloudy frame directory or .tcrm file")->required();
  pipeline->add_option("--output", output, "Output directory")->required();
  pipeline->add_option("--truth", truth, "Clean reference sequence for evaluation");
  pipeline->add_option("--truth-mask", truth_mask, "Reference mask for detection scores");
  pipeline->add_option("--seed", o.seed, "Seed");
  pipeline->add_option("--config", o.config, "key=value settings file");
  pipeline->add_option("--bit-depth", bit_depth, "8 or 16")->check(CLI::IsMember({8, 16}));
  add_detector_flags(pipeline, o);
  add_solver_flags(pipeline, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError &e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    RunSettings s;
    apply_overrides(s, o);

    if (*detect) {
      const ImageSequence seq = load_sequence(input);
      check_settings(s, seq.dims(), false);
      const DetectionReport report = detect_clouds(seq, s.detector);
      save_mask(report.mask, output);
      out << "observed\t" << report.mask.count() << "\nalways_white\t" << report.always_white.size()
          << "\nrescued\t" << report.rescued << '\n';
    } else if (*recon) {
      const ImageSequence seq = load_sequence(input);
      const ObservationMask mask = load_mask(mask_dir, seq.dims());
      check_settings(s, seq.dims(), s.method != Method::interp);
      const Problem problem = Problem::from(reshape_to_matrix(seq), mask);
      Solution sol = reconstruct(problem, s.method, s.solver);
      write_sequence(reshape_to_sequence(DataMatrix(std::move(sol.x), seq.dims())), output, bit_depth);
      if (!trace_path.empty()) {
        std::ofstream trace(trace_path);
        if (!trace) throw IoError("cannot write " + trace_path);
        write_trace(trace, sol.diagnostics.trace);
      }
      out << "method\t" << to_string(s.method) << "\niterations\t" << sol.diagnostics.iterations << "\nresidual\t"
          << format_double(sol.diagnostics.residual) << "\nconverged\t" << sol.diagnostics.converged << '\n';
    } else if (*simulate) {
      const ImageSequence clean = load_sequence(input);
      const Dims &d = clean.dims();
      const ScalarField alpha = generate_cloud_alpha(d.m, d.n, d.t, s.sim);
      const CloudyScene scene = composite_clouds(clean, alpha, s.sim);
      write_sequence(scene.cloudy, output, bit_depth);
      save_mask(scene.truth, truth_mask);
      out << "observed\t" << scene.truth.count() << '\n';
    } else if (*evaluate) {
      const ImageSequence a = load_sequence(estimate);
      const ImageSequence b = load_sequence(truth);
      out << "rre\t" << format_double(rre(a, b)) << '\n';
    } else if (*pipeline) {
      const ImageSequence seq = load_sequence(input);
      check_settings(s, seq.dims(), s.method != Method::interp);
      const DetectionReport detection = detect_clouds(seq, s.detector);
      const fs::path root(output);
      save_mask(detection.mask, root / "mask");
      const Problem problem = Problem::from(reshape_to_matrix(seq), detection.mask);
      Solution sol = reconstruct(problem, s.method, s.solver);
      const ImageSequence result = reshape_to_sequence(DataMatrix(std::move(sol.x), seq.dims()));
      write_sequence(result, root / "reconstruction", bit_depth);

      KeyValues report;
      report["method"] = to_string(s.method);
      report["algorithm"] = to_string(s.solver.algorithm);
      report["gamma"] = format_double(s.detector.gamma);
      report["k_neighbors"] = std::to_string(s.detector.resolved_k(seq.dims().t));
      report["lambda1"] = format_double(s.solver.lambda1);
      report["lambda2"] = format_double(s.solver.lambda2);
      report["seed"] = std::to_string(s.solver.seed);
      report["detection.observed"] = std::to_string(detection.mask.count());
      report["detection.rescued"] = std::to_string(detection.rescued);
      report["solver.iterations"] = std::to_string(sol.diagnostics.iterations);
      report["solver.residual"] = format_double(sol.diagnostics.residual);
      report["solver.objective"] = format_double(sol.diagnostics.objective);
      report["solver.converged"] = sol.diagnostics.converged ? "true" : "false";
      if (!truth.empty()) report["rre"] = format_double(rre(result, load_sequence(truth)));
      if (!truth_mask.empty()) {
        const DetectionScore score = score_detection(detection.mask, load_mask(truth_mask, seq.dims()));
        report["detection.precision"] = format_double(score.precision);
        report["detection.recall"] = format_double(score.recall);
      }
      std::ofstream kv(root / "report.txt");
      std::ofstream table(root / "report.tsv");
      if (!kv || !table) throw IoError("cannot write reports under " + root.string());
      for (const auto &[key, value] : report) {
        kv << key << '=' << value << '\n';
        table << key << '\t' << value << '\n';
        out << key << '\t' << value << '\n';
      }
    }
  } catch (const DivergenceError &e) {
    err << "error: solver diverged: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const ConfigError &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError &e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DimensionError &e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int cli_main(int argc, const char *const *argv) { return cli_main(argc, argv, std::cout, std::cerr); }

}  // namespace tecromac
