// Command-line front end: simulate | classify | report.

#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pgmm/analysis_checks.hpp"
#include "pgmm/pipeline.hpp"
#include "pgmm/stack_io.hpp"

namespace fs = std::filesystem;
using namespace pgmm;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

struct GlobalOptions {
  std::string config;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 0;
  bool no_translation = false;
  bool no_center = false;
  bool freeze_align = false;
  bool trace = false;
  bool analysis = false;
};

std::pair<std::string, std::string> split_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos) throw UsageError("--set expects KEY=VALUE, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

template <typename Setter>
void apply_config(const GlobalOptions& g, Setter set) {
  if (!g.config.empty())
    for (const auto& [k, v] : read_config_file(g.config)) set(k, v);
  for (const auto& s : g.sets) {
    const auto [k, v] = split_assignment(s);
    set(k, v);
  }
}

std::vector<Pose> poses_of(const std::vector<GroundTruth>& rows) {
  std::vector<Pose> out;
  for (const auto& r : rows) out.push_back({r.alpha, r.t});
  return out;
}

std::vector<int> labels_of(const std::vector<GroundTruth>& rows) {
  std::vector<int> out;
  for (const auto& r : rows) out.push_back(r.label);
  return out;
}

void check_rows(std::size_t got, std::size_t want, const std::string& what, const std::string& ref) {
  if (got != want)
    throw Error(what + " has " + std::to_string(got) + " rows but " + ref + " has " + std::to_string(want));
}

int run_simulate(const GlobalOptions& g, DatasetSpec spec, const std::string& stack_path,
                 const std::string& truth_path) {
  apply_config(g, [&](const std::string& k, const std::string& v) { set_dataset_key(spec, k, v); });
  if (g.seed_given) spec.seed = g.seed;
  const Dataset ds = render_dataset(spec);
  write_stack(ds.images, stack_path);
  write_ground_truth(ds.truth, truth_path);
  std::cout << "N_IMAGES\t" << ds.images.size() << '\n'
            << "L\t" << spec.L << '\n'
            << "N_CLUSTERS\t" << spec.n_clusters << '\n'
            << "TEMPLATE\t" << to_string(spec.template_kind) << '\n'
            << format_metric("SNR", spec.snr) << '\n'
            << format_metric("NOISE_VAR", spec.noise_variance()) << '\n'
            << format_metric("MAX_SHIFT", spec.max_shift) << '\n';
  return 0;
}

int run_classify(const GlobalOptions& g, const std::string& stack_path, const std::string& truth_path,
                 const std::string& out_dir) {
  PipelineConfig cfg;
  apply_config(g, [&](const std::string& k, const std::string& v) { cfg.set(k, v); });
  if (g.seed_given) cfg.seed = g.seed;
  if (g.no_translation) cfg.enable_translation = false;
  if (g.no_center) cfg.no_center = true;
  if (g.freeze_align) cfg.freeze_align = true;
  cfg.validate();

  const ImageStack images = read_stack(stack_path);
  std::vector<GroundTruth> truth;
  if (!truth_path.empty()) {
    truth = read_ground_truth(truth_path);
    check_rows(truth.size(), images.size(), truth_path, stack_path);
  }
  const RunResult res = classify(images, cfg, g.trace ? &std::cerr : nullptr);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_labels(res.labels, (dir / "labels.csv").string());
  std::vector<GroundTruth> poses(images.size());
  for (std::size_t i = 0; i < poses.size(); ++i) poses[i] = {res.labels[i], res.poses[i].alpha, res.poses[i].t};
  write_ground_truth(poses, (dir / "poses.csv").string());
  write_stack(res.averages, (dir / "averages.stk").string());
  for (std::size_t c = 0; c < res.averages.size(); ++c) {
    char name[32];
    std::snprintf(name, sizeof name, "average_%03zu.pgm", c);
    write_pgm(res.averages[c], (dir / name).string());
  }
  save_model(res.model, (dir / "model.fbspca").string());
  save_mixture(res.theta, (dir / "mixture.pgmmth").string());

  std::ostringstream report;
  if (!truth.empty()) {
    const MetricReport r = evaluate(labels_of(truth), res.labels, poses_of(truth), res.poses,
                                    cfg.enable_translation);
    write_report(report, r);
  }
  if (g.analysis) {
    const BasisGrid basis = build_basis(res.model.spec, build_index_set(res.model.spec), false);
    const auto gram = gram_check_all(basis);
    write_gram_reports(report, gram);
  }
  if (!report.str().empty()) {
    std::ofstream os(dir / "report.txt", std::ios::binary);
    os << report.str();
    if (!os) throw Error("write failed: " + (dir / "report.txt").string());
    std::cout << report.str();
  }
  return 0;
}

int run_report(const GlobalOptions& g, const std::string& truth_path, const std::string& labels_path,
               const std::string& poses_path, const std::string& out_path) {
  const auto truth = read_ground_truth(truth_path);
  const auto labels = read_labels(labels_path);
  const auto poses = read_ground_truth(poses_path);
  check_rows(labels.size(), truth.size(), labels_path, truth_path);
  check_rows(poses.size(), truth.size(), poses_path, truth_path);
  const MetricReport r =
      evaluate(labels_of(truth), labels, poses_of(truth), poses_of(poses), !g.no_translation);
  std::ostringstream report;
  write_report(report, r);
  std::cout << report.str();
  if (!out_path.empty()) {
    std::ofstream os(out_path, std::ios::binary);
    os << report.str();
    if (!os) throw Error("write failed: " + out_path);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polar Gaussian mixture 2D classification of noisy projection images"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config, "key=value configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", g.sets, "override one config key (KEY=VALUE), repeatable");
  auto* seed_opt = app.add_option("--seed", g.seed, "random seed");
  app.add_option("--threads", g.threads, "worker thread cap (1 = serial)")->check(CLI::PositiveNumber);
  app.add_flag("--no-translation", g.no_translation, "disable translation search");
  app.add_flag("--no-center", g.no_center, "skip EM centering");
  app.add_flag("--freeze-align", g.freeze_align, "keep identity poses (diagnostic)");
  app.add_flag("--trace", g.trace, "per-iteration batch log-likelihood on stderr");
  app.add_flag("--analysis", g.analysis, "append basis Gram checks to the report");

  DatasetSpec spec;
  std::string sim_stack, sim_truth;
  auto* sim = app.add_subcommand("simulate", "render a labeled synthetic dataset");
  sim->add_option("--stack", sim_stack, "output image stack")->required();
  sim->add_option("--truth", sim_truth, "output ground-truth CSV")->required();

  std::string cls_stack, cls_truth, cls_out;
  auto* cls = app.add_subcommand("classify", "cluster and align an image stack");
  cls->add_option("--stack", cls_stack, "input image stack")->required()->check(CLI::ExistingFile);
  cls->add_option("--truth", cls_truth, "ground-truth CSV for scoring")->check(CLI::ExistingFile);
  cls->add_option("--out", cls_out, "output directory")->required();

  std::string rep_truth, rep_labels, rep_poses, rep_out;
  auto* rep = app.add_subcommand("report", "score labels and poses against ground truth");
  rep->add_option("--truth", rep_truth, "ground-truth CSV")->required();
  rep->add_option("--labels", rep_labels, "labels CSV")->required();
  rep->add_option("--poses", rep_poses, "poses CSV")->required();
  rep->add_option("--out", rep_out, "also write the report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }
  g.seed_given = seed_opt->count() > 0;
  if (g.threads > 0) omp_set_num_threads(g.threads);

  try {
    if (sim->parsed()) return run_simulate(g, spec, sim_stack, sim_truth);
    if (cls->parsed()) return run_classify(g, cls_stack, cls_truth, cls_out);
    return run_report(g, rep_truth, rep_labels, rep_poses, rep_out);
  } catch (const UsageError& e) {
    std::cerr << "pgmm: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "pgmm: " << e.what() << '\n';
    return kExitData;
  }
}
