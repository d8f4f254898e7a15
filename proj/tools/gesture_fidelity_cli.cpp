// gesture-fidelity: command-line front end for the evaluation library.
//
// Exit codes: 0 success, 1 data error (or any section errored), 2 usage error.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gesture_fidelity/data_model.hpp"
#include "gesture_fidelity/error.hpp"
#include "gesture_fidelity/prompt_forge.hpp"
#include "gesture_fidelity/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

// String-typed flag storage, converted into a RunConfig after parsing.
struct EvalFlags {
  std::string real;
  std::string synth;
  std::string out;
  std::string format = "json";
  std::uint64_t seed = gf::TsneConfig{}.seed;
  std::vector<std::string> conditions;
  std::vector<double> alphas;
  std::size_t bins = gf::kDefaultAngleBins;
  double confidence_threshold = gf::kDefaultConfidenceThreshold;
  std::string group_average = "on";
  std::string hand = "auto";
  std::string aggregate = "mean";
  double kl_epsilon = gf::kDefaultKlEpsilon;
  unsigned threads = 0;
  gf::TsneConfig tsne;
};

void add_common(CLI::App* app, EvalFlags& f, bool need_synth) {
  app->add_option("--real", f.real, "Real (reference) dataset manifest")->required();
  auto* synth = app->add_option("--synth", f.synth, "Synthetic dataset manifest");
  if (need_synth) synth->required();
  app->add_option("--out", f.out, "Output directory")->required();
  app->add_option("--format", f.format, "Output format")
      ->check(CLI::IsMember({"json", "csv", "markdown", "md"}))
      ->capture_default_str();
  app->add_option("--seed", f.seed, "Random seed (t-SNE initialization)")->capture_default_str();
  app->add_option("--conditions", f.conditions, "Synthetic conditions to include (comma list)");
  app->add_option("--confidence-threshold", f.confidence_threshold,
                  "Drop hand detections below this confidence")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app->add_option("--hand", f.hand, "Hand selection (auto follows manifest and module default)")
      ->check(CLI::IsMember({"auto", "most_confident", "left", "right", "both"}))
      ->capture_default_str();
  app->add_option("--threads", f.threads, "Worker threads (0: $GESTURE_FIDELITY_THREADS or all cores)")
      ->capture_default_str();
}

void add_kinematics(CLI::App* app, EvalFlags& f) {
  app->add_option("--aggregate", f.aggregate, "Per-frame magnitude over landmarks")
      ->check(CLI::IsMember({"mean", "max", "wrist_only"}))
      ->capture_default_str();
}

void add_angles(CLI::App* app, EvalFlags& f) {
  app->add_option("--bins", f.bins, "Histogram bins over [0, 180] degrees")
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000}))
      ->capture_default_str();
  app->add_option("--kl-epsilon", f.kl_epsilon, "Smoothing added to every bin before KL")
      ->capture_default_str();
}

void add_frechet(CLI::App* app, EvalFlags& f) {
  app->add_option("--group-average", f.group_average,
                  "Average synthetic samples of the same prompt before FID/FVD")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
}

void add_alignment(CLI::App* app, EvalFlags& f) {
  app->add_option("--alpha", f.alphas, "GAS weight(s); repeatable (default 0.1 0.2 0.4 0.8)");
}

void add_tsne(CLI::App* app, EvalFlags& f) {
  app->add_option("--perplexity", f.tsne.perplexity)->capture_default_str();
  app->add_option("--iterations", f.tsne.iterations)->capture_default_str();
  app->add_option("--learning-rate", f.tsne.learning_rate)->capture_default_str();
  app->add_option("--early-exaggeration", f.tsne.early_exaggeration)->capture_default_str();
  app->add_option("--exaggeration-iterations", f.tsne.exaggeration_iterations)
      ->capture_default_str();
  app->add_option("--initial-momentum", f.tsne.initial_momentum)->capture_default_str();
  app->add_option("--final-momentum", f.tsne.final_momentum)->capture_default_str();
  app->add_option("--momentum-switch", f.tsne.momentum_switch_iteration)->capture_default_str();
  app->add_option("--perplexity-tolerance", f.tsne.perplexity_tolerance)->capture_default_str();
  app->add_option("--bandwidth-iterations", f.tsne.bandwidth_max_iterations)
      ->capture_default_str();
}

gf::RunConfig to_config(const EvalFlags& f) {
  gf::RunConfig cfg;
  try {
    cfg.real_manifest = f.real;
    cfg.synth_manifest = f.synth.empty() ? f.real : f.synth;
    cfg.output_dir = f.out;
    cfg.format = gf::parse_output_format(f.format);
    for (const auto& c : split_list(f.conditions)) cfg.conditions.push_back(gf::parse_condition(c));
    if (!f.alphas.empty()) cfg.alphas = f.alphas;
    cfg.bins = f.bins;
    cfg.confidence_threshold = f.confidence_threshold;
    cfg.group_average = f.group_average == "on";
    if (f.hand != "auto") cfg.hand = gf::parse_hand_policy(f.hand);
    cfg.aggregation = gf::parse_magnitude_aggregation(f.aggregate);
    cfg.kl_epsilon = f.kl_epsilon;
    cfg.threads = f.threads;
    cfg.tsne = f.tsne;
    cfg.tsne.seed = f.seed;
    cfg.validate();
  } catch (const gf::Error& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

int run_sections(const EvalFlags& flags, std::span<const gf::Section> sections) {
  const gf::RunConfig cfg = to_config(flags);
  gf::EvaluationReport rep = gf::evaluate(cfg, sections);
  const auto files = gf::write_report(rep);
  for (const auto& [section, outcome] : rep.outcomes) {
    std::cout << gf::to_string(section) << ": " << gf::to_string(outcome.status);
    if (!outcome.message.empty()) std::cout << " (" << outcome.message << ")";
    std::cout << "\n";
  }
  for (const auto& note : rep.notes) std::cerr << "note: " << note << "\n";
  std::cout << "wrote " << files.size() << " files to " << cfg.output_dir.string() << "\n";
  return rep.any_error() ? kExitData : kExitOk;
}

int run_validate(const std::vector<std::string>& manifests, double threshold, const std::string& out) {
  nlohmann::json all = nlohmann::json::array();
  std::size_t failures = 0;
  for (const auto& path : manifests) {
    const gf::DatasetManifest m = gf::load_manifest(path);
    gf::LandmarkLoadOptions opts;
    opts.confidence_threshold = threshold;
    const gf::ValidationReport rep = gf::validate_dataset(m, opts);
    failures += rep.failures();
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : rep.entries) {
      entries.push_back({{"video_id", e.video_id}, {"check", e.check}, {"ok", e.ok}, {"message", e.message}});
      if (!e.ok) std::cout << rep.manifest_name << " " << e.video_id << " " << e.check << ": " << e.message << "\n";
    }
    all.push_back({{"manifest", rep.manifest_name}, {"failures", rep.failures()}, {"entries", entries}});
    std::cout << rep.manifest_name << ": " << rep.entries.size() << " checks, " << rep.failures()
              << " failures\n";
  }
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    std::ofstream(std::filesystem::path(out) / "validation.json") << all.dump(2) << "\n";
  }
  return failures == 0 ? kExitOk : kExitData;
}

std::vector<std::string> read_objects(const std::vector<std::string>& raw) {
  std::vector<std::string> objects;
  for (const auto& item : raw) {
    if (!item.empty() && item.front() == '@') {
      std::ifstream in(item.substr(1));
      if (!in) throw gf::Error(gf::ErrorKind::MissingFile, item.substr(1));
      std::string line;
      while (std::getline(in, line)) {
        line.erase(line.find_last_not_of(" \t\r") + 1);
        line.erase(0, line.find_first_not_of(" \t"));
        if (!line.empty() && line.front() != '#') objects.push_back(line);
      }
    } else {
      for (auto& s : split_list({item})) objects.push_back(s);
    }
  }
  return objects;
}

// Looks for "<slug>_start.*" and "<slug>_end.*" in `dir`.
std::map<std::string, gf::FrameRefs> find_frame_refs(const std::filesystem::path& dir,
                                                     const std::vector<std::string>& objects) {
  std::map<std::string, std::string> by_stem;
  if (std::filesystem::is_directory(dir)) {
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.is_regular_file()) by_stem.emplace(entry.path().stem().string(), entry.path().string());
    }
  }
  std::map<std::string, gf::FrameRefs> refs;
  for (const auto& obj : objects) {
    std::string slug = gf::job_slug(gf::Condition::StaticScene, obj);
    slug = slug.substr(slug.find("__") + 2);
    auto start = by_stem.find(slug + "_start");
    auto end = by_stem.find(slug + "_end");
    if (start != by_stem.end() && end != by_stem.end()) refs[obj] = {start->second, end->second};
  }
  return refs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantifies how faithfully a synthetic gesture-video dataset reproduces a real one"};
  app.set_version_flag("--version", std::string(gf::kToolVersion));
  app.require_subcommand(1);

  std::vector<std::string> validate_manifests;
  std::string validate_out;
  double validate_threshold = gf::kDefaultConfidenceThreshold;
  auto* validate = app.add_subcommand("validate", "Check manifests and referenced files");
  validate->add_option("manifests", validate_manifests, "Manifest files")->required();
  validate->add_option("--out", validate_out, "Write validation.json here");
  validate->add_option("--confidence-threshold", validate_threshold)
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  EvalFlags kin_f, ang_f, fre_f, ali_f, div_f, rep_f;
  auto* kin = app.add_subcommand("kinematics", "Velocity, acceleration and jerk statistics");
  add_common(kin, kin_f, false);
  add_kinematics(kin, kin_f);

  auto* ang = app.add_subcommand("angles", "Finger joint angle KL divergence and EMD");
  add_common(ang, ang_f, true);
  add_angles(ang, ang_f);

  auto* fre = app.add_subcommand("frechet", "FID / FVD, hand confidence and CLIP similarity");
  add_common(fre, fre_f, true);
  add_frechet(fre, fre_f);

  auto* ali = app.add_subcommand("alignment", "Per-video VAS / PAS, GAS and iso-GAS lines");
  add_common(ali, ali_f, true);
  add_alignment(ali, ali_f);

  auto* div = app.add_subcommand("diversity", "Pose-embedding t-SNE projection and ellipses");
  add_common(div, div_f, false);
  add_tsne(div, div_f);

  auto* rep = app.add_subcommand("report", "All sections");
  add_common(rep, rep_f, true);
  add_kinematics(rep, rep_f);
  add_angles(rep, rep_f);
  add_frechet(rep, rep_f);
  add_alignment(rep, rep_f);
  add_tsne(rep, rep_f);

  std::vector<std::string> objects_raw;
  std::vector<std::string> prompt_conditions;
  std::string template_path, frames_dir, prompts_out;
  gf::JobOptions job_opts;
  auto* prompts = app.add_subcommand("prompts", "Compose prompts and emit generation jobs");
  prompts->add_option("--objects", objects_raw, "Object names (comma list or @file)")->required();
  prompts->add_option("--conditions", prompt_conditions, "Conditions (default: all synthetic)");
  prompts->add_option("--template", template_path, "Prompt template JSON (default: built-in)");
  prompts->add_option("--frames-dir", frames_dir, "Directory with <object>_start.* / <object>_end.*")
      ->required();
  prompts->add_option("--out", prompts_out, "Output directory")->required();
  prompts->add_option("--samples", job_opts.samples)->check(CLI::PositiveNumber)->capture_default_str();
  prompts->add_option("--duration", job_opts.duration_s)->check(CLI::PositiveNumber)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*validate) return run_validate(validate_manifests, validate_threshold, validate_out);
    if (*kin) return run_sections(kin_f, std::array{gf::Section::Table2});
    if (*ang) return run_sections(ang_f, std::array{gf::Section::Table3});
    if (*fre) return run_sections(fre_f, std::array{gf::Section::Table1});
    if (*ali) return run_sections(ali_f, std::array{gf::Section::Alignment});
    if (*div) return run_sections(div_f, std::array{gf::Section::Diversity});
    if (*rep) return run_sections(rep_f, gf::kAllSections);
    if (*prompts) {
      gf::PromptSpec spec = gf::default_prompt_spec();
      if (!template_path.empty()) {
        std::ifstream in(template_path);
        if (!in) throw gf::Error(gf::ErrorKind::MissingFile, template_path);
        std::stringstream ss;
        ss << in.rdbuf();
        spec = gf::prompt_spec_from_json(ss.str());
      }
      std::vector<gf::Condition> conds;
      try {
        for (const auto& c : split_list(prompt_conditions)) conds.push_back(gf::parse_condition(c));
      } catch (const gf::Error& e) {
        throw UsageError(e.what());
      }
      if (conds.empty()) {
        for (gf::Condition c : gf::kAllConditions) {
          if (c != gf::Condition::Reference) conds.push_back(c);
        }
      }
      const auto objects = read_objects(objects_raw);
      const auto refs = find_frame_refs(frames_dir, objects);
      const auto jobs = gf::emit_generation_jobs(spec, objects, conds, refs, job_opts);
      std::filesystem::create_directories(prompts_out);
      std::ofstream(std::filesystem::path(prompts_out) / "jobs.json") << gf::jobs_to_json(jobs);
      std::cout << "jobs: " << jobs.size() << ", expected videos: " << gf::expected_video_count(jobs)
                << "\n";
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const gf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
