#include "gesture_fidelity/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <future>
#include <set>
#include <sstream>
#include <thread>
#include <variant>

#include "json.hpp"

namespace gf {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(OutputFormat f) noexcept {
  switch (f) {
    case OutputFormat::Json: return "json";
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Markdown: return "markdown";
  }
  return "json";
}

std::string_view file_extension(OutputFormat f) noexcept {
  switch (f) {
    case OutputFormat::Json: return ".json";
    case OutputFormat::Csv: return ".csv";
    case OutputFormat::Markdown: return ".md";
  }
  return ".json";
}

OutputFormat parse_output_format(std::string_view s) {
  if (s == "json") return OutputFormat::Json;
  if (s == "csv") return OutputFormat::Csv;
  if (s == "markdown" || s == "md") return OutputFormat::Markdown;
  throw Error(ErrorKind::InvalidArgument, "unknown format '" + std::string(s) + "'");
}

std::string_view to_string(SectionStatus s) noexcept {
  switch (s) {
    case SectionStatus::Ok: return "ok";
    case SectionStatus::Skipped: return "skipped";
    case SectionStatus::Error: return "error";
  }
  return "error";
}

std::string_view to_string(Section s) noexcept {
  switch (s) {
    case Section::Table1: return "table1";
    case Section::Table2: return "table2";
    case Section::Table3: return "table3";
    case Section::Alignment: return "alignment";
    case Section::Diversity: return "diversity";
  }
  return "table1";
}

void RunConfig::validate() const {
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "alpha outside [0,1]: " + std::to_string(a));
    }
  }
  if (bins < 2) throw Error(ErrorKind::InvalidArgument, "bins must be >= 2");
  if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "confidence threshold outside [0,1]");
  }
  if (!(kl_epsilon > 0.0)) throw Error(ErrorKind::InvalidArgument, "kl epsilon must be > 0");
}

bool EvaluationReport::any_error() const {
  return std::any_of(outcomes.begin(), outcomes.end(),
                     [](const auto& kv) { return kv.second.status == SectionStatus::Error; });
}

unsigned resolve_thread_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv(std::string(kThreadsEnvVar).c_str())) {
    unsigned v = 0;
    const char* end = env + std::char_traits<char>::length(env);
    auto [ptr, ec] = std::from_chars(env, end, v);
    if (ec == std::errc() && ptr == end && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

LoadedDataset load_dataset(const fs::path& manifest_path, double confidence_threshold) {
  LoadedDataset ds;
  ds.manifest = load_manifest(manifest_path);
  for (const auto& v : ds.manifest.videos) {
    auto it = ds.manifest.landmark_paths.find(v.video_id);
    if (it == ds.manifest.landmark_paths.end()) {
      ds.warnings.push_back(v.video_id + ": no landmark file");
      continue;
    }
    LandmarkLoadOptions opts;
    opts.confidence_threshold = confidence_threshold;
    opts.video_id = v.video_id;
    if (v.fps) opts.fps = *v.fps;
    try {
      ds.tracks.emplace(v.video_id, load_landmarks(ds.manifest.resolve(it->second), opts));
    } catch (const Error& e) {
      ds.warnings.push_back(v.video_id + ": " + e.what());
    }
  }
  return ds;
}

namespace {

// ---------------------------------------------------------------------------
// Evaluation context

struct EmbeddingStore {
  std::map<std::pair<std::string, EmbeddingKind>, EmbeddingMatrix> by_video;
  std::map<std::string, EmbeddingMatrix> text;  // by prompt_id

  const EmbeddingMatrix* find(const std::string& id, EmbeddingKind kind) const {
    auto it = by_video.find({id, kind});
    return it == by_video.end() ? nullptr : &it->second;
  }
};

EmbeddingStore load_embedding_store(const DatasetManifest& m, std::vector<std::string>& warnings) {
  EmbeddingStore store;
  for (const auto& [id, kinds] : m.embedding_paths) {
    for (const auto& [kind, rel] : kinds) {
      try {
        auto e = load_embeddings(m.resolve(rel), kind);
        if (e.kind != kind) {
          warnings.push_back(id + ": embedding file declares kind " + std::string(to_string(e.kind)));
          continue;
        }
        store.by_video.emplace(std::make_pair(id, kind), std::move(e));
      } catch (const Error& err) {
        warnings.push_back(id + ": " + err.what());
      }
    }
  }
  for (const auto& [pid, rel] : m.text_embedding_paths) {
    try {
      store.text.emplace(pid, load_embeddings(m.resolve(rel), EmbeddingKind::Text));
    } catch (const Error& err) {
      warnings.push_back("text " + pid + ": " + err.what());
    }
  }
  return store;
}

struct Context {
  RunConfig cfg;
  LoadedDataset real;
  LoadedDataset synth;
  EmbeddingStore real_emb;
  EmbeddingStore synth_emb;
  std::vector<const VideoMeta*> real_videos;   // sorted by id
  std::vector<const VideoMeta*> synth_videos;  // filtered, sorted by id
};

std::vector<const VideoMeta*> sorted_videos(const DatasetManifest& m,
                                            const std::vector<Condition>& filter) {
  std::vector<const VideoMeta*> out;
  for (const auto& v : m.videos) {
    if (filter.empty() || std::find(filter.begin(), filter.end(), v.condition) != filter.end()) {
      out.push_back(&v);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const auto* a, const auto* b) { return a->video_id < b->video_id; });
  return out;
}

std::map<Condition, std::vector<const VideoMeta*>> by_condition(
    const std::vector<const VideoMeta*>& videos) {
  std::map<Condition, std::vector<const VideoMeta*>> out;
  for (const auto* v : videos) out[v->condition].push_back(v);
  return out;
}

std::vector<LandmarkTrack> tracks_of(const LoadedDataset& ds,
                                     const std::vector<const VideoMeta*>& videos) {
  std::vector<LandmarkTrack> out;
  for (const auto* v : videos) {
    auto it = ds.tracks.find(v->video_id);
    if (it != ds.tracks.end()) out.push_back(it->second);
  }
  return out;
}

HandPolicy policy_for(const RunConfig& cfg, const DatasetManifest& m, HandPolicy module_default) {
  if (cfg.hand) return *cfg.hand;
  return effective_policy(m, module_default);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Stacks the embeddings of `videos` into one population. With `group`,
// synthetic samples sharing a prompt are averaged (per frame position for
// frame embeddings). Returns nullopt and fills `missing` when any video lacks
// the embedding.
std::optional<EmbeddingMatrix> population(const std::vector<const VideoMeta*>& videos,
                                          const EmbeddingStore& store, EmbeddingKind kind,
                                          bool group, std::vector<std::string>& missing) {
  EmbeddingMatrix all;
  all.kind = kind;
  std::map<std::string, std::string> groups;
  for (const auto* v : videos) {
    const EmbeddingMatrix* e = store.find(v->video_id, kind);
    if (!e) {
      missing.push_back(v->video_id);
      continue;
    }
    if (all.dim == 0) all.dim = e->dim;
    if (e->dim != all.dim) {
      throw Error(ErrorKind::DimensionMismatch, v->video_id + ": " + std::to_string(e->dim) +
                                                    " vs " + std::to_string(all.dim));
    }
    const bool grouped = group && v->source == Source::Synthetic && v->prompt_id.has_value();
    for (std::size_t r = 0; r < e->rows(); ++r) {
      const std::string row_id = v->video_id + "/" + e->ids[r];
      std::string key = row_id;
      if (grouped) {
        if (kind == EmbeddingKind::Video) {
          key = "prompt:" + *v->prompt_id;
        } else {
          const auto hash = e->ids[r].rfind('#');
          const std::string frame =
              hash == std::string::npos ? std::to_string(r) : e->ids[r].substr(hash + 1);
          key = "prompt:" + *v->prompt_id + "#" + frame;
        }
      }
      all.ids.push_back(row_id);
      groups.emplace(row_id, key);
      auto row = e->row(r);
      all.values.insert(all.values.end(), row.begin(), row.end());
    }
  }
  if (!missing.empty()) return std::nullopt;
  if (all.rows() == 0) throw Error(ErrorKind::EmptyFrames, "no embedding rows");
  return group ? group_average(all, groups) : all;
}

// ---------------------------------------------------------------------------
// Alignment helpers shared by table1 and the alignment section.

struct ReferenceFrames {
  std::map<std::string, Eigen::VectorXd> per_video;  // real frame means
  std::optional<Eigen::VectorXd> centroid;           // over all real frame rows
};

ReferenceFrames reference_frames(const Context& ctx) {
  ReferenceFrames ref;
  Eigen::VectorXd sum;
  std::size_t rows = 0;
  for (const auto* v : ctx.real_videos) {
    const EmbeddingMatrix* e = ctx.real_emb.find(v->video_id, EmbeddingKind::FrameImage);
    if (!e || e->rows() == 0) continue;
    ref.per_video.emplace(v->video_id, centroid(*e));
    if (rows == 0) sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(e->dim));
    if (static_cast<std::size_t>(sum.size()) != e->dim) {
      throw Error(ErrorKind::DimensionMismatch, "real frame embeddings differ in dimension");
    }
    for (std::size_t r = 0; r < e->rows(); ++r) {
      auto row = e->row(r);
      for (std::size_t k = 0; k < e->dim; ++k) sum[static_cast<Eigen::Index>(k)] += row[k];
    }
    rows += e->rows();
  }
  if (rows > 0) ref.centroid = sum / static_cast<double>(rows);
  return ref;
}

// Reference for VAS: the manifest's reference video, else the same id in the
// real set, else the real centroid.
std::optional<std::pair<Eigen::VectorXd, std::string>> pick_reference(const VideoMeta& v,
                                                                      const ReferenceFrames& ref) {
  if (v.reference_video_id) {
    auto it = ref.per_video.find(*v.reference_video_id);
    if (it != ref.per_video.end()) return std::make_pair(it->second, "video:" + it->first);
  } else if (auto it = ref.per_video.find(v.video_id); it != ref.per_video.end()) {
    return std::make_pair(it->second, "video:" + it->first);
  }
  if (ref.centroid) return std::make_pair(*ref.centroid, std::string("centroid"));
  return std::nullopt;
}

double visual_alignment(const EmbeddingMatrix& frames, const Eigen::VectorXd& reference) {
  if (static_cast<std::size_t>(reference.size()) != frames.dim) {
    throw Error(ErrorKind::DimensionMismatch, "frame vs reference dimension");
  }
  const Eigen::VectorXd m = centroid(frames);
  return cosine_similarity({m.data(), frames.dim}, {reference.data(), frames.dim});
}

// ---------------------------------------------------------------------------
// Sections

using Notes = std::vector<std::string>;

SectionOutcome section_table1(const Context& ctx, EvaluationReport& rep, Notes& notes) {
  const auto& cfg = ctx.cfg;
  bool errored = false;
  std::vector<std::string> errors;

  Table1Row ref_row;
  ref_row.source = Source::Real;
  ref_row.condition = Condition::Reference;
  ref_row.videos = ctx.real_videos.size();
  {
    auto tracks = tracks_of(ctx.real, ctx.real_videos);
    try {
      ref_row.hand_confidence = mean_hand_confidence(tracks);
    } catch (const Error& e) {
      ref_row.notes.push_back(std::string("hand confidence: ") + e.what());
    }
  }
  rep.table1.push_back(ref_row);

  std::vector<std::string> missing_real_frames, missing_real_video;
  std::optional<GaussianSummary> real_frames, real_video;
  try {
    if (auto pop = population(ctx.real_videos, ctx.real_emb, EmbeddingKind::FrameImage, false,
                              missing_real_frames)) {
      real_frames = gaussian_summary(*pop);
    }
  } catch (const Error& e) {
    errored = true;
    errors.push_back(std::string("real frame statistics: ") + e.what());
  }
  try {
    if (auto pop = population(ctx.real_videos, ctx.real_emb, EmbeddingKind::Video, false,
                              missing_real_video)) {
      real_video = gaussian_summary(*pop);
    }
  } catch (const Error& e) {
    errored = true;
    errors.push_back(std::string("real video statistics: ") + e.what());
  }
  const ReferenceFrames refs = reference_frames(ctx);

  bool fid_missing = false, fvd_missing = false;
  for (const auto& [condition, videos] : by_condition(ctx.synth_videos)) {
    Table1Row row;
    row.source = Source::Synthetic;
    row.condition = condition;
    row.videos = videos.size();

    auto tracks = tracks_of(ctx.synth, videos);
    try {
      row.hand_confidence = mean_hand_confidence(tracks);
    } catch (const Error& e) {
      row.notes.push_back(std::string("hand confidence: ") + e.what());
    }

    auto frechet_cell = [&](EmbeddingKind kind, const std::optional<GaussianSummary>& real,
                            const std::vector<std::string>& missing_real, bool& missing_flag,
                            const char* label) -> std::optional<double> {
      if (!real) {
        missing_flag = true;
        row.notes.push_back(std::string(label) + ": skipped: missing inputs (real " +
                            join(missing_real, ",") + ")");
        return std::nullopt;
      }
      try {
        std::vector<std::string> missing;
        auto pop = population(videos, ctx.synth_emb, kind, cfg.group_average, missing);
        if (!pop) {
          missing_flag = true;
          row.notes.push_back(std::string(label) + ": skipped: missing inputs (" +
                              join(missing, ",") + ")");
          return std::nullopt;
        }
        return frechet_distance(*real, gaussian_summary(*pop));
      } catch (const Error& e) {
        errored = true;
        errors.push_back(std::string(display_name(condition)) + " " + label + ": " + e.what());
        row.notes.push_back(std::string(label) + ": " + e.what());
        return std::nullopt;
      }
    };
    row.fid = frechet_cell(EmbeddingKind::FrameImage, real_frames, missing_real_frames,
                           fid_missing, "FID");
    row.fvd = frechet_cell(EmbeddingKind::Video, real_video, missing_real_video, fvd_missing,
                           "FVD");

    double vas_sum = 0.0;
    std::size_t vas_n = 0;
    for (const auto* v : videos) {
      const EmbeddingMatrix* frames = ctx.synth_emb.find(v->video_id, EmbeddingKind::FrameImage);
      if (!frames) continue;
      auto ref = pick_reference(*v, refs);
      if (!ref) continue;
      try {
        vas_sum += visual_alignment(*frames, ref->first);
        ++vas_n;
      } catch (const Error& e) {
        row.notes.push_back("CLIP similarity " + v->video_id + ": " + e.what());
      }
    }
    if (vas_n > 0) {
      row.clip_similarity = vas_sum / static_cast<double>(vas_n);
    } else {
      row.notes.push_back("CLIP similarity: skipped: missing inputs");
    }
    rep.table1.push_back(std::move(row));
  }

  if (errored) return {SectionStatus::Error, join(errors, "; ")};
  if (ctx.synth_videos.empty()) return {SectionStatus::Skipped, "skipped: no synthetic videos"};
  (void)notes;
  if (fid_missing || fvd_missing) {
    return {SectionStatus::Ok, std::string("partial: ") + (fid_missing ? "FID " : "") +
                                   (fvd_missing ? "FVD " : "") + "skipped: missing inputs"};
  }
  return {SectionStatus::Ok, ""};
}

SectionOutcome section_table2(const Context& ctx, EvaluationReport& rep, Notes&) {
  KinematicsOptions real_opts{policy_for(ctx.cfg, ctx.real.manifest, HandPolicy::MostConfident),
                              ctx.cfg.aggregation};
  KinematicsOptions synth_opts{policy_for(ctx.cfg, ctx.synth.manifest, HandPolicy::MostConfident),
                               ctx.cfg.aggregation};
  std::vector<std::string> errors;
  try {
    auto tracks = tracks_of(ctx.real, ctx.real_videos);
    rep.table2.push_back({Source::Real, Condition::Reference, summarize_kinematics(tracks, real_opts)});
  } catch (const Error& e) {
    errors.push_back(std::string("Ref: ") + e.what());
  }
  for (const auto& [condition, videos] : by_condition(ctx.synth_videos)) {
    try {
      auto tracks = tracks_of(ctx.synth, videos);
      rep.table2.push_back({Source::Synthetic, condition, summarize_kinematics(tracks, synth_opts)});
    } catch (const Error& e) {
      errors.push_back(std::string(display_name(condition)) + ": " + e.what());
    }
  }
  if (!errors.empty()) return {SectionStatus::Error, join(errors, "; ")};
  return {SectionStatus::Ok, ""};
}

SectionOutcome section_table3(const Context& ctx, EvaluationReport& rep, Notes& notes) {
  AngleComparisonOptions opts;
  opts.bins = ctx.cfg.bins;
  opts.kl_epsilon = ctx.cfg.kl_epsilon;
  // Both datasets share one policy so the two angle populations are comparable.
  const HandPolicy real_policy = policy_for(ctx.cfg, ctx.real.manifest, HandPolicy::Both);
  const HandPolicy synth_policy = policy_for(ctx.cfg, ctx.synth.manifest, HandPolicy::Both);
  if (real_policy != synth_policy) {
    notes.push_back("table3: real and synthetic manifests select different hands (" +
                    std::string(to_string(real_policy)) + " vs " +
                    std::string(to_string(synth_policy)) + "); using " +
                    std::string(to_string(real_policy)));
  }
  opts.hand = real_policy;
  try {
    auto real = tracks_of(ctx.real, ctx.real_videos);
    auto synth = tracks_of(ctx.synth, ctx.synth_videos);
    rep.table3 = compare_angle_distributions(real, synth, opts);
  } catch (const Error& e) {
    return {SectionStatus::Error, e.what()};
  }
  return {SectionStatus::Ok, ""};
}

SectionOutcome section_alignment(const Context& ctx, EvaluationReport& rep, Notes&) {
  const ReferenceFrames refs = reference_frames(ctx);
  std::vector<std::string> errors;
  for (const auto* v : ctx.synth_videos) {
    const EmbeddingMatrix* frames = ctx.synth_emb.find(v->video_id, EmbeddingKind::FrameImage);
    if (!frames) {
      rep.alignment_skipped.push_back(v->video_id + ": missing frame embeddings");
      continue;
    }
    if (!v->prompt_id) {
      rep.alignment_skipped.push_back(v->video_id + ": no prompt_id");
      continue;
    }
    auto text_it = ctx.synth_emb.text.find(*v->prompt_id);
    if (text_it == ctx.synth_emb.text.end() || text_it->second.rows() == 0) {
      rep.alignment_skipped.push_back(v->video_id + ": missing text embedding for " + *v->prompt_id);
      continue;
    }
    auto ref = pick_reference(*v, refs);
    if (!ref) {
      rep.alignment_skipped.push_back(v->video_id + ": no real frame embeddings to compare with");
      continue;
    }
    try {
      auto trow = text_it->second.row(0);
      std::vector<double> text(trow.begin(), trow.end());
      AlignmentRow row;
      row.video_id = v->video_id;
      row.condition = v->condition;
      row.record = video_alignment(*frames, ref->first, text);
      row.record.video_id = v->video_id;
      row.reference = ref->second;
      for (double a : ctx.cfg.alphas) row.gas_by_alpha.push_back(gas(row.record, {a}));
      rep.alignment.push_back(std::move(row));
    } catch (const Error& e) {
      errors.push_back(v->video_id + ": " + e.what());
    }
  }
  if (!errors.empty()) return {SectionStatus::Error, join(errors, "; ")};
  if (rep.alignment.empty()) {
    return {SectionStatus::Skipped, "skipped: missing inputs (" + join(rep.alignment_skipped, "; ") + ")"};
  }

  std::vector<double> line_alphas;
  for (double a : ctx.cfg.alphas) {
    if (a < 1.0) line_alphas.push_back(a);
  }
  try {
    std::vector<AlignmentRecord> all;
    std::map<Condition, std::vector<AlignmentRecord>> per;
    for (const auto& r : rep.alignment) {
      all.push_back(r.record);
      per[r.condition].push_back(r.record);
    }
    for (const auto& line : iso_gas_lines(all, line_alphas)) rep.iso_gas.push_back({std::nullopt, line});
    for (const auto& [c, recs] : per) {
      for (const auto& line : iso_gas_lines(recs, line_alphas)) rep.iso_gas.push_back({c, line});
    }
  } catch (const Error& e) {
    return {SectionStatus::Error, e.what()};
  }
  if (!rep.alignment_skipped.empty()) {
    return {SectionStatus::Ok, "partial: " + std::to_string(rep.alignment_skipped.size()) +
                                   " videos skipped"};
  }
  return {SectionStatus::Ok, ""};
}

SectionOutcome section_diversity(const Context& ctx, EvaluationReport& rep, Notes& notes) {
  const HandPolicy real_policy = policy_for(ctx.cfg, ctx.real.manifest, HandPolicy::MostConfident);
  const HandPolicy synth_policy = policy_for(ctx.cfg, ctx.synth.manifest, HandPolicy::MostConfident);

  std::vector<PoseEmbedding> embeddings;
  std::map<std::string, Condition> labels;
  auto add = [&](const LoadedDataset& ds, const std::vector<const VideoMeta*>& videos,
                 HandPolicy policy) {
    for (const auto* v : videos) {
      if (labels.contains(v->video_id)) {
        notes.push_back("diversity: " + v->video_id + " appears in both datasets; counted once");
        continue;
      }
      auto it = ds.tracks.find(v->video_id);
      if (it == ds.tracks.end()) continue;
      try {
        embeddings.push_back(mean_pose_embedding(it->second, policy));
        labels.emplace(v->video_id, v->condition);
      } catch (const Error& e) {
        notes.push_back("diversity: " + v->video_id + ": " + e.what());
      }
    }
  };
  add(ctx.real, ctx.real_videos, real_policy);
  add(ctx.synth, ctx.synth_videos, synth_policy);

  try {
    const DistanceMatrix dm = cosine_distance_matrix(embeddings);
    rep.diversity_stats = inter_intra_stats(dm, labels);
    TsneResult tsne = tsne_from_distances(dm, ctx.cfg.tsne);
    std::map<Condition, std::vector<std::array<double, 2>>> per;
    for (const auto& p : tsne.points) {
      const Condition c = labels.at(p.id);
      rep.projection.push_back({p.id, c, p.xy[0], p.xy[1]});
      per[c].push_back(p.xy);
    }
    for (const auto& [c, pts] : per) {
      if (pts.size() < 3) {
        notes.push_back("diversity: no ellipse for " + std::string(to_string(c)) + " (" +
                        std::to_string(pts.size()) + " points)");
        continue;
      }
      rep.ellipses.push_back({c, condition_ellipse(pts)});
    }
    for (const auto& id : tsne.nonconvergent_bandwidth) {
      notes.push_back("diversity: bandwidth search did not converge for " + id);
    }
    tsne.points.clear();
    rep.tsne = std::move(tsne);
  } catch (const Error& e) {
    return {SectionStatus::Error, e.what()};
  }
  return {SectionStatus::Ok, ""};
}

using SectionFn = SectionOutcome (*)(const Context&, EvaluationReport&, Notes&);

SectionFn section_fn(Section s) {
  switch (s) {
    case Section::Table1: return section_table1;
    case Section::Table2: return section_table2;
    case Section::Table3: return section_table3;
    case Section::Alignment: return section_alignment;
    case Section::Diversity: return section_diversity;
  }
  return section_table1;
}

}  // namespace

EvaluationReport evaluate(const RunConfig& cfg, std::span<const Section> sections) {
  cfg.validate();
  Context ctx;
  ctx.cfg = cfg;
  ctx.real = load_dataset(cfg.real_manifest, cfg.confidence_threshold);
  ctx.synth = load_dataset(cfg.synth_manifest, cfg.confidence_threshold);

  EvaluationReport rep;
  rep.config = cfg;
  for (const auto& w : ctx.real.warnings) rep.notes.push_back("real " + w);
  for (const auto& w : ctx.synth.warnings) rep.notes.push_back("synthetic " + w);

  const bool need_embeddings =
      std::any_of(sections.begin(), sections.end(),
                  [](Section s) { return s == Section::Table1 || s == Section::Alignment; });
  if (need_embeddings) {
    std::vector<std::string> w;
    ctx.real_emb = load_embedding_store(ctx.real.manifest, w);
    for (auto& s : w) rep.notes.push_back("real " + s);
    w.clear();
    ctx.synth_emb = load_embedding_store(ctx.synth.manifest, w);
    for (auto& s : w) rep.notes.push_back("synthetic " + s);
  }
  ctx.real_videos = sorted_videos(ctx.real.manifest, {});
  ctx.synth_videos = sorted_videos(ctx.synth.manifest, cfg.conditions);

  std::vector<Section> todo(sections.begin(), sections.end());
  std::sort(todo.begin(), todo.end());
  todo.erase(std::unique(todo.begin(), todo.end()), todo.end());

  // Sections write disjoint members of `rep`; notes are merged in order.
  std::vector<Notes> section_notes(todo.size());
  std::vector<SectionOutcome> outcomes(todo.size());
  auto run = [&](std::size_t i) {
    try {
      outcomes[i] = section_fn(todo[i])(ctx, rep, section_notes[i]);
    } catch (const std::exception& e) {
      outcomes[i] = {SectionStatus::Error, e.what()};
    }
  };
  const unsigned threads = resolve_thread_count(cfg.threads);
  if (threads <= 1 || todo.size() <= 1) {
    for (std::size_t i = 0; i < todo.size(); ++i) run(i);
  } else {
    for (std::size_t start = 0; start < todo.size(); start += threads) {
      std::vector<std::future<void>> batch;
      for (std::size_t i = start; i < std::min(todo.size(), start + threads); ++i) {
        batch.push_back(std::async(std::launch::async, run, i));
      }
      for (auto& f : batch) f.get();
    }
  }
  for (std::size_t i = 0; i < todo.size(); ++i) {
    rep.outcomes[todo[i]] = outcomes[i];
    for (auto& n : section_notes[i]) rep.notes.push_back(std::move(n));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Emission

namespace {

using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

Cell opt(const std::optional<double>& v) {
  if (v) return *v;
  return std::monostate{};
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return ec == std::errc() ? std::string(buf, ptr) : std::to_string(v);
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

json cell_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else {
          return v;
        }
      },
      c);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c, bool markdown) {
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return markdown ? "-" : "";
        } else if constexpr (std::is_same_v<T, double>) {
          return markdown ? fixed2(v) : shortest(v);
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else {
          return markdown ? v : csv_escape(v);
        }
      },
      c);
}

std::string render_json(const Table& t, const json& meta) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json obj = json::object();
    for (std::size_t i = 0; i < t.columns.size(); ++i) obj[t.columns[i]] = cell_json(r[i]);
    rows.push_back(std::move(obj));
  }
  json root = json::object();
  if (!meta.is_null()) root["meta"] = meta;
  root["rows"] = std::move(rows);
  return root.dump(2) + "\n";
}

std::string render_csv(const Table& t) {
  std::ostringstream out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << csv_escape(t.columns[i]);
  out << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << cell_text(r[i], false);
    out << "\n";
  }
  return out.str();
}

std::string render_markdown(const Table& t, const std::string& caption,
                            const std::vector<std::string>& footnotes) {
  std::ostringstream out;
  if (!caption.empty()) out << caption << "\n\n";
  out << "|";
  for (const auto& c : t.columns) out << " " << c << " |";
  out << "\n|";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << " --- |";
  out << "\n";
  for (const auto& r : t.rows) {
    out << "|";
    for (const auto& c : r) out << " " << cell_text(c, true) << " |";
    out << "\n";
  }
  if (!footnotes.empty()) {
    out << "\n";
    for (const auto& f : footnotes) out << "- " << f << "\n";
  }
  return out.str();
}

class Writer {
 public:
  Writer(fs::path dir, OutputFormat format) : dir_(std::move(dir)), format_(format) {
    fs::create_directories(dir_);
  }

  // `display` replaces `machine` in markdown output when given.
  void write(const std::string& stem, const Table& machine, const json& meta,
             const std::optional<Table>& display = std::nullopt, const std::string& caption = {},
             const std::vector<std::string>& footnotes = {}) {
    std::string body;
    switch (format_) {
      case OutputFormat::Json: body = render_json(machine, meta); break;
      case OutputFormat::Csv: body = render_csv(machine); break;
      case OutputFormat::Markdown:
        body = render_markdown(display ? *display : machine, caption, footnotes);
        break;
    }
    write_raw(stem + std::string(file_extension(format_)), body);
  }

  void write_raw(const std::string& name, const std::string& body) {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorKind::MissingFile, p.string());
    out << body;
    written_.push_back(p);
  }

  const std::vector<fs::path>& written() const { return written_; }

 private:
  fs::path dir_;
  OutputFormat format_;
  std::vector<fs::path> written_;
};

std::string type_label(Source s) { return s == Source::Real ? "Real" : "Synthetic"; }

void emit_table1(const EvaluationReport& rep, Writer& w) {
  Table machine{{"type", "dataset", "condition", "videos", "hand_confidence", "fid", "fvd",
                 "clip_similarity", "notes"},
                {}};
  Table display{{"Type", "Dataset", "Hand Confidence", "FID", "FVD", "CLIP Similarity"}, {}};
  for (const auto& r : rep.table1) {
    machine.rows.push_back({type_label(r.source), std::string(display_name(r.condition)),
                            std::string(to_string(r.condition)), static_cast<std::int64_t>(r.videos),
                            opt(r.hand_confidence), opt(r.fid), opt(r.fvd), opt(r.clip_similarity),
                            join(r.notes, "; ")});
    display.rows.push_back({type_label(r.source), std::string(display_name(r.condition)),
                            opt(r.hand_confidence), opt(r.fid), opt(r.fvd), opt(r.clip_similarity)});
  }
  json meta = {{"fid_fvd", "squared Frechet distance"},
               {"group_average", rep.config.group_average},
               {"clip_similarity", "mean VAS over the condition's videos"}};
  std::vector<std::string> foot;
  for (const auto& r : rep.table1) {
    for (const auto& n : r.notes) foot.push_back(std::string(display_name(r.condition)) + ": " + n);
  }
  w.write("table1", machine, meta, display,
          "Hand confidence, visual fidelity (FID, FVD) and semantic consistency (CLIP similarity)",
          foot);
}

void emit_table2(const EvaluationReport& rep, Writer& w) {
  Table machine{{"type", "dataset", "condition", "velocity_mean", "velocity_std",
                 "acceleration_mean", "acceleration_std", "jerk_mean", "jerk_std",
                 "velocity_samples", "acceleration_samples", "jerk_samples"},
                {}};
  Table display{{"Type", "Dataset", "Velocity (1st deriv.)", "Acceleration (2nd deriv.)",
                 "Jerk (3rd deriv.)"},
                {}};
  Table per_video{{"type", "condition", "video_id", "velocity_mean", "acceleration_mean", "jerk_mean"}, {}};
  for (const auto& r : rep.table2) {
    std::vector<Cell> row{type_label(r.source), std::string(display_name(r.condition)),
                          std::string(to_string(r.condition))};
    std::vector<Cell> drow{type_label(r.source), std::string(display_name(r.condition))};
    for (DerivativeOrder o : kAllOrders) {
      const auto& m = r.summary.at(o);
      row.push_back(m.mean);
      row.push_back(m.std);
      drow.push_back(fixed2(m.mean) + " (" + fixed2(m.std) + ")");
    }
    for (DerivativeOrder o : kAllOrders) row.push_back(static_cast<std::int64_t>(r.summary.at(o).count));
    machine.rows.push_back(std::move(row));
    display.rows.push_back(std::move(drow));
    for (const auto& v : r.summary.per_video) {
      std::vector<Cell> pv{type_label(r.source), std::string(to_string(r.condition)), v.video_id};
      for (const auto& m : v.mean_by_order) pv.push_back(opt(m));
      per_video.rows.push_back(std::move(pv));
    }
  }
  json meta = {{"units", "normalized image coordinates per second^order"},
               {"std", "population"},
               {"differencing", "forward"},
               {"aggregation", std::string(to_string(rep.config.aggregation))}};
  w.write("table2", machine, meta, display,
          "Mean (standard deviation) of the motion derivatives; units: normalized coordinates / s^k",
          {"population standard deviation, pooled over per-frame magnitudes"});
  w.write("table2_per_video", per_video, meta);
}

void emit_table3(const EvaluationReport& rep, Writer& w) {
  Table machine{{"finger", "mp_joint", "type", "kl", "emd_deg", "emd_bins", "real_samples",
                 "synth_samples"},
                {}};
  Table display{{"Finger", "MP Joint", "Type", "KL", "EMD"}, {}};
  for (const auto& p : rep.table3) {
    const std::string finger(to_string(p.joint.finger));
    const auto mp = static_cast<std::int64_t>(p.joint.joint_landmark());
    const std::string type(to_string(p.joint.joint));
    machine.rows.push_back({finger, mp, type, p.kl, p.emd_deg, p.emd_bins,
                            static_cast<std::int64_t>(p.real_samples),
                            static_cast<std::int64_t>(p.synth_samples)});
    display.rows.push_back({finger, mp, type, p.kl, p.emd_deg});
  }
  json meta = {{"bins", rep.config.bins},
               {"bin_width_deg", 180.0 / static_cast<double>(rep.config.bins)},
               {"kl", "KL(synthetic || real), nats"},
               {"kl_epsilon", rep.config.kl_epsilon}};
  w.write("table3", machine, meta, display,
          "KL divergence and EMD (degrees) between synthetic and real finger joint angles",
          {"bins: " + std::to_string(rep.config.bins)});
}

std::string alpha_label(double a) { return "gas_" + shortest(a); }

void emit_alignment(const EvaluationReport& rep, Writer& w) {
  Table t{{"video_id", "condition", "reference", "vas", "pas"}, {}};
  for (double a : rep.config.alphas) t.columns.push_back(alpha_label(a));
  for (const auto& r : rep.alignment) {
    std::vector<Cell> row{r.video_id, std::string(to_string(r.condition)), r.reference,
                          r.record.vas, r.record.pas};
    for (double g : r.gas_by_alpha) row.push_back(g);
    t.rows.push_back(std::move(row));
  }
  json meta = {{"alphas", rep.config.alphas},
               {"pas", "mean per-frame cosine similarity to the prompt text embedding"},
               {"vas", "cosine similarity of mean frame embeddings"},
               {"skipped", rep.alignment_skipped}};
  w.write("alignment", t, meta, std::nullopt, "Per-video alignment scores", rep.alignment_skipped);

  Table lines{{"condition", "alpha", "level", "vertical", "intercept", "slope"}, {}};
  for (const auto& l : rep.iso_gas) {
    lines.rows.push_back({l.condition ? std::string(to_string(*l.condition)) : std::string("all"),
                          l.line.alpha, l.line.level, std::string(l.line.vertical ? "true" : "false"),
                          l.line.intercept, l.line.slope});
  }
  json lmeta = {{"form", "PAS = intercept + slope * VAS; vertical lines: VAS = intercept"}};
  w.write("iso_gas", lines, lmeta, std::nullopt, "Iso-GAS line descriptors");
}

void emit_diversity(const EvaluationReport& rep, Writer& w) {
  Table pts{{"video_id", "condition", "x", "y"}, {}};
  for (const auto& p : rep.projection) {
    pts.rows.push_back({p.video_id, std::string(to_string(p.condition)), p.x, p.y});
  }
  const auto& t = rep.config.tsne;
  json meta = {{"perplexity", t.perplexity},
               {"iterations", t.iterations},
               {"learning_rate", t.learning_rate},
               {"early_exaggeration", t.early_exaggeration},
               {"seed", t.seed}};
  if (rep.tsne) {
    meta["initial_kl"] = rep.tsne->initial_kl;
    meta["final_kl"] = rep.tsne->final_kl;
    meta["nonconvergent_bandwidth"] = rep.tsne->nonconvergent_bandwidth;
  }
  w.write("tsne_points", pts, meta, std::nullopt, "t-SNE projection of mean pose embeddings");

  Table el{{"condition", "cx", "cy", "major", "minor", "angle_rad"}, {}};
  for (const auto& e : rep.ellipses) {
    el.rows.push_back({std::string(to_string(e.condition)), e.ellipse.center[0], e.ellipse.center[1],
                       e.ellipse.major, e.ellipse.minor, e.ellipse.angle_rad});
  }
  w.write("ellipses", el, json{{"scale", "one standard deviation"}}, std::nullopt,
          "Condition ellipses (one standard deviation)");

  Table st{{"condition_a", "condition_b", "kind", "mean", "std", "pairs"}, {}};
  for (const auto& p : rep.diversity_stats.pairs) {
    st.rows.push_back({std::string(to_string(p.first)), std::string(to_string(p.second)),
                       std::string(p.intra() ? "intra" : "inter"), p.mean, p.std,
                       static_cast<std::int64_t>(p.pairs)});
  }
  json smeta = {{"distance", "cosine"}, {"std", "population"}};
  std::vector<std::string> singles;
  for (Condition c : rep.diversity_stats.singleton_conditions) singles.emplace_back(to_string(c));
  smeta["singleton_conditions"] = singles;
  w.write("diversity_stats", st, smeta, std::nullopt, "Inter/intra-condition cosine distances");
}

json config_json(const RunConfig& c) {
  std::vector<std::string> conds;
  for (Condition x : c.conditions) conds.emplace_back(to_string(x));
  return {{"real_manifest", c.real_manifest.generic_string()},
          {"synth_manifest", c.synth_manifest.generic_string()},
          {"conditions", conds},
          {"alphas", c.alphas},
          {"bins", c.bins},
          {"confidence_threshold", c.confidence_threshold},
          {"group_average", c.group_average},
          {"hand", c.hand ? std::string(to_string(*c.hand)) : std::string("auto")},
          {"aggregation", std::string(to_string(c.aggregation))},
          {"kl_epsilon", c.kl_epsilon},
          {"format", std::string(to_string(c.format))},
          {"tsne",
           {{"perplexity", c.tsne.perplexity},
            {"output_dims", c.tsne.output_dims},
            {"iterations", c.tsne.iterations},
            {"learning_rate", c.tsne.learning_rate},
            {"initial_momentum", c.tsne.initial_momentum},
            {"final_momentum", c.tsne.final_momentum},
            {"momentum_switch_iteration", c.tsne.momentum_switch_iteration},
            {"early_exaggeration", c.tsne.early_exaggeration},
            {"exaggeration_iterations", c.tsne.exaggeration_iterations},
            {"seed", c.tsne.seed},
            {"perplexity_tolerance", c.tsne.perplexity_tolerance},
            {"bandwidth_max_iterations", c.tsne.bandwidth_max_iterations}}},
          {"fixed",
           {{"segment_epsilon", kDefaultSegmentEpsilon},
            {"covariance_denominator", "N-1"},
            {"kinematics_std", "population"},
            {"differencing", "forward"}}}};
}

}  // namespace

std::vector<fs::path> write_report(const EvaluationReport& rep) {
  Writer w(rep.config.output_dir, rep.config.format);
  auto has = [&](Section s) {
    auto it = rep.outcomes.find(s);
    return it != rep.outcomes.end() && it->second.status != SectionStatus::Skipped;
  };
  if (has(Section::Table1)) emit_table1(rep, w);
  if (has(Section::Table2)) emit_table2(rep, w);
  if (has(Section::Table3)) emit_table3(rep, w);
  if (has(Section::Alignment)) emit_alignment(rep, w);
  if (has(Section::Diversity)) emit_diversity(rep, w);

  json sections = json::object();
  for (const auto& [s, o] : rep.outcomes) {
    sections[std::string(to_string(s))] = {{"status", std::string(to_string(o.status))},
                                           {"message", o.message}};
  }
  std::vector<std::string> files;
  for (const auto& p : w.written()) files.push_back(p.filename().string());
  json prov = {{"tool", std::string(kToolName)},
               {"version", std::string(kToolVersion)},
               {"config", config_json(rep.config)},
               {"sections", sections},
               {"files", files},
               {"notes", rep.notes}};
  // Written last so its presence marks a complete run.
  w.write_raw("provenance.json", prov.dump(2) + "\n");
  return w.written();
}

EvaluationReport run_full_report(const RunConfig& cfg) {
  EvaluationReport rep = evaluate(cfg, kAllSections);
  write_report(rep);
  return rep;
}

}  // namespace gf
