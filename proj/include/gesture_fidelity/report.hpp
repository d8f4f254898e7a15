#pragma once

// End-to-end evaluation: loads a real and a synthetic dataset, runs every
// metric module, and writes report tables and plot data under one directory.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gesture_fidelity/data_model.hpp"
#include "gesture_fidelity/diversity.hpp"
#include "gesture_fidelity/embedding_stats.hpp"
#include "gesture_fidelity/hand_geometry.hpp"
#include "gesture_fidelity/kinematics.hpp"

namespace gf {

inline constexpr std::string_view kToolName = "gesture-fidelity";
inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kThreadsEnvVar = "GESTURE_FIDELITY_THREADS";

enum class OutputFormat { Json, Csv, Markdown };

std::string_view to_string(OutputFormat f) noexcept;
std::string_view file_extension(OutputFormat f) noexcept;
OutputFormat parse_output_format(std::string_view s);

struct RunConfig {
  std::filesystem::path real_manifest;
  std::filesystem::path synth_manifest;
  std::vector<Condition> conditions;  // empty: every synthetic condition
  std::vector<double> alphas = kDefaultAlphas;
  std::size_t bins = kDefaultAngleBins;
  double confidence_threshold = kDefaultConfidenceThreshold;
  bool group_average = true;
  TsneConfig tsne;
  // Overrides both the module defaults and the manifests' pointing_hand.
  std::optional<HandPolicy> hand;
  MagnitudeAggregation aggregation = MagnitudeAggregation::Mean;
  double kl_epsilon = kDefaultKlEpsilon;
  std::filesystem::path output_dir;
  OutputFormat format = OutputFormat::Json;
  unsigned threads = 0;  // 0: environment variable, then hardware concurrency

  /// Throws InvalidArgument when alphas, bins or the threshold are out of range.
  void validate() const;
};

enum class SectionStatus { Ok, Skipped, Error };

std::string_view to_string(SectionStatus s) noexcept;

struct SectionOutcome {
  SectionStatus status = SectionStatus::Skipped;
  std::string message;
};

enum class Section { Table1, Table2, Table3, Alignment, Diversity };

inline constexpr std::array<Section, 5> kAllSections = {
    Section::Table1, Section::Table2, Section::Table3, Section::Alignment, Section::Diversity};

std::string_view to_string(Section s) noexcept;

struct Table1Row {
  Source source = Source::Real;
  Condition condition = Condition::Reference;
  std::optional<double> hand_confidence;
  std::optional<double> fid;
  std::optional<double> fvd;
  std::optional<double> clip_similarity;
  std::size_t videos = 0;
  std::vector<std::string> notes;
};

struct Table2Row {
  Source source = Source::Real;
  Condition condition = Condition::Reference;
  KinematicsSummary summary;
};

struct AlignmentRow {
  std::string video_id;
  Condition condition = Condition::StaticScene;
  AlignmentRecord record;
  std::string reference;  // "video:<id>" or "centroid"
  std::vector<double> gas_by_alpha;  // parallel to RunConfig::alphas
};

struct IsoGasRow {
  std::optional<Condition> condition;  // nullopt: all synthetic videos
  IsoGasLine line;
};

struct ProjectionRow {
  std::string video_id;
  Condition condition = Condition::Reference;
  double x = 0.0;
  double y = 0.0;
};

struct EllipseRow {
  Condition condition = Condition::Reference;
  EllipseSummary ellipse;
};

struct EvaluationReport {
  RunConfig config;
  std::map<Section, SectionOutcome> outcomes;  // only requested sections

  std::vector<Table1Row> table1;
  std::vector<Table2Row> table2;
  std::vector<DivergencePair> table3;
  std::vector<AlignmentRow> alignment;
  std::vector<std::string> alignment_skipped;  // "<video_id>: reason"
  std::vector<IsoGasRow> iso_gas;
  std::vector<ProjectionRow> projection;
  std::vector<EllipseRow> ellipses;
  InterIntraStats diversity_stats;
  std::optional<TsneResult> tsne;  // metadata only; points live in projection

  std::vector<std::string> notes;  // loader warnings and fallbacks

  bool any_error() const;
};

struct LoadedDataset {
  DatasetManifest manifest;
  std::map<std::string, LandmarkTrack> tracks;  // keyed by video_id
  std::vector<std::string> warnings;
};

LoadedDataset load_dataset(const std::filesystem::path& manifest_path,
                           double confidence_threshold);

/// Computes the requested sections; errors inside a section are captured in
/// its outcome. Manifest loading failures propagate.
EvaluationReport evaluate(const RunConfig& cfg, std::span<const Section> sections);

/// Writes every computed section plus provenance.json; returns the paths.
std::vector<std::filesystem::path> write_report(const EvaluationReport& report);

/// evaluate() over all sections followed by write_report().
EvaluationReport run_full_report(const RunConfig& cfg);

unsigned resolve_thread_count(unsigned requested);

}  // namespace gf
