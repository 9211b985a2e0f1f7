#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "prosody/audio.hpp"
#include "prosody/features.hpp"
#include "prosody/mel.hpp"
#include "prosody/metrics.hpp"

namespace prosody {

// Shortest lossless decimal representation.
std::string format_double(double v);

// Contour CSV: header `frame,time_s,value,voiced`; the voiced column is
// empty for RMS contours and 0/1 for pitch contours.
void write_contour_csv(const std::filesystem::path& path, const Contour& contour);
Contour read_contour_csv(const std::filesystem::path& path);

// GS corpus CSV: the 7-name header, then per utterance a `# <source>`
// comment line followed by its feature row.
struct GsRow {
  std::string id;
  GsFeatures features;
};
void write_gs_csv(const std::filesystem::path& path, std::span<const GsRow> rows);
std::vector<GsRow> read_gs_csv(const std::filesystem::path& path);

// NormStats JSON: {"mean":[7],"std":[7]}, plus an optional "corpus" tag
// recording what the stats were fitted on.
void save_norm_stats(const std::filesystem::path& path, const NormStats& stats,
                     const std::string& corpus = {});
NormStats load_norm_stats(const std::filesystem::path& path);

void save_pair_metrics(const std::filesystem::path& path, const PairMetrics& metrics);
PairMetrics load_pair_metrics(const std::filesystem::path& path);

void save_metric_report(const std::filesystem::path& path, const MetricReport& report);
MetricReport load_metric_report(const std::filesystem::path& path);

// Mean +- std table in the published layout.
std::string format_metric_table(const MetricAggregate& aggregate, int n_runs);

// Scatter CSV: header `id,x,y,group`.
struct ScatterRow {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  std::string group;
};
void write_scatter_csv(const std::filesystem::path& path, std::span<const ScatterRow> rows);
std::vector<ScatterRow> read_scatter_csv(const std::filesystem::path& path);

// Monte Carlo manifest: references (id -> wav path), texts (ids), and a
// candidates map keyed "textid:refid" -> wav path. Relative paths are
// resolved against the manifest's directory.
struct EvalManifest {
  std::map<std::string, std::filesystem::path> references;
  std::vector<std::string> texts;
  std::map<std::string, std::filesystem::path> candidates;
};
EvalManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const EvalManifest& manifest);

// Mel matrix CSV: one row per frame, n_mels columns.
void write_mel_csv(const std::filesystem::path& path, const MelSpectrogram& mel);
MelSpectrogram read_mel_csv(const std::filesystem::path& path);

}  // namespace prosody
