#include "prosody/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "prosody/error.hpp"

namespace prosody {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidInputError("bad numeric field '" + s + "' in " + context);
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidInputError("cannot write file: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open file: " + path.string());
  return in;
}

nlohmann::json parse_json(std::ifstream& in, const std::filesystem::path& path) {
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError("bad JSON in " + path.string() + ": " + e.what());
  }
}

std::array<double, GsFeatures::kDim> json_vec7(const nlohmann::json& j, const char* key,
                                               const std::filesystem::path& path) {
  const auto arr = j.at(key).get<std::vector<double>>();
  if (arr.size() != GsFeatures::kDim)
    throw InvalidInputError(std::string(key) + " must have 7 entries in " + path.string());
  std::array<double, GsFeatures::kDim> out;
  std::copy(arr.begin(), arr.end(), out.begin());
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_contour_csv(const std::filesystem::path& path, const Contour& contour) {
  auto out = open_out(path);
  out << "frame,time_s,value,voiced\n";
  const bool pitched = contour.kind == ContourKind::LogF0;
  for (std::size_t i = 0; i < contour.values.size(); ++i) {
    out << i << ',' << format_double(contour.frame_time_s(i)) << ','
        << format_double(contour.values[i]) << ',';
    if (pitched) out << static_cast<int>(contour.voicing[i]);
    out << '\n';
  }
}

Contour read_contour_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != "frame,time_s,value,voiced")
    throw InvalidInputError("bad contour header in " + path.string());

  Contour contour;
  bool any_voiced_field = false;
  std::vector<double> times;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) throw InvalidInputError("bad contour row in " + path.string());
    times.push_back(parse_double(fields[1], path.string()));
    contour.values.push_back(parse_double(fields[2], path.string()));
    if (!fields[3].empty()) {
      any_voiced_field = true;
      contour.voicing.push_back(fields[3] == "1" ? 1 : 0);
    }
  }
  if (any_voiced_field && contour.voicing.size() != contour.values.size())
    throw InvalidInputError("inconsistent voiced column in " + path.string());
  contour.kind = any_voiced_field ? ContourKind::LogF0 : ContourKind::Rms;

  // Frame geometry is not stored in the CSV; recover a (hop, rate) pair
  // that reproduces the time column.
  contour.sample_rate_hz = 16000;
  contour.frame_spec.window_len = 1;
  contour.frame_spec.hop_len = 1;
  if (times.size() >= 2 && times[1] > 0.0) {
    contour.frame_spec.hop_len = 1;
    contour.frame_spec.window_len = 1;
    contour.sample_rate_hz = static_cast<int>(std::lround(1.0 / times[1]));
    if (contour.sample_rate_hz < 1) contour.sample_rate_hz = 1;
  }
  return contour;
}

void write_gs_csv(const std::filesystem::path& path, std::span<const GsRow> rows) {
  auto out = open_out(path);
  for (std::size_t d = 0; d < GsFeatures::kDim; ++d)
    out << GsFeatures::kNames[d] << (d + 1 < GsFeatures::kDim ? "," : "\n");
  for (const auto& row : rows) {
    out << "# " << row.id << '\n';
    for (std::size_t d = 0; d < GsFeatures::kDim; ++d)
      out << format_double(row.features[d]) << (d + 1 < GsFeatures::kDim ? "," : "\n");
  }
}

std::vector<GsRow> read_gs_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "f0_mean,f0_var,f0_max,f0_min,rms_mean,rms_var,rms_max")
    throw InvalidInputError("bad GS csv header in " + path.string());

  std::vector<GsRow> rows;
  std::string pending_id;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      pending_id = line.substr(2);
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != GsFeatures::kDim)
      throw InvalidInputError("bad GS row in " + path.string());
    GsRow row;
    row.id = pending_id;
    pending_id.clear();
    for (std::size_t d = 0; d < GsFeatures::kDim; ++d)
      row.features[d] = parse_double(fields[d], path.string());
    rows.push_back(std::move(row));
  }
  return rows;
}

void save_norm_stats(const std::filesystem::path& path, const NormStats& stats,
                     const std::string& corpus) {
  nlohmann::json j;
  j["mean"] = stats.mean;
  j["std"] = stats.stddev;
  if (!corpus.empty()) j["corpus"] = corpus;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

NormStats load_norm_stats(const std::filesystem::path& path) {
  auto in = open_in(path);
  const auto j = parse_json(in, path);
  NormStats stats;
  stats.mean = json_vec7(j, "mean", path);
  stats.stddev = json_vec7(j, "std", path);
  return stats;
}

void save_pair_metrics(const std::filesystem::path& path, const PairMetrics& metrics) {
  nlohmann::json j;
  for (std::size_t k = 0; k < 4; ++k) j[std::string(PairMetrics::kNames[k])] = metrics[k];
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

PairMetrics load_pair_metrics(const std::filesystem::path& path) {
  auto in = open_in(path);
  const auto j = parse_json(in, path);
  PairMetrics m;
  m.pitch_cosine = j.at("pitch_cosine").get<double>();
  m.rms_cosine = j.at("rms_cosine").get<double>();
  m.pitch_dtw = j.at("pitch_dtw").get<double>();
  m.rms_dtw = j.at("rms_dtw").get<double>();
  return m;
}

namespace {

nlohmann::json metrics_json(const PairMetrics& m) {
  nlohmann::json j;
  for (std::size_t k = 0; k < 4; ++k) j[std::string(PairMetrics::kNames[k])] = m[k];
  return j;
}

PairMetrics metrics_from_json(const nlohmann::json& j) {
  PairMetrics m;
  m.pitch_cosine = j.at("pitch_cosine").get<double>();
  m.rms_cosine = j.at("rms_cosine").get<double>();
  m.pitch_dtw = j.at("pitch_dtw").get<double>();
  m.rms_dtw = j.at("rms_dtw").get<double>();
  return m;
}

}  // namespace

void save_metric_report(const std::filesystem::path& path, const MetricReport& report) {
  nlohmann::json j;
  j["n_runs"] = report.n_runs;
  j["seed"] = report.seed;
  j["skipped"] = report.skipped;
  j["aggregate"] = {{"mean", metrics_json(report.aggregate.mean)},
                    {"std", metrics_json(report.aggregate.stddev)}};
  auto& rows = j["per_pair"];
  rows = nlohmann::json::array();
  for (const auto& row : report.per_pair) {
    nlohmann::json r = metrics_json(row.metrics);
    r["reference"] = row.reference_id;
    r["candidate"] = row.candidate_id;
    rows.push_back(std::move(r));
  }
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

MetricReport load_metric_report(const std::filesystem::path& path) {
  auto in = open_in(path);
  const auto j = parse_json(in, path);
  MetricReport report;
  report.n_runs = j.at("n_runs").get<int>();
  report.seed = j.at("seed").get<std::uint64_t>();
  report.skipped = j.at("skipped").get<std::size_t>();
  report.aggregate.mean = metrics_from_json(j.at("aggregate").at("mean"));
  report.aggregate.stddev = metrics_from_json(j.at("aggregate").at("std"));
  for (const auto& r : j.at("per_pair")) {
    PairRow row;
    row.reference_id = r.at("reference").get<std::string>();
    row.candidate_id = r.at("candidate").get<std::string>();
    row.metrics = metrics_from_json(r);
    report.per_pair.push_back(std::move(row));
  }
  return report;
}

std::string format_metric_table(const MetricAggregate& aggregate, int n_runs) {
  std::ostringstream out;
  out << "Objective metrics for prosody transfer. Lower is better. (n_runs = " << n_runs << ")\n";
  char buf[96];
  for (std::size_t k = 0; k < 4; ++k) {
    std::snprintf(buf, sizeof buf, "%-14s %.4f +- %.4f\n",
                  std::string(PairMetrics::kLabels[k]).c_str(), aggregate.mean[k],
                  aggregate.stddev[k]);
    out << buf;
  }
  return out.str();
}

void write_scatter_csv(const std::filesystem::path& path, std::span<const ScatterRow> rows) {
  auto out = open_out(path);
  out << "id,x,y,group\n";
  for (const auto& row : rows)
    out << row.id << ',' << format_double(row.x) << ',' << format_double(row.y) << ','
        << row.group << '\n';
}

std::vector<ScatterRow> read_scatter_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != "id,x,y,group")
    throw InvalidInputError("bad scatter header in " + path.string());
  std::vector<ScatterRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) throw InvalidInputError("bad scatter row in " + path.string());
    rows.push_back({fields[0], parse_double(fields[1], path.string()),
                    parse_double(fields[2], path.string()), fields[3]});
  }
  return rows;
}

EvalManifest load_manifest(const std::filesystem::path& path) {
  auto in = open_in(path);
  const auto j = parse_json(in, path);
  EvalManifest manifest;
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  for (const auto& [id, p] : j.at("references").items())
    manifest.references[id] = resolve(p.get<std::string>());
  manifest.texts = j.at("texts").get<std::vector<std::string>>();
  for (const auto& [key, p] : j.at("candidates").items())
    manifest.candidates[key] = resolve(p.get<std::string>());
  if (manifest.references.empty() || manifest.texts.empty())
    throw InvalidInputError("manifest needs references and texts: " + path.string());
  return manifest;
}

void save_manifest(const std::filesystem::path& path, const EvalManifest& manifest) {
  nlohmann::json j;
  auto& refs = j["references"];
  refs = nlohmann::json::object();
  for (const auto& [id, p] : manifest.references) refs[id] = p.string();
  j["texts"] = manifest.texts;
  auto& cands = j["candidates"];
  cands = nlohmann::json::object();
  for (const auto& [key, p] : manifest.candidates) cands[key] = p.string();
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_mel_csv(const std::filesystem::path& path, const MelSpectrogram& mel) {
  auto out = open_out(path);
  for (std::size_t f = 0; f < mel.n_frames; ++f) {
    for (std::size_t m = 0; m < mel.n_mels; ++m)
      out << format_double(mel.at(f, m)) << (m + 1 < mel.n_mels ? "," : "\n");
  }
}

MelSpectrogram read_mel_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  MelSpectrogram mel;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (mel.n_mels == 0) mel.n_mels = fields.size();
    if (fields.size() != mel.n_mels)
      throw InvalidInputError("ragged mel row in " + path.string());
    for (const auto& f : fields) mel.data.push_back(parse_double(f, path.string()));
    ++mel.n_frames;
  }
  if (mel.n_frames == 0) throw InvalidInputError("empty mel csv: " + path.string());
  return mel;
}

}  // namespace prosody
