#include "aucap/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <unordered_set>

#include "aucap/emb_io.hpp"
#include "aucap/error.hpp"

namespace aucap::dataset {

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::development: return "development";
    case Split::validation: return "validation";
    case Split::evaluation: return "evaluation";
  }
  return "development";
}

Split parse_split(std::string_view name) {
  if (name == "development" || name == "train") return Split::development;
  if (name == "validation" || name == "val") return Split::validation;
  if (name == "evaluation" || name == "test") return Split::evaluation;
  throw Error(Errc::invalid_argument, "unknown split '" + std::string(name) + "'");
}

std::string_view to_string(CsvFormat format) noexcept {
  switch (format) {
    case CsvFormat::clotho: return "clotho";
    case CsvFormat::audiocaps: return "audiocaps";
    case CsvFormat::generic: return "generic";
  }
  return "generic";
}

CsvFormat parse_format(std::string_view name) {
  if (name == "clotho") return CsvFormat::clotho;
  if (name == "audiocaps") return CsvFormat::audiocaps;
  if (name == "generic") return CsvFormat::generic;
  throw Error(Errc::invalid_argument, "unknown CSV format '" + std::string(name) + "'");
}

std::vector<const ClipRecord*> DatasetManifest::in_split(Split split) const {
  std::vector<const ClipRecord*> out;
  for (const auto& r : records) {
    if (r.split == split) out.push_back(&r);
  }
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t i = 0;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;

  auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
    field_started = false;
  };
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !field.empty()) {
          throw Error(Errc::malformed, "stray quote inside an unquoted CSV field");
        }
        quoted = true;
        field_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (quoted) throw Error(Errc::malformed, "unterminated quoted CSV field");
  if (!field.empty() || !row.empty()) end_row();
  return rows;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::not_found, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t column(const std::vector<std::string>& header, std::string_view name,
                   const std::filesystem::path& path) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw Error(Errc::malformed, path.string() + ": missing column '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

std::string stem_of(const std::string& file_name) {
  return std::filesystem::path(file_name).stem().string();
}

text::TokenizedCaption clean_cell(const std::string& cell, const std::filesystem::path& path,
                                  std::size_t line) {
  const std::string where = path.string() + " row " + std::to_string(line);
  if (cell.find_first_not_of(" \t") == std::string::npos) {
    throw Error(Errc::malformed, where + ": empty caption cell");
  }
  try {
    return text::clean_caption(cell);
  } catch (const Error& e) {
    throw Error(e.code(), where + ": " + e.what());
  }
}

}  // namespace

DatasetManifest load_caption_csv(const std::filesystem::path& path, CsvFormat format, Split split) {
  const auto rows = parse_csv(read_file(path));
  if (rows.empty()) throw Error(Errc::malformed, path.string() + ": no header row");
  const auto& header = rows.front();

  DatasetManifest m;
  m.format = format;
  std::map<std::string, std::size_t> seen;  // clip id -> record index

  auto cell = [&](const std::vector<std::string>& row, std::size_t col, std::size_t line) {
    if (col >= row.size()) {
      throw Error(Errc::malformed, path.string() + " row " + std::to_string(line) +
                                       ": expected " + std::to_string(header.size()) + " fields");
    }
    return row[col];
  };

  if (format == CsvFormat::clotho) {
    const std::size_t file_col = column(header, "file_name", path);
    std::vector<std::size_t> caption_cols;
    for (int k = 1; k <= 5; ++k) {
      const std::string name = "caption_" + std::to_string(k);
      if (k == 1 || std::find(header.begin(), header.end(), name) != header.end()) {
        caption_cols.push_back(column(header, name, path));
      }
    }
    for (std::size_t line = 1; line < rows.size(); ++line) {
      ClipRecord r;
      r.file_name = cell(rows[line], file_col, line + 1);
      r.clip_id = stem_of(r.file_name);
      r.split = split;
      for (std::size_t col : caption_cols) {
        r.captions.push_back(clean_cell(cell(rows[line], col, line + 1), path, line + 1));
      }
      if (!seen.emplace(r.clip_id, m.records.size()).second) {
        throw Error(Errc::malformed, path.string() + ": duplicate clip id '" + r.clip_id + "'");
      }
      m.records.push_back(std::move(r));
    }
  } else if (format == CsvFormat::audiocaps) {
    const std::size_t id_col = column(header, "youtube_id", path);
    const std::size_t cap_col = column(header, "caption", path);
    for (std::size_t line = 1; line < rows.size(); ++line) {
      const std::string id = cell(rows[line], id_col, line + 1);
      if (id.empty()) {
        throw Error(Errc::malformed, path.string() + " row " + std::to_string(line + 1) +
                                         ": empty youtube_id");
      }
      auto caption = clean_cell(cell(rows[line], cap_col, line + 1), path, line + 1);
      const auto [it, fresh] = seen.emplace(id, m.records.size());
      if (fresh) {
        ClipRecord r;
        r.clip_id = id;
        r.file_name = id + ".wav";
        r.split = split;
        m.records.push_back(std::move(r));
      }
      m.records[it->second].captions.push_back(std::move(caption));
    }
  } else {
    const std::size_t id_col = column(header, "clip_id", path);
    const std::size_t cap_col = column(header, "caption", path);
    for (std::size_t line = 1; line < rows.size(); ++line) {
      ClipRecord r;
      const std::string id = cell(rows[line], id_col, line + 1);
      if (id.empty()) {
        throw Error(Errc::malformed, path.string() + " row " + std::to_string(line + 1) +
                                         ": empty clip_id");
      }
      const bool has_ext = std::filesystem::path(id).has_extension();
      r.file_name = has_ext ? id : id + ".wav";
      r.clip_id = stem_of(r.file_name);
      r.split = split;
      r.captions.push_back(clean_cell(cell(rows[line], cap_col, line + 1), path, line + 1));
      if (!seen.emplace(r.clip_id, m.records.size()).second) {
        throw Error(Errc::malformed, path.string() + ": duplicate clip id '" + r.clip_id + "'");
      }
      m.records.push_back(std::move(r));
    }
  }
  return m;
}

void split_validation(DatasetManifest& manifest, double fraction) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw Error(Errc::invalid_argument, "validation fraction must lie in [0, 1)");
  }
  std::vector<ClipRecord*> dev;
  for (auto& r : manifest.records) {
    if (r.split == Split::development) dev.push_back(&r);
  }
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(dev.size())));
  for (std::size_t i = dev.size() - std::min(count, dev.size()); i < dev.size(); ++i) {
    dev[i]->split = Split::validation;
  }
}

std::vector<Pair> expand_pairs(const DatasetManifest& manifest, Split split) {
  std::vector<Pair> out;
  for (const auto& r : manifest.records) {
    if (r.split != split) continue;
    for (std::size_t c = 0; c < r.captions.size(); ++c) out.push_back({&r, c});
  }
  return out;
}

std::filesystem::path cache_path(const std::filesystem::path& cache_root,
                                 audio::FeatureVariant variant, std::string_view clip_id) {
  return cache_root / std::string(audio::to_string(variant)) / (std::string(clip_id) + ".emb");
}

std::filesystem::path source_path(const std::filesystem::path& media_root,
                                  audio::FeatureVariant variant, const ClipRecord& clip) {
  if (variant == audio::FeatureVariant::logmel) return media_root / clip.file_name;
  return media_root / (clip.clip_id + ".emb");
}

Eigen::MatrixXd compute_features(const std::filesystem::path& source,
                                 audio::FeatureVariant variant,
                                 const audio::LogMelConfig& config) {
  Eigen::MatrixXd values =
      variant == audio::FeatureVariant::logmel
          ? audio::extract_log_mel(audio::load_wav(source), config)
          : audio::load_embedding_file(source, audio::feature_dim(variant));
  return values.cast<float>().cast<double>();
}

namespace {

std::string settings_key(audio::FeatureVariant variant, const audio::LogMelConfig& c) {
  std::ostringstream s;
  s.precision(17);
  s << audio::to_string(variant);
  if (variant == audio::FeatureVariant::logmel) {
    s << ' ' << c.sample_rate << ' ' << c.clip_seconds << ' ' << c.window_ms << ' ' << c.overlap
      << ' ' << c.n_mels << ' ' << c.fmin << ' ' << c.fmax;
  }
  return s.str();
}

std::string read_small(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::string s;
  std::getline(in, s);
  return s;
}

void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_failure, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::io_failure, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

CacheReport cache_features(const DatasetManifest& manifest, audio::FeatureVariant variant,
                           const std::filesystem::path& media_root,
                           const std::filesystem::path& cache_root,
                           const audio::LogMelConfig& config) {
  CacheReport report;
  const std::string settings = settings_key(variant, config);
  std::filesystem::create_directories(cache_root / std::string(audio::to_string(variant)));
  for (const auto& clip : manifest.records) {
    const auto source = source_path(media_root, variant, clip);
    const auto target = cache_path(cache_root, variant, clip.clip_id);
    auto sidecar = target;
    sidecar += ".src";
    try {
      const std::string key = hex64(fnv1a64(read_file(source), fnv1a64(settings)));
      if (std::filesystem::exists(target) && read_small(sidecar) == key) {
        ++report.reused;
        continue;
      }
      const Eigen::MatrixXd values = compute_features(source, variant, config);
      std::ostringstream payload(std::ios::binary);
      emb::write(payload, values, emb::Precision::f32);
      write_atomic(target, payload.str());
      write_atomic(sidecar, key + "\n");
      ++report.computed;
    } catch (const std::exception& e) {
      report.errors.push_back({clip.clip_id, e.what()});
    }
  }
  return report;
}

Eigen::MatrixXd load_cached(const std::filesystem::path& cache_root, audio::FeatureVariant variant,
                            std::string_view clip_id) {
  const auto path = cache_path(cache_root, variant, clip_id);
  if (!std::filesystem::exists(path)) {
    throw Error(Errc::not_found, "no cached " + std::string(audio::to_string(variant)) +
                                     " features for clip '" + std::string(clip_id) + "' (" +
                                     path.string() + ")");
  }
  return emb::load(path, audio::feature_dim(variant));
}

}  // namespace aucap::dataset
