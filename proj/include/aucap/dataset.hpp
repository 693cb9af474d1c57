#pragma once

// Caption tables, clip/caption pair expansion and the per-clip feature cache.

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "aucap/audio_features.hpp"
#include "aucap/text_corpus.hpp"

namespace aucap::dataset {

enum class Split { development, validation, evaluation };
enum class CsvFormat { clotho, audiocaps, generic };

std::string_view to_string(Split split) noexcept;
Split parse_split(std::string_view name);
std::string_view to_string(CsvFormat format) noexcept;
CsvFormat parse_format(std::string_view name);

struct ClipRecord {
  std::string clip_id;    // file name without extension
  std::string file_name;  // audio file name relative to the media root
  std::vector<text::TokenizedCaption> captions;
  Split split = Split::development;
};

struct DatasetManifest {
  CsvFormat format = CsvFormat::generic;
  std::vector<ClipRecord> records;

  std::vector<const ClipRecord*> in_split(Split split) const;
};

/// RFC 4180 rows: quoted fields, doubled quotes, CRLF or LF line ends.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Layouts (header row required):
///   clotho     file_name,caption_1..caption_5
///   audiocaps  ...,youtube_id,...,caption   (rows of one youtube_id merge)
///   generic    clip_id,caption
/// Captions are cleaned on load. Errors: Errc::malformed for missing columns,
/// duplicate clip ids or empty caption cells.
DatasetManifest load_caption_csv(const std::filesystem::path& path, CsvFormat format,
                                 Split split = Split::development);

/// Moves the trailing fraction of development records to validation.
void split_validation(DatasetManifest& manifest, double fraction = 0.1);

struct Pair {
  const ClipRecord* clip = nullptr;
  std::size_t caption = 0;
  const text::TokenizedCaption& text() const { return clip->captions[caption]; }
};

/// One pair per (clip, caption), clip order then caption order.
std::vector<Pair> expand_pairs(const DatasetManifest& manifest, Split split);

struct CacheError {
  std::string clip_id;
  std::string message;
};

struct CacheReport {
  std::size_t computed = 0;
  std::size_t reused = 0;
  std::vector<CacheError> errors;
};

/// <cache_root>/<variant>/<clip_id>.emb
std::filesystem::path cache_path(const std::filesystem::path& cache_root,
                                 audio::FeatureVariant variant, std::string_view clip_id);

/// Source file for a clip: the WAV for log-Mel, <clip_id>.emb otherwise.
std::filesystem::path source_path(const std::filesystem::path& media_root,
                                  audio::FeatureVariant variant, const ClipRecord& clip);

/// Computes or validates features for every record and stores them as
/// AUCAP-EMB f32 files. A sidecar holds a hash of the source bytes and the
/// extraction settings; entries whose hash still matches are left alone.
/// Per-clip failures are collected, not thrown.
CacheReport cache_features(const DatasetManifest& manifest, audio::FeatureVariant variant,
                           const std::filesystem::path& media_root,
                           const std::filesystem::path& cache_root,
                           const audio::LogMelConfig& config = {});

/// Features of one clip as stored (f32-rounded). Errc::not_found when the
/// clip has not been cached.
Eigen::MatrixXd load_cached(const std::filesystem::path& cache_root,
                            audio::FeatureVariant variant, std::string_view clip_id);

/// The same matrix cache_features would store, computed directly.
Eigen::MatrixXd compute_features(const std::filesystem::path& source,
                                 audio::FeatureVariant variant,
                                 const audio::LogMelConfig& config = {});

}  // namespace aucap::dataset
