#pragma once

// Audio front end: WAV ingestion, resampling, fixed-length padding, Hamming
// framing, power spectra and 64-band log-Mel energies. Precomputed VGGish and
// PANNs embeddings are ingested from AUCAP-EMB files.

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <string_view>

namespace aucap::audio {

/// Mono samples in [-1, 1] at sample_rate Hz.
struct WaveBuffer {
  Eigen::VectorXd samples;
  int sample_rate = 0;

  Eigen::Index size() const { return samples.size(); }
};

enum class FeatureVariant { logmel, vggish, panns };

/// Per-row feature width: 64 log-Mel bands, 128 VGGish, 2048 PANNs.
Eigen::Index feature_dim(FeatureVariant variant) noexcept;
std::string_view to_string(FeatureVariant variant) noexcept;
FeatureVariant parse_variant(std::string_view name);

enum class WavEncoding { pcm16, float32 };

/// Reads RIFF/WAVE PCM (8/16/24/32-bit integer or 32-bit float), mono or
/// stereo. Stereo is averaged to mono.
/// Errors: Errc::not_found, Errc::malformed, Errc::unsupported.
WaveBuffer load_wav(const std::filesystem::path& path);

void write_wav(const std::filesystem::path& path, const WaveBuffer& buf,
               WavEncoding encoding = WavEncoding::pcm16);

/// Linear interpolation. Output length round(n * target / source).
WaveBuffer resample(const WaveBuffer& buf, int target_rate);

/// Pads with trailing zeros or truncates to round(target_seconds * rate).
WaveBuffer zero_pad_or_truncate(const WaveBuffer& buf, double target_seconds);

Eigen::Index window_length(int sample_rate, double window_ms = 96.0);
Eigen::Index frame_count(Eigen::Index length, Eigen::Index window, Eigen::Index hop);
/// Smallest power of two >= window.
Eigen::Index fft_size_for(Eigen::Index window);

/// Symmetric Hamming window, 0.54 - 0.46 cos(2 pi n / (W - 1)).
Eigen::VectorXd hamming_window(Eigen::Index length);

/// T x W matrix of Hamming-weighted frames; hop = W * (1 - overlap).
Eigen::MatrixXd frame_signal(const WaveBuffer& buf, double window_ms = 96.0,
                             double overlap = 0.5);

/// |rfft|^2 of every row, zero-padded to fft_size_for(cols). T x (n_fft/2 + 1).
Eigen::MatrixXd power_spectrum(const Eigen::MatrixXd& frames);

double hz_to_mel(double hz) noexcept;
double mel_to_hz(double mel) noexcept;

/// Triangular HTK-scale filters. weights is n_mels x n_bins.
struct MelFilterbank {
  Eigen::MatrixXd weights;
  Eigen::VectorXd center_hz;
  double fmin = 125.0;
  double fmax = 7500.0;

  static MelFilterbank make(int sample_rate, Eigen::Index n_fft, Eigen::Index n_mels = 64,
                            double fmin = 125.0, double fmax = 7500.0);

  Eigen::Index n_mels() const { return weights.rows(); }
  Eigen::Index n_bins() const { return weights.cols(); }
};

inline constexpr double kLogFloor = 1e-10;

/// ln(max(power * fb^T, 1e-10)). Errc::dimension_mismatch on a bin-count mismatch.
Eigen::MatrixXd apply_log_mel(const Eigen::MatrixXd& power, const MelFilterbank& fb);

struct LogMelConfig {
  int sample_rate = 16000;
  double clip_seconds = 30.0;
  double window_ms = 96.0;
  double overlap = 0.5;
  Eigen::Index n_mels = 64;
  double fmin = 125.0;
  double fmax = 7500.0;
};

/// resample -> pad/truncate -> frame -> power spectrum -> log-Mel. T x 64.
Eigen::MatrixXd extract_log_mel(const WaveBuffer& wave, const LogMelConfig& config = {});

/// Loads a precomputed embedding file and checks its width. PANNs files must
/// hold exactly one row; VGGish files one row per second.
Eigen::MatrixXd load_embedding_file(const std::filesystem::path& path,
                                    Eigen::Index expected_dim);

}  // namespace aucap::audio
