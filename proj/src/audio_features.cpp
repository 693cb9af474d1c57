#include "aucap/audio_features.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <vector>

#include "aucap/emb_io.hpp"
#include "aucap/error.hpp"

namespace aucap::audio {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t u32le(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}

std::uint16_t u16le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void put_u32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_u16(std::vector<unsigned char>& b, std::uint16_t v) {
  b.push_back(static_cast<unsigned char>(v));
  b.push_back(static_cast<unsigned char>(v >> 8));
}

double decode_sample(const unsigned char* p, std::uint16_t format, int bits) {
  if (format == kFormatFloat) {
    return static_cast<double>(std::bit_cast<float>(u32le(p)));
  }
  switch (bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16:
      return static_cast<std::int16_t>(u16le(p)) / 32768.0;
    case 24: {
      std::int32_t v = p[0] | p[1] << 8 | p[2] << 16;
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default:
      return static_cast<std::int32_t>(u32le(p)) / 2147483648.0;
  }
}

}  // namespace

Eigen::Index feature_dim(FeatureVariant variant) noexcept {
  switch (variant) {
    case FeatureVariant::logmel: return 64;
    case FeatureVariant::vggish: return 128;
    case FeatureVariant::panns: return 2048;
  }
  return 0;
}

std::string_view to_string(FeatureVariant variant) noexcept {
  switch (variant) {
    case FeatureVariant::logmel: return "logmel";
    case FeatureVariant::vggish: return "vggish";
    case FeatureVariant::panns: return "panns";
  }
  return "?";
}

FeatureVariant parse_variant(std::string_view name) {
  if (name == "logmel") return FeatureVariant::logmel;
  if (name == "vggish") return FeatureVariant::vggish;
  if (name == "panns") return FeatureVariant::panns;
  throw Error(Errc::invalid_argument, "unknown feature variant '" + std::string(name) +
                                          "' (expected logmel|vggish|panns)");
}

WaveBuffer load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::not_found, "wav file not found: " + path.string());
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  auto malformed = [&](const std::string& why) {
    return Error(Errc::malformed, path.string() + ": malformed WAV header (" + why + ")");
  };
  if (data.size() < 12 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
      std::memcmp(data.data() + 8, "WAVE", 4) != 0) {
    throw malformed("missing RIFF/WAVE signature");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  const unsigned char* payload = nullptr;
  std::size_t payload_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= data.size()) {
    const unsigned char* chunk = data.data() + pos;
    const std::uint32_t size = u32le(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > data.size()) throw malformed("short fmt chunk");
      const unsigned char* f = data.data() + body;
      format = u16le(f);
      channels = u16le(f + 2);
      rate = u32le(f + 4);
      block_align = u16le(f + 12);
      bits = u16le(f + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw malformed("short WAVE_FORMAT_EXTENSIBLE chunk");
        format = u16le(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      payload = data.data() + body;
      payload_size = std::min<std::size_t>(size, data.size() - body);
      break;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw malformed("no fmt chunk");
  if (payload == nullptr) throw malformed("no data chunk");
  if (rate == 0) throw malformed("zero sample rate");

  const bool int_ok = format == kFormatPcm && (bits == 8 || bits == 16 || bits == 24 || bits == 32);
  const bool float_ok = format == kFormatFloat && bits == 32;
  if (!int_ok && !float_ok) {
    throw Error(Errc::unsupported, path.string() + ": unsupported WAV encoding (format " +
                                       std::to_string(format) + ", " + std::to_string(bits) +
                                       " bits)");
  }
  if (channels != 1 && channels != 2) {
    throw Error(Errc::unsupported,
                path.string() + ": unsupported channel count " + std::to_string(channels));
  }
  const std::size_t bytes = bits / 8;
  if (block_align != bytes * channels) throw malformed("block_align inconsistent with format");

  const std::size_t frames = payload_size / block_align;
  WaveBuffer out;
  out.sample_rate = static_cast<int>(rate);
  out.samples.resize(static_cast<Eigen::Index>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    const unsigned char* p = payload + i * block_align;
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) acc += decode_sample(p + c * bytes, format, bits);
    const double v = acc / channels;
    if (!std::isfinite(v)) throw malformed("non-finite float sample");
    out.samples[static_cast<Eigen::Index>(i)] = v;
  }
  if (out.samples.size() == 0) throw Error(Errc::empty_input, path.string() + ": no samples");
  return out;
}

void write_wav(const std::filesystem::path& path, const WaveBuffer& buf, WavEncoding encoding) {
  const bool f32 = encoding == WavEncoding::float32;
  const std::uint16_t bits = f32 ? 32 : 16;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(buf.size()) * (bits / 8);
  std::vector<unsigned char> b;
  b.reserve(44 + data_bytes);
  b.insert(b.end(), {'R', 'I', 'F', 'F'});
  put_u32(b, 36 + data_bytes);
  b.insert(b.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(b, 16);
  put_u16(b, f32 ? kFormatFloat : kFormatPcm);
  put_u16(b, 1);
  put_u32(b, static_cast<std::uint32_t>(buf.sample_rate));
  put_u32(b, static_cast<std::uint32_t>(buf.sample_rate) * (bits / 8));
  put_u16(b, bits / 8);
  put_u16(b, bits);
  b.insert(b.end(), {'d', 'a', 't', 'a'});
  put_u32(b, data_bytes);
  for (Eigen::Index i = 0; i < buf.size(); ++i) {
    const double x = buf.samples[i];
    if (f32) {
      put_u32(b, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
    } else {
      const double q = std::clamp(std::round(x * 32768.0), -32768.0, 32767.0);
      put_u16(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_failure, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

WaveBuffer resample(const WaveBuffer& buf, int target_rate) {
  if (target_rate <= 0) throw Error(Errc::invalid_argument, "target rate must be positive");
  if (target_rate == buf.sample_rate) return buf;
  const Eigen::Index n = buf.size();
  const double ratio = static_cast<double>(buf.sample_rate) / target_rate;
  const auto out_len = static_cast<Eigen::Index>(
      std::llround(static_cast<double>(n) * target_rate / buf.sample_rate));
  WaveBuffer out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len);
  for (Eigen::Index i = 0; i < out_len; ++i) {
    const double pos = static_cast<double>(i) * ratio;
    const auto j = static_cast<Eigen::Index>(std::floor(pos));
    if (j + 1 >= n) {
      out.samples[i] = buf.samples[n - 1];
    } else {
      const double frac = pos - static_cast<double>(j);
      out.samples[i] = buf.samples[j] + frac * (buf.samples[j + 1] - buf.samples[j]);
    }
  }
  return out;
}

WaveBuffer zero_pad_or_truncate(const WaveBuffer& buf, double target_seconds) {
  if (!(target_seconds > 0)) throw Error(Errc::invalid_argument, "target_seconds must be positive");
  const auto target = static_cast<Eigen::Index>(std::llround(target_seconds * buf.sample_rate));
  WaveBuffer out;
  out.sample_rate = buf.sample_rate;
  out.samples = Eigen::VectorXd::Zero(target);
  const Eigen::Index keep = std::min(target, buf.size());
  out.samples.head(keep) = buf.samples.head(keep);
  return out;
}

Eigen::Index window_length(int sample_rate, double window_ms) {
  return static_cast<Eigen::Index>(std::llround(window_ms / 1000.0 * sample_rate));
}

Eigen::Index frame_count(Eigen::Index length, Eigen::Index window, Eigen::Index hop) {
  if (length < window) return 0;
  return (length - window) / hop + 1;
}

Eigen::Index fft_size_for(Eigen::Index window) {
  Eigen::Index n = 1;
  while (n < window) n <<= 1;
  return n;
}

Eigen::VectorXd hamming_window(Eigen::Index length) {
  if (length == 1) return Eigen::VectorXd::Ones(1);
  Eigen::VectorXd w(length);
  for (Eigen::Index i = 0; i < length; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(length - 1));
  }
  return w;
}

Eigen::MatrixXd frame_signal(const WaveBuffer& buf, double window_ms, double overlap) {
  const Eigen::Index w = window_length(buf.sample_rate, window_ms);
  const auto hop = static_cast<Eigen::Index>(std::llround(static_cast<double>(w) * (1.0 - overlap)));
  if (w < 1 || hop < 1) throw Error(Errc::invalid_argument, "degenerate framing parameters");
  if (buf.size() < w) {
    throw Error(Errc::invalid_argument, "buffer of " + std::to_string(buf.size()) +
                                            " samples is shorter than one " + std::to_string(w) +
                                            "-sample window");
  }
  const Eigen::Index t = frame_count(buf.size(), w, hop);
  const Eigen::RowVectorXd window = hamming_window(w).transpose();
  Eigen::MatrixXd frames(t, w);
  for (Eigen::Index i = 0; i < t; ++i) {
    frames.row(i) = buf.samples.segment(i * hop, w).transpose().cwiseProduct(window);
  }
  return frames;
}

Eigen::MatrixXd power_spectrum(const Eigen::MatrixXd& frames) {
  if (frames.rows() == 0 || frames.cols() == 0) {
    throw Error(Errc::empty_input, "power_spectrum: no frames");
  }
  const Eigen::Index n_fft = fft_size_for(frames.cols());
  const Eigen::Index n_bins = n_fft / 2 + 1;
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> in(static_cast<std::size_t>(n_fft), 0.0);
  std::vector<std::complex<double>> out;
  Eigen::MatrixXd power(frames.rows(), n_bins);
  if (n_fft == 1) return frames.array().square().matrix();
  for (Eigen::Index r = 0; r < frames.rows(); ++r) {
    std::fill(in.begin(), in.end(), 0.0);
    for (Eigen::Index c = 0; c < frames.cols(); ++c) in[static_cast<std::size_t>(c)] = frames(r, c);
    fft.fwd(out, in);
    for (Eigen::Index k = 0; k < n_bins; ++k) power(r, k) = std::norm(out[static_cast<std::size_t>(k)]);
  }
  return power;
}

double hz_to_mel(double hz) noexcept { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) noexcept { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank MelFilterbank::make(int sample_rate, Eigen::Index n_fft, Eigen::Index n_mels,
                                  double fmin, double fmax) {
  if (n_mels < 1 || n_fft < 2 || sample_rate <= 0 || fmin < 0 || fmax <= fmin ||
      fmax > sample_rate / 2.0) {
    throw Error(Errc::invalid_argument, "invalid mel filterbank parameters");
  }
  const Eigen::Index n_bins = n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);
  Eigen::VectorXd edges(n_mels + 2);
  for (Eigen::Index i = 0; i < n_mels + 2; ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                      static_cast<double>(n_mels + 1));
  }
  MelFilterbank fb;
  fb.fmin = fmin;
  fb.fmax = fmax;
  fb.weights = Eigen::MatrixXd::Zero(n_mels, n_bins);
  fb.center_hz = edges.segment(1, n_mels);
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(n_fft);
  for (Eigen::Index m = 0; m < n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (Eigen::Index k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      const double up = (f - lo) / (mid - lo);
      const double down = (hi - f) / (hi - mid);
      fb.weights(m, k) = std::max(0.0, std::min(up, down));
    }
    if (!(fb.weights.row(m).sum() > 0.0)) {
      throw Error(Errc::invalid_argument, "mel band " + std::to_string(m) +
                                              " covers no FFT bin; lower n_mels or raise n_fft");
    }
  }
  return fb;
}

Eigen::MatrixXd apply_log_mel(const Eigen::MatrixXd& power, const MelFilterbank& fb) {
  if (power.cols() != fb.n_bins()) {
    throw Error(Errc::dimension_mismatch, "power spectrum has " + std::to_string(power.cols()) +
                                              " bins, filterbank expects " +
                                              std::to_string(fb.n_bins()));
  }
  return (power * fb.weights.transpose()).cwiseMax(kLogFloor).array().log().matrix();
}

Eigen::MatrixXd extract_log_mel(const WaveBuffer& wave, const LogMelConfig& config) {
  const WaveBuffer fixed =
      zero_pad_or_truncate(resample(wave, config.sample_rate), config.clip_seconds);
  const Eigen::MatrixXd frames = frame_signal(fixed, config.window_ms, config.overlap);
  const auto fb = MelFilterbank::make(config.sample_rate, fft_size_for(frames.cols()),
                                      config.n_mels, config.fmin, config.fmax);
  return apply_log_mel(power_spectrum(frames), fb);
}

Eigen::MatrixXd load_embedding_file(const std::filesystem::path& path, Eigen::Index expected_dim) {
  Eigen::MatrixXd m = emb::load(path, expected_dim);
  if (expected_dim == feature_dim(FeatureVariant::panns) && m.rows() != 1) {
    throw Error(Errc::malformed, path.string() + ": PANNs embedding files hold exactly one row, found " +
                                     std::to_string(m.rows()));
  }
  if (m.rows() == 0) throw Error(Errc::empty_input, path.string() + ": no embedding rows");
  return m;
}

}  // namespace aucap::audio
