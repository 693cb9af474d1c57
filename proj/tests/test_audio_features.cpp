#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "aucap/audio_features.hpp"
#include "aucap/emb_io.hpp"
#include "aucap/error.hpp"
#include "aucap/random.hpp"
#include "test_util.hpp"

using namespace aucap;
using namespace aucap::audio;
using testutil::TempDir;

namespace {

Errc error_code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::io_failure;
}

WaveBuffer sine(double hz, int rate, Eigen::Index n, double amp = 0.5) {
  WaveBuffer w;
  w.sample_rate = rate;
  w.samples.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w.samples(i) = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate);
  }
  return w;
}

// O(n^2) DFT of a zero-padded frame, power per bin 0..n_fft/2.
Eigen::VectorXd dft_power(const Eigen::VectorXd& frame, Eigen::Index n_fft) {
  Eigen::VectorXd out(n_fft / 2 + 1);
  for (Eigen::Index k = 0; k <= n_fft / 2; ++k) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index n = 0; n < frame.size(); ++n) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k * n) / static_cast<double>(n_fft);
      acc += frame(n) * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out(k) = std::norm(acc);
  }
  return out;
}

}  // namespace

TEST(LoadWav, Pcm16ScalingFromHandWrittenFixture) {
  TempDir dir("wav");
  // samples 0, 32767, -32768, 16384
  const std::vector<std::uint8_t> data{0x00, 0x00, 0xff, 0x7f, 0x00, 0x80, 0x00, 0x40};
  testutil::write_bytes(dir / "a.wav", testutil::wav_bytes(1, 1, 16000, 16, data));
  const WaveBuffer w = load_wav(dir / "a.wav");
  ASSERT_EQ(w.size(), 4);
  EXPECT_EQ(w.sample_rate, 16000);
  EXPECT_EQ(w.samples(0), 0.0);
  EXPECT_DOUBLE_EQ(w.samples(1), 32767.0 / 32768.0);
  EXPECT_DOUBLE_EQ(w.samples(2), -1.0);
  EXPECT_DOUBLE_EQ(w.samples(3), 0.5);
}

TEST(LoadWav, SilenceLoadsAsZeros) {
  TempDir dir("wav");
  testutil::write_bytes(dir / "s.wav",
                        testutil::wav_bytes(1, 1, 8000, 16, std::vector<std::uint8_t>(200, 0)));
  const WaveBuffer w = load_wav(dir / "s.wav");
  EXPECT_EQ(w.size(), 100);
  EXPECT_TRUE(w.samples.isZero());
}

TEST(LoadWav, StereoIsAveraged) {
  TempDir dir("wav");
  // float32 frames (+0.5, -0.5), (0.25, 0.75)
  std::vector<std::uint8_t> data;
  for (float f : {0.5f, -0.5f, 0.25f, 0.75f}) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    testutil::put_u32(data, bits);
  }
  testutil::write_bytes(dir / "st.wav", testutil::wav_bytes(3, 2, 16000, 32, data));
  const WaveBuffer w = load_wav(dir / "st.wav");
  ASSERT_EQ(w.size(), 2);
  EXPECT_EQ(w.samples(0), 0.0);
  EXPECT_DOUBLE_EQ(w.samples(1), 0.5);
}

TEST(LoadWav, IntegerDepths) {
  TempDir dir("wav");
  testutil::write_bytes(dir / "u8.wav", testutil::wav_bytes(1, 1, 8000, 8, {128, 255, 0}));
  const WaveBuffer a = load_wav(dir / "u8.wav");
  EXPECT_EQ(a.samples(0), 0.0);
  EXPECT_DOUBLE_EQ(a.samples(1), 127.0 / 128.0);
  EXPECT_DOUBLE_EQ(a.samples(2), -1.0);

  // 24-bit: 0x400000 = 2^22 -> 0.5
  testutil::write_bytes(dir / "i24.wav", testutil::wav_bytes(1, 1, 8000, 24, {0x00, 0x00, 0x40}));
  EXPECT_DOUBLE_EQ(load_wav(dir / "i24.wav").samples(0), 0.5);
}

TEST(LoadWav, ErrorsAreDistinct) {
  TempDir dir("wav");
  EXPECT_EQ(error_code_of([&] { load_wav(dir / "nope.wav"); }), Errc::not_found);
  testutil::write_text(dir / "junk.wav", "this is not a wav file at all");
  EXPECT_EQ(error_code_of([&] { load_wav(dir / "junk.wav"); }), Errc::malformed);
  // a-law (format tag 6)
  testutil::write_bytes(dir / "alaw.wav", testutil::wav_bytes(6, 1, 8000, 8, {1, 2, 3}));
  EXPECT_EQ(error_code_of([&] { load_wav(dir / "alaw.wav"); }), Errc::unsupported);
}

TEST(LoadWav, WriteReadRoundTrip) {
  TempDir dir("wav");
  const WaveBuffer w = sine(440, 16000, 1000);
  write_wav(dir / "f.wav", w, WavEncoding::float32);
  const WaveBuffer f = load_wav(dir / "f.wav");
  EXPECT_EQ(f.samples, w.samples.cast<float>().cast<double>());
  write_wav(dir / "p.wav", w, WavEncoding::pcm16);
  EXPECT_LT((load_wav(dir / "p.wav").samples - w.samples).cwiseAbs().maxCoeff(), 1.0 / 32768.0);
}

TEST(Resample, IdentityLengthAndConstant) {
  Rng rng(1);
  WaveBuffer w;
  w.sample_rate = 16000;
  w.samples = normal_matrix(500, 1, 0.2, rng);
  const WaveBuffer same = resample(w, 16000);
  EXPECT_EQ(same.samples, w.samples);

  WaveBuffer hi;
  hi.sample_rate = 32000;
  hi.samples = Eigen::VectorXd::Constant(320, 0.3);
  const WaveBuffer lo = resample(hi, 16000);
  EXPECT_EQ(lo.sample_rate, 16000);
  EXPECT_EQ(lo.size(), 160);
  EXPECT_TRUE(lo.samples.isApproxToConstant(0.3, 1e-12));
  const WaveBuffer up = resample(hi, 44100);
  EXPECT_EQ(up.size(), std::lround(320 * 44100.0 / 32000.0));
  EXPECT_TRUE(up.samples.isApproxToConstant(0.3, 1e-12));
}

TEST(ZeroPad, PadsAndTruncates) {
  WaveBuffer w;
  w.sample_rate = 16000;
  w.samples = Eigen::VectorXd::Ones(15 * 16000);
  const WaveBuffer p = zero_pad_or_truncate(w, 30.0);
  ASSERT_EQ(p.size(), 480000);
  EXPECT_TRUE(p.samples.head(240000).isOnes());
  EXPECT_TRUE(p.samples.tail(240000).isZero());

  w.samples = Eigen::VectorXd::LinSpaced(31 * 16000, 0.0, 1.0);
  const WaveBuffer t = zero_pad_or_truncate(w, 30.0);
  ASSERT_EQ(t.size(), 480000);
  EXPECT_EQ(t.samples, w.samples.head(480000));

  w.samples = Eigen::VectorXd::Ones(480000);
  EXPECT_EQ(zero_pad_or_truncate(w, 30.0).samples, w.samples);
}

TEST(Framing, ThirtySecondClipHas624Frames) {
  EXPECT_EQ(window_length(16000), 1536);
  EXPECT_EQ(frame_count(480000, 1536, 768), 624);
  WaveBuffer w;
  w.sample_rate = 16000;
  w.samples = Eigen::VectorXd::Zero(480000);
  const Eigen::MatrixXd f = frame_signal(w);
  EXPECT_EQ(f.rows(), 624);
  EXPECT_EQ(f.cols(), 1536);
}

TEST(Framing, FrameCountFormulaProperty) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const int rate = 8000 + static_cast<int>(uniform01(rng) * 40000);
    const Eigen::Index W = window_length(rate);
    const Eigen::Index H = W / 2;
    const Eigen::Index len = W + static_cast<Eigen::Index>(uniform01(rng) * 20 * W);
    // oracle: count start offsets s with s + W <= len, stepping by H
    Eigen::Index count = 0;
    for (Eigen::Index s = 0; s + W <= len; s += H) ++count;
    ASSERT_EQ(frame_count(len, W, H), count) << "rate " << rate << " len " << len;
    ASSERT_EQ(count, (len - W) / H + 1);
  }
}

TEST(Framing, BoundaryAndWindowShape) {
  WaveBuffer w;
  w.sample_rate = 16000;
  w.samples = Eigen::VectorXd::Ones(1536);
  const Eigen::MatrixXd f = frame_signal(w);
  ASSERT_EQ(f.rows(), 1);
  const Eigen::VectorXd ham = hamming_window(1536);
  EXPECT_EQ(Eigen::VectorXd(f.row(0).transpose()), ham);
  EXPECT_NEAR(ham(0), 0.08, 1e-15);
  EXPECT_NEAR(ham(1535), 0.08, 1e-15);

  w.samples = Eigen::VectorXd::Ones(1535);
  EXPECT_EQ(error_code_of([&] { frame_signal(w); }), Errc::invalid_argument);
}

TEST(PowerSpectrum, MatchesBruteForceDft) {
  Rng rng(5);
  for (Eigen::Index n : {1, 2, 3, 7, 16, 31, 33, 64}) {
    const Eigen::MatrixXd frames = normal_matrix(3, n, 1.0, rng);
    const Eigen::MatrixXd p = power_spectrum(frames);
    const Eigen::Index n_fft = fft_size_for(n);
    ASSERT_EQ(p.cols(), n_fft / 2 + 1);
    for (Eigen::Index r = 0; r < 3; ++r) {
      const Eigen::VectorXd oracle = dft_power(frames.row(r).transpose(), n_fft);
      EXPECT_LT((p.row(r).transpose() - oracle).cwiseAbs().maxCoeff(), 1e-9) << "n=" << n;
    }
  }
}

TEST(PowerSpectrum, ZeroFrameAndSinePeak) {
  EXPECT_TRUE(power_spectrum(Eigen::MatrixXd::Zero(1, 1536)).isZero());

  const WaveBuffer w = sine(1000.0, 16000, 1536);
  const Eigen::MatrixXd frames = frame_signal(w);
  const Eigen::MatrixXd p = power_spectrum(frames);
  EXPECT_EQ(p.cols(), 1025);
  Eigen::Index peak;
  p.row(0).maxCoeff(&peak);
  EXPECT_EQ(peak, std::lround(1000.0 * 2048 / 16000));
  EXPECT_EQ(peak, 128);
}

TEST(PowerSpectrum, Parseval) {
  Rng rng(8);
  const Eigen::MatrixXd frames = normal_matrix(4, 1536, 1.0, rng);
  const Eigen::MatrixXd p = power_spectrum(frames);
  const Eigen::Index n_fft = 2048;
  for (Eigen::Index r = 0; r < frames.rows(); ++r) {
    // full spectrum sum = bins 0 and N/2 once, the others twice
    const double spec = 2.0 * p.row(r).sum() - p(r, 0) - p(r, n_fft / 2);
    const double energy = static_cast<double>(n_fft) * frames.row(r).squaredNorm();
    EXPECT_NEAR(spec / energy, 1.0, 1e-6);
  }
}

TEST(MelFilterbank, StructuralInvariants) {
  const MelFilterbank fb = MelFilterbank::make(16000, 2048);
  ASSERT_EQ(fb.n_mels(), 64);
  ASSERT_EQ(fb.n_bins(), 1025);
  EXPECT_GE(fb.weights.minCoeff(), 0.0);
  Eigen::Index prev_lo = -1, prev_hi = -1;
  for (Eigen::Index m = 0; m < 64; ++m) {
    const auto row = fb.weights.row(m);
    EXPECT_GT(row.sum(), 0.0);
    // unimodal: non-decreasing up to the peak, non-increasing after
    Eigen::Index peak;
    row.maxCoeff(&peak);
    for (Eigen::Index k = 1; k <= peak; ++k) EXPECT_GE(row(k), row(k - 1));
    for (Eigen::Index k = peak + 1; k < row.size(); ++k) EXPECT_LE(row(k), row(k - 1));
    Eigen::Index lo = 0, hi = row.size() - 1;
    while (row(lo) == 0.0) ++lo;
    while (row(hi) == 0.0) --hi;
    if (m > 0) {
      EXPECT_GT(fb.center_hz(m), fb.center_hz(m - 1));
      EXPECT_GE(lo, prev_lo);
      EXPECT_GE(hi, prev_hi);
      EXPECT_LE(lo, prev_hi);  // neighbouring supports overlap
    }
    prev_lo = lo;
    prev_hi = hi;
  }
  EXPECT_GE(fb.center_hz(0), 125.0);
  EXPECT_LE(fb.center_hz(63), 7500.0);
}

TEST(MelScale, HtkFormula) {
  EXPECT_NEAR(hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-12);
  EXPECT_NEAR(mel_to_hz(hz_to_mel(1234.5)), 1234.5, 1e-9);
}

TEST(LogMel, FloorLogLawAndDimension) {
  const MelFilterbank fb = MelFilterbank::make(16000, 2048);
  const Eigen::MatrixXd zero = apply_log_mel(Eigen::MatrixXd::Zero(3, 1025), fb);
  EXPECT_TRUE(zero.isConstant(std::log(1e-10)));

  Rng rng(2);
  const Eigen::MatrixXd p = uniform_matrix(5, 1025, 0.0, 1.0, rng);
  const Eigen::MatrixXd a = apply_log_mel(p, fb);
  const Eigen::MatrixXd b = apply_log_mel(2.0 * p, fb);
  const Eigen::MatrixXd raw = p * fb.weights.transpose();
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (raw(i) > kLogFloor) {
      EXPECT_NEAR(b(i) - a(i), std::log(2.0), 1e-12);
    }
  }
  EXPECT_EQ(error_code_of([&] { apply_log_mel(Eigen::MatrixXd::Zero(2, 100), fb); }),
            Errc::dimension_mismatch);
}

TEST(LogMel, SinePeaksInNearestBand) {
  const WaveBuffer w = sine(1000.0, 16000, 16000);
  const MelFilterbank fb = MelFilterbank::make(16000, 2048);
  const Eigen::MatrixXd lm = apply_log_mel(power_spectrum(frame_signal(w)), fb);
  Eigen::Index nearest;
  (fb.center_hz.array() - 1000.0).abs().minCoeff(&nearest);
  for (Eigen::Index r = 0; r < lm.rows(); ++r) {
    Eigen::Index band;
    lm.row(r).maxCoeff(&band);
    EXPECT_EQ(band, nearest);
  }
}

TEST(LogMel, TrailingSilenceBeyondPadTargetIsIgnored) {
  LogMelConfig cfg;
  cfg.clip_seconds = 2.0;
  WaveBuffer w = sine(500.0, 16000, 20000);
  const Eigen::MatrixXd a = extract_log_mel(w, cfg);
  w.samples.conservativeResize(40000);
  w.samples.tail(20000).setZero();
  const Eigen::MatrixXd b = extract_log_mel(w, cfg);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.rows(), frame_count(32000, 1536, 768));
  EXPECT_EQ(a.cols(), 64);
  EXPECT_TRUE(a.allFinite());
}

TEST(LogMel, ResamplesToConfiguredRate) {
  LogMelConfig cfg;
  cfg.clip_seconds = 1.0;
  const Eigen::MatrixXd a = extract_log_mel(sine(440.0, 22050, 22050), cfg);
  EXPECT_EQ(a.rows(), frame_count(16000, 1536, 768));
}

TEST(EmbeddingFiles, PannsAndVggish) {
  TempDir dir("embf");
  emb::save(dir / "p.emb", Eigen::MatrixXd::Constant(1, 2048, 0.25));
  const Eigen::MatrixXd p = load_embedding_file(dir / "p.emb", 2048);
  EXPECT_EQ(p.rows(), 1);
  EXPECT_EQ(p.cols(), 2048);
  emb::save(dir / "v.emb", Eigen::MatrixXd::Zero(30, 128));
  EXPECT_EQ(load_embedding_file(dir / "v.emb", 128).rows(), 30);
  EXPECT_EQ(error_code_of([&] { load_embedding_file(dir / "v.emb", 2048); }),
            Errc::dimension_mismatch);
  emb::save(dir / "p2.emb", Eigen::MatrixXd::Zero(2, 2048));
  EXPECT_EQ(error_code_of([&] { load_embedding_file(dir / "p2.emb", 2048); }), Errc::malformed);
  testutil::write_text(dir / "bad.emb", "AUCAP-EMB v1 dim=abc rows=1\n");
  EXPECT_EQ(error_code_of([&] { load_embedding_file(dir / "bad.emb", 128); }), Errc::malformed);
}

TEST(Variants, NamesAndDims) {
  EXPECT_EQ(feature_dim(FeatureVariant::logmel), 64);
  EXPECT_EQ(feature_dim(FeatureVariant::vggish), 128);
  EXPECT_EQ(feature_dim(FeatureVariant::panns), 2048);
  EXPECT_EQ(parse_variant("panns"), FeatureVariant::panns);
  EXPECT_THROW(parse_variant("mfcc"), Error);
}
