// Copyright 2026 The speechcmd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <chrono>
#include <cmath>
#include <complex>
#include <numbers>
#include <thread>

#include "doctest.h"
#include "fixtures.hpp"
#include "speechcmd/dsp.hpp"
#include "speechcmd/errors.hpp"
#include "speechcmd/fft.hpp"
#include "speechcmd/rng.hpp"

using namespace speechcmd;

namespace {

// O(N^2) reference: |sum_n x[n] w[n] e^{-j 2 pi k n / N}|^2, written
// independently of FftPlan and hann_window.
std::vector<double> direct_power(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<long double> w(n), c(n), s(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5L * (1.0L - std::cos(2.0L * std::numbers::pi_v<long double> * i / (n - 1)));
    const long double ang = -2.0L * std::numbers::pi_v<long double> * i / n;
    c[i] = std::cos(ang);
    s[i] = std::sin(ang);
  }
  std::vector<double> out(n / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    long double re = 0, im = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (k * i) % n;
      re += x[i] * w[i] * c[j];
      im += x[i] * w[i] * s[j];
    }
    out[k] = static_cast<double>(re * re + im * im);
  }
  return out;
}

std::size_t peak_bin(const AudioClip& clip, std::size_t n_fft) {
  // Peak of a direct DFT over the first n_fft samples.
  std::size_t best = 0;
  double best_mag = -1.0;
  for (std::size_t k = 1; k < n_fft / 2; ++k) {
    double re = 0, im = 0;
    for (std::size_t i = 0; i < n_fft; ++i) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(k * i) / static_cast<double>(n_fft);
      re += clip.samples[i] * std::cos(ang);
      im += clip.samples[i] * std::sin(ang);
    }
    if (re * re + im * im > best_mag) {
      best_mag = re * re + im * im;
      best = k;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("FftPlan matches a direct DFT for awkward lengths") {
  SplitMix64 rng(11);
  for (std::size_t n : {1u, 2u, 3u, 7u, 12u, 49u, 97u, 400u}) {
    std::vector<std::complex<double>> x(n), y(n);
    for (auto& v : x) v = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    FftPlan(n).forward(x, y);
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<double> ref = 0;
      for (std::size_t i = 0; i < n; ++i)
        ref += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((k * i) % n) / static_cast<double>(n));
      CHECK(std::abs(y[k] - ref) < 1e-9 * (1.0 + std::abs(ref)));
    }
  }
}

TEST_CASE("FrameConfig derives 400/160 at 16 kHz") {
  FrameConfig cfg;
  CHECK(cfg.frame_len() == 400);
  CHECK(cfg.hop_len() == 160);
  CHECK(frames_per_segment(cfg) == 98);
  FrameConfig bad;
  bad.hop_duration_s = 0.03;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("resample") {
  SUBCASE("equal rates are the bitwise identity") {
    SplitMix64 rng(3);
    AudioClip clip{std::vector<float>(1234), 16000};
    for (auto& s : clip.samples) s = static_cast<float>(rng.uniform(-1, 1));
    const AudioClip out = resample(clip, 16000);
    CHECK(out.sample_rate == 16000);
    CHECK(out.samples == clip.samples);
  }
  SUBCASE("48 kHz second becomes 16000 samples") {
    const AudioClip out = resample(AudioClip{std::vector<float>(48000, 0.1f), 48000}, 16000);
    CHECK(out.samples.size() == 16000);
    CHECK(out.sample_rate == 16000);
  }
  SUBCASE("output length rounds len * target / source") {
    CHECK(resample(AudioClip{std::vector<float>(1000, 0.f), 44100}, 16000).samples.size() == 363);
    CHECK(resample(AudioClip{std::vector<float>(1000, 0.f), 8000}, 16000).samples.size() == 2000);
  }
  SUBCASE("440 Hz tone at 44.1 kHz keeps its spectral peak") {
    const AudioClip tone = testing::synth_tone(440.0, 1.0, 44100, 0.5);
    const AudioClip out = resample(tone, 16000);
    // 16000-point DFT has 1 Hz bins.
    const std::size_t peak = peak_bin(out, 16000);
    CHECK(std::abs(static_cast<double>(peak) - 440.0) <= 1.0);
  }
  SUBCASE("upsampling preserves a low tone's amplitude") {
    const AudioClip tone = testing::synth_tone(300.0, 0.5, 8000, 0.5);
    const AudioClip out = resample(tone, 16000);
    float peak = 0;
    for (std::size_t i = 1000; i + 1000 < out.samples.size(); ++i) peak = std::max(peak, std::abs(out.samples[i]));
    CHECK(peak == doctest::Approx(0.5).epsilon(0.01));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(resample(AudioClip{{}, 16000}, 16000), InvalidInput);
    CHECK_THROWS_AS(resample(AudioClip{{0.f}, 16000}, 0), InvalidInput);
  }
}

TEST_CASE("pad_or_trim") {
  SUBCASE("exact second unchanged") {
    AudioClip clip{std::vector<float>(16000, 0.25f), 16000};
    const auto segs = pad_or_trim(clip);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].samples == clip.samples);
  }
  SUBCASE("short clip centered with 2000 zeros on each side") {
    const auto segs = pad_or_trim(AudioClip{std::vector<float>(12000, 1.0f), 16000});
    REQUIRE(segs.size() == 1);
    const auto& s = segs[0].samples;
    REQUIRE(s.size() == 16000);
    CHECK(s[1999] == 0.0f);
    CHECK(s[2000] == 1.0f);
    CHECK(s[13999] == 1.0f);
    CHECK(s[14000] == 0.0f);
  }
  SUBCASE("40000 samples become three segments, last padded from 8000") {
    AudioClip clip{std::vector<float>(40000), 16000};
    for (std::size_t i = 0; i < clip.samples.size(); ++i) clip.samples[i] = static_cast<float>(i % 7 + 1);
    const auto segs = pad_or_trim(clip);
    REQUIRE(segs.size() == 3);
    CHECK(segs[1].samples[0] == clip.samples[16000]);
    CHECK(segs[2].samples[7999] == clip.samples[39999]);
    CHECK(segs[2].samples[8000] == 0.0f);
    CHECK(segs[2].samples[15999] == 0.0f);
  }
  SUBCASE("empty input gives one silent segment") {
    const auto segs = pad_or_trim(AudioClip{{}, 16000});
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].samples == std::vector<float>(16000, 0.0f));
  }
}

TEST_CASE("frame") {
  const FrameConfig cfg;
  CHECK(frame(AudioClip{std::vector<float>(16000), 16000}, cfg).rows() == 98);
  CHECK(frame(AudioClip{std::vector<float>(400), 16000}, cfg).rows() == 1);

  AudioClip ramp{std::vector<float>(560), 16000};
  for (std::size_t i = 0; i < ramp.samples.size(); ++i) ramp.samples[i] = static_cast<float>(i);
  const auto frames = frame(ramp, cfg);
  REQUIRE(frames.rows() == 2);
  CHECK(frames(0, 0) == 0.0);
  CHECK(frames(1, 0) == 160.0);
  CHECK(frames(1, 399) == 559.0);

  CHECK_THROWS_AS(frame(AudioClip{std::vector<float>(399), 16000}, cfg), InvalidInput);

  SUBCASE("frame count formula against a reference loop") {
    for (std::size_t len = 400; len < 3000; len += 37) {
      std::size_t count = 0;
      for (std::size_t start = 0; start + 400 <= len; start += 160) ++count;
      CHECK(frame(AudioClip{std::vector<float>(len), 16000}, cfg).rows() == count);
    }
  }
}

TEST_CASE("stft_power") {
  SUBCASE("zero frame gives a zero row") {
    const auto spec = stft_power(Grid<double>(1, 400, 0.0));
    CHECK(spec.n_bins() == 201);
    for (double v : spec.values.data()) CHECK(v == 0.0);
  }
  SUBCASE("constant frame: DC power is (c * sum w)^2") {
    const double c = 0.3;
    const auto spec = stft_power(Grid<double>(1, 400, c));
    double wsum = 0.0;
    for (int n = 0; n < 400; ++n) wsum += 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * n / 399.0));
    CHECK(spec.values(0, 0) == doctest::Approx((c * wsum) * (c * wsum)).epsilon(1e-12));
    CHECK(spec.bin_hz == doctest::Approx(40.0));
  }
  SUBCASE("random frames against the direct DFT oracle") {
    SplitMix64 rng(2024);
    Grid<double> frames(100, 400);
    for (auto& v : frames.data()) v = rng.uniform(-1, 1);
    const auto spec = stft_power(frames);
    double worst = 0.0;
    for (std::size_t m = 0; m < 100; ++m) {
      const auto ref = direct_power(frames.row(m));
      for (std::size_t k = 0; k < ref.size(); ++k) {
        CHECK(spec.values(m, k) >= 0.0);
        worst = std::max(worst, std::abs(spec.values(m, k) - ref[k]) / std::max(ref[k], 1e-300));
      }
    }
    CHECK(worst < 1e-6);
  }
  SUBCASE("zero-length frames are rejected") {
    CHECK_THROWS_AS(stft_power(Grid<double>(3, 0)), InvalidInput);
  }
}

TEST_CASE("hz_to_mel") {
  CHECK(hz_to_mel(0.0) == 0.0);
  CHECK(hz_to_mel(700.0) == doctest::Approx(781.1728387480312).epsilon(1e-12));
  CHECK(hz_to_mel(8000.0) == doctest::Approx(2840.023046708319).epsilon(1e-12));
  CHECK_THROWS_AS(hz_to_mel(-1.0), InvalidInput);
  double prev = -1.0;
  for (int i = 0; i <= 10000; ++i) {
    const double f = 8000.0 * i / 10000.0;
    const double m = hz_to_mel(f);
    CHECK(m > prev);
    prev = m;
  }
  for (double f = 1.0; f <= 8000.0; f *= 1.37)
    CHECK(std::abs(mel_to_hz(hz_to_mel(f)) - f) <= 1e-9 * f);
}

TEST_CASE("build_filterbank") {
  SUBCASE("single band peaks at the mel midpoint") {
    const auto bank = build_filterbank(1, 201, 16000);
    REQUIRE(bank.center_hz.size() == 1);
    CHECK(bank.center_hz[0] == doctest::Approx(1767.7925358506134).epsilon(1e-12));
    const auto w = bank.weights.row(0);
    const std::size_t argmax = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
    CHECK(std::abs(argmax * 40.0 - 1767.79) <= 40.0);
  }
  SUBCASE("50 bands over 201 bins") {
    const auto bank = build_filterbank(50, 201, 16000);
    CHECK(bank.n_bands() == 50);
    for (std::size_t b = 0; b < 50; ++b) {
      if (b > 0) CHECK(bank.center_hz[b] > bank.center_hz[b - 1]);
      double mx = 0.0;
      for (double v : bank.weights.row(b)) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        mx = std::max(mx, v);
      }
      CHECK(mx > 0.0);
    }
  }
  SUBCASE("flat spectrum sums the weights") {
    const auto bank = build_filterbank(50, 201, 16000);
    Spectrogram flat;
    flat.values = Grid<double>(1, 201, 1.0);
    const auto out = apply_filterbank(flat, bank);
    for (std::size_t b = 0; b < 50; ++b) {
      double s = 0.0;
      for (double v : bank.weights.row(b)) s += v;
      CHECK(out(0, b) == doctest::Approx(s).epsilon(1e-15));
    }
  }
  SUBCASE("too few bins") {
    CHECK_THROWS_AS(build_filterbank(50, 51, 16000), InvalidInput);
    CHECK_THROWS_AS(build_filterbank(0, 201, 16000), InvalidInput);
  }
}

TEST_CASE("featurize") {
  SUBCASE("one second of silence") {
    const auto patches = featurize(AudioClip{std::vector<float>(16000, 0.0f), 16000});
    REQUIRE(patches.size() == 1);
    CHECK(patches[0].values.rows() == 98);
    CHECK(patches[0].values.cols() == 50);
    for (float v : patches[0].values.data()) CHECK(v == static_cast<float>(std::log(1e-6)));
  }
  SUBCASE("2.5 seconds give three patches") {
    const auto patches = featurize(testing::synth_tone(1000.0, 2.5, 16000, 0.3));
    CHECK(patches.size() == 3);
    for (const auto& p : patches) {
      CHECK(p.values.rows() == 98);
      for (float v : p.values.data()) CHECK(std::isfinite(v));
    }
    CHECK(patches[2].segment_index == 2);
  }
  SUBCASE("a 1 kHz tone lights up the band around 1 kHz") {
    const auto patch = featurize(testing::synth_tone(1000.0, 1.0, 16000, 0.5)).front();
    const auto bank = build_filterbank(50, 201, 16000);
    std::size_t nearest = 0;
    for (std::size_t b = 1; b < 50; ++b)
      if (std::abs(bank.center_hz[b] - 1000.0) < std::abs(bank.center_hz[nearest] - 1000.0)) nearest = b;
    const auto row = patch.values.row(49);
    const auto loudest = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    CHECK(std::abs(static_cast<long>(loudest) - static_cast<long>(nearest)) <= 1);
  }
  SUBCASE("pure and thread-safe") {
    const AudioClip clip = testing::synth_tone(523.0, 1.3, 22050, 0.4);
    const auto a = featurize(clip);
    std::vector<FeaturePatch> b, c;
    std::thread t1([&] { b = featurize(clip); });
    std::thread t2([&] { c = featurize(clip); });
    t1.join();
    t2.join();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].values == b[i].values);
      CHECK(a[i].values == c[i].values);
    }
  }
}
