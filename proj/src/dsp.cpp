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

#include "speechcmd/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>

#include "speechcmd/errors.hpp"
#include "speechcmd/fft.hpp"

namespace speechcmd {

namespace {

constexpr int kResampleHalfTaps = 32;
constexpr double kKaiserBeta = 8.0;
constexpr double kResampleRolloff = 0.95;

// Zeroth-order modified Bessel function of the first kind, power series.
double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  const double half_sq = 0.25 * x * x;
  for (int k = 1; k < 64; ++k) {
    term *= half_sq / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

std::size_t round_to_samples(double seconds, int rate) {
  return static_cast<std::size_t>(std::llround(seconds * rate));
}

}  // namespace

std::size_t FrameConfig::frame_len() const {
  return round_to_samples(frame_duration_s, sample_rate);
}

std::size_t FrameConfig::hop_len() const {
  return round_to_samples(hop_duration_s, sample_rate);
}

void FrameConfig::validate() const {
  if (sample_rate <= 0) throw InvalidInput("FrameConfig: sample_rate must be positive");
  const std::size_t f = frame_len();
  const std::size_t h = hop_len();
  if (h == 0 || h > f)
    throw InvalidInput("FrameConfig: need 0 < hop_len <= frame_len, got hop " +
                       std::to_string(h) + ", frame " + std::to_string(f));
}

std::size_t frames_per_segment(const FrameConfig& cfg, double segment_duration_s) {
  const std::size_t seg = round_to_samples(segment_duration_s, cfg.sample_rate);
  if (seg < cfg.frame_len()) return 0;
  return (seg - cfg.frame_len()) / cfg.hop_len() + 1;
}

AudioClip resample(const AudioClip& clip, int target_rate) {
  if (clip.samples.empty()) throw InvalidInput("resample: empty clip");
  if (clip.sample_rate <= 0 || target_rate <= 0)
    throw InvalidInput("resample: sample rates must be positive");
  if (clip.sample_rate == target_rate) return clip;

  const std::int64_t g = std::gcd(clip.sample_rate, target_rate);
  const std::int64_t up = target_rate / g;
  const std::int64_t down = clip.sample_rate / g;
  const auto in_len = static_cast<std::int64_t>(clip.samples.size());
  const std::int64_t out_len =
      (in_len * target_rate + clip.sample_rate / 2) / clip.sample_rate;

  // Cutoff relative to the input Nyquist frequency.
  const double cutoff =
      kResampleRolloff * std::min(1.0, static_cast<double>(up) / down);
  const int taps = 2 * kResampleHalfTaps;
  const double i0_beta = bessel_i0(kKaiserBeta);

  // Branch p serves outputs whose position falls p/up of the way between
  // two input samples. Tap j reads input (base + j - half + 1).
  std::vector<double> table(static_cast<std::size_t>(up) * taps);
  for (std::int64_t p = 0; p < up; ++p) {
    const double frac = static_cast<double>(p) / up;
    double* h = table.data() + p * taps;
    double sum = 0.0;
    for (int j = 0; j < taps; ++j) {
      const double d = (j - kResampleHalfTaps + 1) - frac;
      const double r = d / kResampleHalfTaps;
      const double win =
          std::abs(r) >= 1.0 ? 0.0
                             : bessel_i0(kKaiserBeta * std::sqrt(1.0 - r * r)) / i0_beta;
      h[j] = cutoff * sinc(cutoff * d) * win;
      sum += h[j];
    }
    for (int j = 0; j < taps; ++j) h[j] /= sum;
  }

  AudioClip out;
  out.sample_rate = target_rate;
  out.samples.resize(static_cast<std::size_t>(out_len));
  for (std::int64_t n = 0; n < out_len; ++n) {
    const std::int64_t base = (n * down) / up;
    const std::int64_t phase = (n * down) % up;
    const double* h = table.data() + phase * taps;
    double acc = 0.0;
    for (int j = 0; j < taps; ++j) {
      const std::int64_t idx = base + j - kResampleHalfTaps + 1;
      if (idx >= 0 && idx < in_len) acc += h[j] * clip.samples[static_cast<std::size_t>(idx)];
    }
    out.samples[static_cast<std::size_t>(n)] = static_cast<float>(acc);
  }
  return out;
}

std::vector<AudioClip> pad_or_trim(const AudioClip& clip, double segment_duration_s) {
  if (clip.sample_rate <= 0) throw InvalidInput("pad_or_trim: sample_rate must be positive");
  const std::size_t seg = round_to_samples(segment_duration_s, clip.sample_rate);
  if (seg == 0) throw InvalidInput("pad_or_trim: segment shorter than one sample");

  const std::size_t len = clip.samples.size();
  std::vector<AudioClip> out;
  auto blank = [&] {
    AudioClip c;
    c.sample_rate = clip.sample_rate;
    c.samples.assign(seg, 0.0f);
    return c;
  };

  if (len <= seg) {
    AudioClip c = blank();
    const std::size_t lead = (seg - len) / 2;
    std::copy(clip.samples.begin(), clip.samples.end(), c.samples.begin() + lead);
    out.push_back(std::move(c));
    return out;
  }
  for (std::size_t start = 0; start < len; start += seg) {
    AudioClip c = blank();
    const std::size_t n = std::min(seg, len - start);
    std::copy_n(clip.samples.begin() + start, n, c.samples.begin());
    out.push_back(std::move(c));
  }
  return out;
}

Grid<double> frame(const AudioClip& clip, const FrameConfig& cfg) {
  cfg.validate();
  const std::size_t flen = cfg.frame_len();
  const std::size_t hop = cfg.hop_len();
  const std::size_t len = clip.samples.size();
  if (len < flen)
    throw InvalidInput("frame: clip of " + std::to_string(len) +
                       " samples is shorter than one frame (" + std::to_string(flen) + ")");
  const std::size_t n_frames = (len - flen) / hop + 1;
  Grid<double> frames(n_frames, flen);
  for (std::size_t m = 0; m < n_frames; ++m) {
    auto row = frames.row(m);
    for (std::size_t n = 0; n < flen; ++n) row[n] = clip.samples[m * hop + n];
  }
  return frames;
}

std::vector<double> hann_window(std::size_t length) {
  std::vector<double> w(length, 1.0);
  if (length < 2) return w;
  const double denom = static_cast<double>(length - 1);
  for (std::size_t n = 0; n < length; ++n)
    w[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / denom));
  return w;
}

Spectrogram stft_power(const Grid<double>& frames, int sample_rate) {
  const std::size_t n = frames.cols();
  if (n == 0) throw InvalidInput("stft_power: frames have zero length");
  if (sample_rate <= 0) throw InvalidInput("stft_power: sample_rate must be positive");

  const FftPlan plan(n);
  const std::vector<double> window = hann_window(n);
  const std::size_t n_bins = n / 2 + 1;

  Spectrogram spec;
  spec.values = Grid<double>(frames.rows(), n_bins);
  spec.bin_hz = static_cast<double>(sample_rate) / static_cast<double>(n);

  std::vector<std::complex<double>> in(n), out(n);
  for (std::size_t m = 0; m < frames.rows(); ++m) {
    const auto src = frames.row(m);
    for (std::size_t i = 0; i < n; ++i) in[i] = src[i] * window[i];
    plan.forward(in, out);
    auto dst = spec.values.row(m);
    for (std::size_t k = 0; k < n_bins; ++k) dst[k] = std::norm(out[k]);
  }
  return spec;
}

double hz_to_mel(double hz) {
  if (!(hz >= 0.0)) throw InvalidInput("hz_to_mel: frequency must be nonnegative");
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double mel_to_hz(double mel) {
  if (!(mel >= 0.0)) throw InvalidInput("mel_to_hz: mel value must be nonnegative");
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelFilterbank build_filterbank(std::size_t n_bands, std::size_t n_bins,
                               int sample_rate, double f_min, double f_max) {
  if (n_bands < 1) throw InvalidInput("build_filterbank: need at least one band");
  if (n_bins < n_bands + 2)
    throw InvalidInput("build_filterbank: " + std::to_string(n_bins) +
                       " bins cannot resolve " + std::to_string(n_bands) + " bands");
  if (sample_rate <= 0) throw InvalidInput("build_filterbank: sample_rate must be positive");
  const double nyquist = sample_rate / 2.0;
  if (f_max <= 0.0) f_max = nyquist;
  if (f_min < 0.0 || f_max <= f_min || f_max > nyquist)
    throw InvalidInput("build_filterbank: need 0 <= f_min < f_max <= Nyquist");

  const double mel_lo = hz_to_mel(f_min);
  const double mel_hi = hz_to_mel(f_max);
  std::vector<double> edges(n_bands + 2);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                      static_cast<double>(n_bands + 1));

  MelFilterbank bank;
  bank.f_min = f_min;
  bank.f_max = f_max;
  bank.weights = Grid<double>(n_bands, n_bins);
  bank.center_hz.assign(edges.begin() + 1, edges.end() - 1);
  const double bin_hz = nyquist / static_cast<double>(n_bins - 1);

  for (std::size_t b = 0; b < n_bands; ++b) {
    const double left = edges[b], center = edges[b + 1], right = edges[b + 2];
    bool any = false;
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > left && f <= center)
        w = (f - left) / (center - left);
      else if (f > center && f < right)
        w = (right - f) / (right - center);
      bank.weights(b, k) = w;
      any = any || w > 0.0;
    }
    if (!any)
      throw InvalidInput("build_filterbank: band " + std::to_string(b) +
                         " covers no frequency bin; use more bins or fewer bands");
  }
  return bank;
}

Grid<double> apply_filterbank(const Spectrogram& spec, const MelFilterbank& bank) {
  if (spec.n_bins() != bank.n_bins())
    throw InvalidInput("apply_filterbank: spectrogram has " + std::to_string(spec.n_bins()) +
                       " bins, filterbank expects " + std::to_string(bank.n_bins()));
  Grid<double> out(spec.n_frames(), bank.n_bands());
  for (std::size_t m = 0; m < spec.n_frames(); ++m) {
    const auto power = spec.values.row(m);
    for (std::size_t b = 0; b < bank.n_bands(); ++b) {
      const auto w = bank.weights.row(b);
      double acc = 0.0;
      for (std::size_t k = 0; k < power.size(); ++k) acc += w[k] * power[k];
      out(m, b) = acc;
    }
  }
  return out;
}

void FrontendConfig::validate() const {
  frame.validate();
  if (!(segment_duration_s > 0.0)) throw InvalidInput("segment duration must be positive");
  if (n_frames() == 0) throw InvalidInput("segment is shorter than one frame");
  if (n_bands == 0) throw InvalidInput("need at least one mel band");
  if (!(log_floor > 0.0)) throw InvalidInput("log floor must be positive");
}

std::vector<FeaturePatch> featurize(const AudioClip& clip, const std::string& clip_id,
                                    const FrontendConfig& cfg) {
  cfg.validate();
  const int rate = cfg.sample_rate();
  const MelFilterbank bank = build_filterbank(cfg.n_bands, cfg.frame.frame_len() / 2 + 1, rate,
                                              cfg.f_min_hz, cfg.f_max_hz);

  AudioClip at_rate = clip.samples.empty() ? AudioClip{{}, rate} : resample(clip, rate);
  const std::vector<AudioClip> segments = pad_or_trim(at_rate, cfg.segment_duration_s);

  std::vector<FeaturePatch> patches;
  patches.reserve(segments.size());
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const Spectrogram spec = stft_power(frame(segments[s], cfg.frame), rate);
    const Grid<double> mel = apply_filterbank(spec, bank);
    FeaturePatch patch;
    patch.source_clip_id = clip_id;
    patch.segment_index = s;
    patch.values = Grid<float>(mel.rows(), mel.cols());
    for (std::size_t i = 0; i < mel.data().size(); ++i)
      patch.values.data()[i] = static_cast<float>(std::log(mel.data()[i] + cfg.log_floor));
    patches.push_back(std::move(patch));
  }
  return patches;
}

FeaturePatch mean_patch(const std::vector<FeaturePatch>& patches) {
  if (patches.empty()) throw InvalidInput("mean_patch: no patches");
  if (patches.size() == 1) return patches.front();
  const Grid<float>& first = patches.front().values;
  std::vector<double> acc(first.data().size(), 0.0);
  for (const auto& p : patches) {
    if (p.values.rows() != first.rows() || p.values.cols() != first.cols())
      throw InvalidInput("mean_patch: patch shapes differ");
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += p.values.data()[i];
  }
  FeaturePatch out;
  out.source_clip_id = patches.front().source_clip_id;
  out.values = Grid<float>(first.rows(), first.cols());
  for (std::size_t i = 0; i < acc.size(); ++i)
    out.values.data()[i] = static_cast<float>(acc[i] / static_cast<double>(patches.size()));
  return out;
}

}  // namespace speechcmd
