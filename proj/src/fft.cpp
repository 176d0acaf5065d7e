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

#include "speechcmd/fft.hpp"

#include <cmath>
#include <numbers>

#include "speechcmd/errors.hpp"

namespace speechcmd {

namespace {

std::vector<std::size_t> factorize(std::size_t n) {
  std::vector<std::size_t> factors;
  while (n % 4 == 0) {
    factors.push_back(4);
    n /= 4;
  }
  for (std::size_t p = 2; p * p <= n; ++p) {
    while (n % p == 0) {
      factors.push_back(p);
      n /= p;
    }
  }
  if (n > 1) factors.push_back(n);
  return factors;
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n), factors_(factorize(n)) {
  if (n == 0) throw InvalidInput("FftPlan: length must be positive");
  twiddles_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(i) /
                         static_cast<double>(n);
    twiddles_[i] = {std::cos(angle), std::sin(angle)};
  }
}

void FftPlan::forward(std::span<const std::complex<double>> in,
                      std::span<std::complex<double>> out) const {
  if (in.size() != n_ || out.size() != n_)
    throw InvalidInput("FftPlan::forward: buffer length mismatch");
  std::vector<std::complex<double>> scratch(n_ > 0 ? n_ : 1);
  recurse(in.data(), out.data(), n_, 1, 0, scratch.data());
}

void FftPlan::forward_real(std::span<const double> in,
                           std::span<std::complex<double>> out) const {
  std::vector<std::complex<double>> buf(in.begin(), in.end());
  forward(buf, out);
}

// X[s + q*m] = sum_r W_n^{r(s + q m)} Y_r[s], where Y_r is the m-point DFT of
// the r-th decimated subsequence. Sub-results land in out[r*m .. r*m+m) and
// each butterfly reads and writes the same p slots, so it runs in place.
void FftPlan::recurse(const std::complex<double>* in, std::complex<double>* out,
                      std::size_t n, std::size_t stride,
                      std::size_t factor_index,
                      std::complex<double>* scratch) const {
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  const std::size_t p = factors_[factor_index];
  const std::size_t m = n / p;
  for (std::size_t r = 0; r < p; ++r)
    recurse(in + r * stride, out + r * m, m, stride * p, factor_index + 1,
            scratch);

  const std::size_t tw_step = n_ / n;   // W_n = twiddles_[tw_step]
  const std::size_t root_step = n_ / p; // W_p = twiddles_[root_step]
  for (std::size_t s = 0; s < m; ++s) {
    for (std::size_t r = 0; r < p; ++r)
      scratch[r] = out[r * m + s] * twiddles_[(r * s * tw_step) % n_];
    for (std::size_t q = 0; q < p; ++q) {
      std::complex<double> acc = scratch[0];
      for (std::size_t r = 1; r < p; ++r)
        acc += scratch[r] * twiddles_[((r * q) % p) * root_step];
      out[q * m + s] = acc;
    }
  }
}

}  // namespace speechcmd
