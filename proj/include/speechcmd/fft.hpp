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

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace speechcmd {

/// Mixed-radix decimation-in-time DFT for an arbitrary fixed length. The
/// length is factored into radices (4 first, then primes); each stage does a
/// direct p-point butterfly, so prime lengths degrade gracefully to O(N^2).
/// The plan is immutable after construction and may be shared across threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const { return n_; }

  // Forward transform, X[k] = sum_n x[n] e^{-j 2 pi k n / N}.
  void forward(std::span<const std::complex<double>> in,
               std::span<std::complex<double>> out) const;

  // Real input convenience; fills the full N-point spectrum.
  void forward_real(std::span<const double> in,
                    std::span<std::complex<double>> out) const;

 private:
  void recurse(const std::complex<double>* in, std::complex<double>* out,
               std::size_t n, std::size_t stride, std::size_t factor_index,
               std::complex<double>* scratch) const;

  std::size_t n_;
  std::vector<std::size_t> factors_;
  std::vector<std::complex<double>> twiddles_;  // e^{-j 2 pi i / N}
};

}  // namespace speechcmd
