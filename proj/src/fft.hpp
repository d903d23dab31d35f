// SPDX-License-Identifier: Apache-2.0
//
// coba: convolutional and sparse convolutional beamforming for ultrasound
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Thin RAII wrappers over FFTW plans. Plans use FFTW_ESTIMATE so the chosen
// algorithm, and therefore every output bit, is fixed for a given size.

#pragma once

#include <complex>
#include <cstddef>

#include <fftw3.h>

namespace coba::detail {

// `batch` real transforms of length n stored back to back, plus their
// half spectra (n / 2 + 1 bins each).
class BatchedRealFft {
 public:
  BatchedRealFft(std::size_t n, std::size_t batch);
  ~BatchedRealFft();
  BatchedRealFft(const BatchedRealFft&) = delete;
  BatchedRealFft& operator=(const BatchedRealFft&) = delete;

  std::size_t size() const { return n_; }
  std::size_t batch() const { return batch_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  double* real() { return real_; }
  std::complex<double>* spectrum() { return reinterpret_cast<std::complex<double>*>(spec_); }

  void forward();
  // Unnormalised; overwrites the spectrum.
  void inverse();

 private:
  std::size_t n_;
  std::size_t batch_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

// Single in-place complex transform of length n.
class ComplexFft {
 public:
  explicit ComplexFft(std::size_t n);
  ~ComplexFft();
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;

  std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(buf_); }
  void forward();
  // Unnormalised.
  void inverse();

 private:
  std::size_t n_;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

std::size_t next_pow2(std::size_t n);

}  // namespace coba::detail
