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

#include "fft.hpp"

#include <cstring>
#include <mutex>
#include <new>

namespace coba::detail {

namespace {

// The FFTW planner is not reentrant; execution on distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <typename T>
T* alloc(std::size_t count) {
  void* p = fftw_malloc(sizeof(T) * (count == 0 ? 1 : count));
  if (p == nullptr) throw std::bad_alloc();
  std::memset(p, 0, sizeof(T) * (count == 0 ? 1 : count));
  return static_cast<T*>(p);
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

BatchedRealFft::BatchedRealFft(std::size_t n, std::size_t batch) : n_(n), batch_(batch) {
  real_ = alloc<double>(n * batch);
  spec_ = alloc<fftw_complex>(bins() * batch);
  const int len = static_cast<int>(n);
  const int nb = static_cast<int>(bins());
  std::lock_guard lock(planner_mutex());
  fwd_ = fftw_plan_many_dft_r2c(1, &len, static_cast<int>(batch), real_, nullptr, 1, len, spec_,
                                nullptr, 1, nb, FFTW_ESTIMATE);
  inv_ = fftw_plan_many_dft_c2r(1, &len, static_cast<int>(batch), spec_, nullptr, 1, nb, real_,
                                nullptr, 1, len, FFTW_ESTIMATE);
}

BatchedRealFft::~BatchedRealFft() {
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }
  fftw_free(real_);
  fftw_free(spec_);
}

void BatchedRealFft::forward() { fftw_execute(fwd_); }
void BatchedRealFft::inverse() { fftw_execute(inv_); }

ComplexFft::ComplexFft(std::size_t n) : n_(n) {
  buf_ = alloc<fftw_complex>(n);
  std::lock_guard lock(planner_mutex());
  fwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_1d(static_cast<int>(n), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
}

ComplexFft::~ComplexFft() {
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }
  fftw_free(buf_);
}

void ComplexFft::forward() { fftw_execute(fwd_); }
void ComplexFft::inverse() { fftw_execute(inv_); }

}  // namespace coba::detail
