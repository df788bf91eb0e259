#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "mst/field.hpp"
#include "mst/grid.hpp"
#include "mst/types.hpp"

namespace mst {

// FFTW-backed complex buffer (16-byte aligned so cached plans apply to any instance).
class CplxBuffer {
 public:
  CplxBuffer() = default;
  explicit CplxBuffer(std::size_t n);
  ~CplxBuffer();
  CplxBuffer(const CplxBuffer&) = delete;
  CplxBuffer& operator=(const CplxBuffer&) = delete;
  CplxBuffer(CplxBuffer&& o) noexcept;
  CplxBuffer& operator=(CplxBuffer&& o) noexcept;

  cplx* data() { return data_; }
  const cplx* data() const { return data_; }
  std::size_t size() const { return n_; }
  cplx& operator[](std::size_t i) { return data_[i]; }
  const cplx& operator[](std::size_t i) const { return data_[i]; }
  void zero();

 private:
  cplx* data_ = nullptr;
  std::size_t n_ = 0;
};

// In-place c2c transforms; plans are cached per dims (FFTW_ESTIMATE for cross-run
// determinism) and guarded by a mutex during creation. Backward is unnormalized.
void fft3_forward(std::array<std::size_t, 3> dims, cplx* data);
void fft3_backward(std::array<std::size_t, 3> dims, cplx* data);
void fft2_forward(std::array<std::size_t, 2> dims, cplx* data);
void fft2_backward(std::array<std::size_t, 2> dims, cplx* data);

// Angular frequency of DFT bin m on an n-point axis with spacing d.
inline double fft_freq(std::size_t m, std::size_t n, double d) {
  std::ptrdiff_t mm = std::ptrdiff_t(m) <= std::ptrdiff_t(n) / 2 ? std::ptrdiff_t(m)
                                                                 : std::ptrdiff_t(m) - std::ptrdiff_t(n);
  return 2.0 * pi * double(mm) / (double(n) * d);
}

// Smallest FFT-friendly size (factors 2,3,5,7) >= n.
std::size_t fft_nice_size(std::size_t n);

// ---- periodic spectral calculus on a field's own grid ----

VectorField grad_spectral(const ScalarField& f);
ScalarField laplacian_spectral(const ScalarField& f);
ScalarField divergence_spectral(const VectorField& f);
VectorField curl_spectral(const VectorField& f);

// 2nd-order centered differences (periodic wrap); the fallback for Lipschitz-only data.
VectorField grad_fd(const ScalarField& f);
ScalarField divergence_fd(const VectorField& f);

}  // namespace mst
