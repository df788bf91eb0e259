#include "mst/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace mst {

CplxBuffer::CplxBuffer(std::size_t n) : n_(n) {
  data_ = reinterpret_cast<cplx*>(fftw_malloc(sizeof(cplx) * n));
  if (!data_) throw std::bad_alloc();
  zero();
}
CplxBuffer::~CplxBuffer() {
  if (data_) fftw_free(data_);
}
CplxBuffer::CplxBuffer(CplxBuffer&& o) noexcept : data_(o.data_), n_(o.n_) {
  o.data_ = nullptr;
  o.n_ = 0;
}
CplxBuffer& CplxBuffer::operator=(CplxBuffer&& o) noexcept {
  if (this != &o) {
    if (data_) fftw_free(data_);
    data_ = o.data_;
    n_ = o.n_;
    o.data_ = nullptr;
    o.n_ = 0;
  }
  return *this;
}
void CplxBuffer::zero() {
  for (std::size_t i = 0; i < n_; ++i) data_[i] = cplx(0.0);
}

namespace {

std::mutex g_plan_mutex;

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

// fftw_malloc guarantees the alignment the cached plans were created with, so
// new-array execution is valid on any CplxBuffer.
PlanPair& plans3(std::array<std::size_t, 3> dims) {
  static std::map<std::array<std::size_t, 3>, PlanPair> cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = cache.find(dims);
  if (it != cache.end()) return it->second;
  std::size_t n = dims[0] * dims[1] * dims[2];
  fftw_complex* scratch = fftw_alloc_complex(n);
  if (!scratch) throw std::bad_alloc();
  PlanPair p;
  p.fwd = fftw_plan_dft_3d(int(dims[2]), int(dims[1]), int(dims[0]), scratch, scratch,
                           FFTW_FORWARD, FFTW_ESTIMATE);
  p.bwd = fftw_plan_dft_3d(int(dims[2]), int(dims[1]), int(dims[0]), scratch, scratch,
                           FFTW_BACKWARD, FFTW_ESTIMATE);
  fftw_free(scratch);
  return cache.emplace(dims, p).first->second;
}

PlanPair& plans2(std::array<std::size_t, 2> dims) {
  static std::map<std::array<std::size_t, 2>, PlanPair> cache;
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto it = cache.find(dims);
  if (it != cache.end()) return it->second;
  std::size_t n = dims[0] * dims[1];
  fftw_complex* scratch = fftw_alloc_complex(n);
  if (!scratch) throw std::bad_alloc();
  PlanPair p;
  p.fwd = fftw_plan_dft_2d(int(dims[1]), int(dims[0]), scratch, scratch, FFTW_FORWARD,
                           FFTW_ESTIMATE);
  p.bwd = fftw_plan_dft_2d(int(dims[1]), int(dims[0]), scratch, scratch, FFTW_BACKWARD,
                           FFTW_ESTIMATE);
  fftw_free(scratch);
  return cache.emplace(dims, p).first->second;
}

}  // namespace

void fft3_forward(std::array<std::size_t, 3> dims, cplx* data) {
  fftw_execute_dft(plans3(dims).fwd, reinterpret_cast<fftw_complex*>(data),
                   reinterpret_cast<fftw_complex*>(data));
}
void fft3_backward(std::array<std::size_t, 3> dims, cplx* data) {
  fftw_execute_dft(plans3(dims).bwd, reinterpret_cast<fftw_complex*>(data),
                   reinterpret_cast<fftw_complex*>(data));
}
void fft2_forward(std::array<std::size_t, 2> dims, cplx* data) {
  fftw_execute_dft(plans2(dims).fwd, reinterpret_cast<fftw_complex*>(data),
                   reinterpret_cast<fftw_complex*>(data));
}
void fft2_backward(std::array<std::size_t, 2> dims, cplx* data) {
  fftw_execute_dft(plans2(dims).bwd, reinterpret_cast<fftw_complex*>(data),
                   reinterpret_cast<fftw_complex*>(data));
}

std::size_t fft_nice_size(std::size_t n) {
  auto smooth = [](std::size_t m) {
    for (std::size_t f : {2, 3, 5, 7})
      while (m % f == 0) m /= f;
    return m == 1;
  };
  while (!smooth(n)) ++n;
  return n;
}

namespace {

// Scale by 1/N and copy out of a backward transform.
void normalize(std::vector<cplx>& out, const CplxBuffer& buf) {
  double s = 1.0 / double(buf.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf[i] * s;
}

}  // namespace

VectorField grad_spectral(const ScalarField& f) {
  const Grid3& g = f.grid;
  std::size_t n = g.size();
  CplxBuffer hat(n);
  for (std::size_t i = 0; i < n; ++i) hat[i] = f.v[i];
  fft3_forward(g.dims, hat.data());
  VectorField out(g);
  out.support = f.support;
  CplxBuffer work(n);
  for (int c = 0; c < 3; ++c) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < g.dims[2]; ++k) {
      double sz = fft_freq(k, g.dims[2], g.spacing[2]);
      for (std::size_t j = 0; j < g.dims[1]; ++j) {
        double sy = fft_freq(j, g.dims[1], g.spacing[1]);
        for (std::size_t i = 0; i < g.dims[0]; ++i, ++idx) {
          double s = c == 0 ? fft_freq(i, g.dims[0], g.spacing[0]) : (c == 1 ? sy : sz);
          work[idx] = hat[idx] * cplx(0.0, s);
        }
      }
    }
    fft3_backward(g.dims, work.data());
    normalize(out.v[c], work);
  }
  return out;
}

ScalarField laplacian_spectral(const ScalarField& f) {
  const Grid3& g = f.grid;
  std::size_t n = g.size();
  CplxBuffer hat(n);
  for (std::size_t i = 0; i < n; ++i) hat[i] = f.v[i];
  fft3_forward(g.dims, hat.data());
  std::size_t idx = 0;
  for (std::size_t k = 0; k < g.dims[2]; ++k) {
    double sz = fft_freq(k, g.dims[2], g.spacing[2]);
    for (std::size_t j = 0; j < g.dims[1]; ++j) {
      double sy = fft_freq(j, g.dims[1], g.spacing[1]);
      for (std::size_t i = 0; i < g.dims[0]; ++i, ++idx) {
        double sx = fft_freq(i, g.dims[0], g.spacing[0]);
        hat[idx] *= -(sx * sx + sy * sy + sz * sz);
      }
    }
  }
  fft3_backward(g.dims, hat.data());
  ScalarField out(g);
  normalize(out.v, hat);
  return out;
}

ScalarField divergence_spectral(const VectorField& f) {
  const Grid3& g = f.grid;
  std::size_t n = g.size();
  CplxBuffer acc(n);
  CplxBuffer hat(n);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < n; ++i) hat[i] = f.v[c][i];
    fft3_forward(g.dims, hat.data());
    std::size_t idx = 0;
    for (std::size_t k = 0; k < g.dims[2]; ++k) {
      double sz = fft_freq(k, g.dims[2], g.spacing[2]);
      for (std::size_t j = 0; j < g.dims[1]; ++j) {
        double sy = fft_freq(j, g.dims[1], g.spacing[1]);
        for (std::size_t i = 0; i < g.dims[0]; ++i, ++idx) {
          double s = c == 0 ? fft_freq(i, g.dims[0], g.spacing[0]) : (c == 1 ? sy : sz);
          acc[idx] += hat[idx] * cplx(0.0, s);
        }
      }
    }
  }
  fft3_backward(g.dims, acc.data());
  ScalarField out(g);
  normalize(out.v, acc);
  return out;
}

VectorField curl_spectral(const VectorField& f) {
  // curl = (d2 f3 - d3 f2, d3 f1 - d1 f3, d1 f2 - d2 f1), assembled in Fourier space.
  const Grid3& g = f.grid;
  std::size_t n = g.size();
  std::array<CplxBuffer, 3> hat;
  for (int c = 0; c < 3; ++c) {
    hat[c] = CplxBuffer(n);
    for (std::size_t i = 0; i < n; ++i) hat[c][i] = f.v[c][i];
    fft3_forward(g.dims, hat[c].data());
  }
  VectorField out(g);
  CplxBuffer work(n);
  for (int c = 0; c < 3; ++c) {
    int a = (c + 1) % 3, b = (c + 2) % 3;
    std::size_t idx = 0;
    for (std::size_t k = 0; k < g.dims[2]; ++k) {
      double s2 = fft_freq(k, g.dims[2], g.spacing[2]);
      for (std::size_t j = 0; j < g.dims[1]; ++j) {
        double s1 = fft_freq(j, g.dims[1], g.spacing[1]);
        for (std::size_t i = 0; i < g.dims[0]; ++i, ++idx) {
          double s0 = fft_freq(i, g.dims[0], g.spacing[0]);
          double sa = a == 0 ? s0 : (a == 1 ? s1 : s2);
          double sb = b == 0 ? s0 : (b == 1 ? s1 : s2);
          work[idx] = cplx(0.0, 1.0) * (sa * hat[b][idx] - sb * hat[a][idx]);
        }
      }
    }
    fft3_backward(g.dims, work.data());
    normalize(out.v[c], work);
  }
  return out;
}

namespace {

inline std::size_t wrap(std::ptrdiff_t i, std::size_t n) {
  std::ptrdiff_t m = i % std::ptrdiff_t(n);
  if (m < 0) m += std::ptrdiff_t(n);
  return std::size_t(m);
}

}  // namespace

VectorField grad_fd(const ScalarField& f) {
  const Grid3& g = f.grid;
  VectorField out(g);
  for (std::size_t k = 0; k < g.dims[2]; ++k)
    for (std::size_t j = 0; j < g.dims[1]; ++j)
      for (std::size_t i = 0; i < g.dims[0]; ++i) {
        std::size_t n = g.index(i, j, k);
        out.v[0][n] = (f.at(wrap(std::ptrdiff_t(i) + 1, g.dims[0]), j, k) -
                       f.at(wrap(std::ptrdiff_t(i) - 1, g.dims[0]), j, k)) /
                      (2.0 * g.spacing[0]);
        out.v[1][n] = (f.at(i, wrap(std::ptrdiff_t(j) + 1, g.dims[1]), k) -
                       f.at(i, wrap(std::ptrdiff_t(j) - 1, g.dims[1]), k)) /
                      (2.0 * g.spacing[1]);
        out.v[2][n] = (f.at(i, j, wrap(std::ptrdiff_t(k) + 1, g.dims[2])) -
                       f.at(i, j, wrap(std::ptrdiff_t(k) - 1, g.dims[2]))) /
                      (2.0 * g.spacing[2]);
      }
  return out;
}

ScalarField divergence_fd(const VectorField& f) {
  const Grid3& g = f.grid;
  ScalarField out(g);
  for (std::size_t k = 0; k < g.dims[2]; ++k)
    for (std::size_t j = 0; j < g.dims[1]; ++j)
      for (std::size_t i = 0; i < g.dims[0]; ++i) {
        std::size_t n = g.index(i, j, k);
        cplx d = (f.v[0][g.index(wrap(std::ptrdiff_t(i) + 1, g.dims[0]), j, k)] -
                  f.v[0][g.index(wrap(std::ptrdiff_t(i) - 1, g.dims[0]), j, k)]) /
                 (2.0 * g.spacing[0]);
        d += (f.v[1][g.index(i, wrap(std::ptrdiff_t(j) + 1, g.dims[1]), k)] -
              f.v[1][g.index(i, wrap(std::ptrdiff_t(j) - 1, g.dims[1]), k)]) /
             (2.0 * g.spacing[1]);
        d += (f.v[2][g.index(i, j, wrap(std::ptrdiff_t(k) + 1, g.dims[2]))] -
              f.v[2][g.index(i, j, wrap(std::ptrdiff_t(k) - 1, g.dims[2]))]) /
             (2.0 * g.spacing[2]);
        out.v[n] = d;
      }
  return out;
}

}  // namespace mst
