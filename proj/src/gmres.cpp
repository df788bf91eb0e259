#include "mst/gmres.hpp"

#include <cmath>

namespace mst {

namespace {

cplx dotc(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double nrm2(const std::vector<cplx>& a) {
  double s = 0.0;
  for (const cplx& z : a) s += std::norm(z);
  return std::sqrt(s);
}

}  // namespace

GmresResult gmres(const LinearOp& apply, const std::vector<cplx>& b, std::vector<cplx>& x,
                  const GmresOptions& opt) {
  const std::size_t n = b.size();
  GmresResult out;
  if (x.size() != n) x.assign(n, cplx(0.0));

  std::vector<cplx> r(n), w(n);
  std::vector<std::vector<cplx>> V;
  std::size_t m = opt.restart;
  std::vector<cplx> H((m + 1) * m, cplx(0.0));
  std::vector<cplx> cs(m), sn(m), s(m + 1);

  auto residual_vec = [&](std::vector<cplx>& rr) {
    apply(x, w);
    for (std::size_t i = 0; i < n; ++i) rr[i] = b[i] - w[i];
  };

  residual_vec(r);
  double beta = nrm2(r);
  out.history.push_back(beta);
  if (beta <= opt.abs_tol) {
    out.converged = true;
    out.residual = beta;
    return out;
  }

  while (out.iterations < opt.max_iter) {
    V.assign(1, r);
    double inv = 1.0 / beta;
    for (cplx& z : V[0]) z *= inv;
    std::fill(s.begin(), s.end(), cplx(0.0));
    s[0] = beta;
    std::size_t j = 0;
    for (; j < m && out.iterations < opt.max_iter; ++j, ++out.iterations) {
      apply(V[j], w);
      for (std::size_t i = 0; i <= j; ++i) {
        cplx hij = dotc(V[i], w);
        H[i * m + j] = hij;
        for (std::size_t l = 0; l < n; ++l) w[l] -= hij * V[i][l];
      }
      double hnext = nrm2(w);
      H[(j + 1) * m + j] = hnext;
      if (hnext > 0.0) {
        V.push_back(w);
        double ih = 1.0 / hnext;
        for (cplx& z : V.back()) z *= ih;
      }
      // apply accumulated Givens rotations to the new column
      for (std::size_t i = 0; i < j; ++i) {
        cplx t = cs[i] * H[i * m + j] + sn[i] * H[(i + 1) * m + j];
        H[(i + 1) * m + j] = -std::conj(sn[i]) * H[i * m + j] + std::conj(cs[i]) * H[(i + 1) * m + j];
        H[i * m + j] = t;
      }
      // complex Givens with real c: eliminates H[j+1][j]
      cplx h0 = H[j * m + j], h1 = H[(j + 1) * m + j];
      double denom = std::sqrt(std::norm(h0) + std::norm(h1));
      double absh0 = std::abs(h0);
      if (denom == 0.0) {
        cs[j] = 1.0;
        sn[j] = 0.0;
      } else if (absh0 == 0.0) {
        cs[j] = 0.0;
        sn[j] = 1.0;
      } else {
        cs[j] = absh0 / denom;
        sn[j] = (h0 / absh0) * std::conj(h1) / denom;
      }
      cplx t = cs[j] * s[j];
      s[j + 1] = -std::conj(sn[j]) * s[j];
      s[j] = t;
      H[j * m + j] = cs[j] * h0 + sn[j] * h1;
      H[(j + 1) * m + j] = 0.0;

      double rho = std::abs(s[j + 1]);
      out.history.push_back(rho);
      if (rho <= opt.abs_tol || hnext == 0.0) {
        ++j;
        ++out.iterations;
        break;
      }
      // stagnation: no meaningful progress over the window
      std::size_t wlen = opt.stagnation_window;
      if (out.history.size() > wlen) {
        double past = out.history[out.history.size() - 1 - wlen];
        if (rho > 0.999 * past) {
          out.stagnated = true;
          break;
        }
      }
    }
    // back substitution for y, then x += V y
    std::size_t jm = j;
    std::vector<cplx> y(jm);
    for (std::size_t ii = jm; ii-- > 0;) {
      cplx acc = s[ii];
      for (std::size_t l = ii + 1; l < jm; ++l) acc -= H[ii * m + l] * y[l];
      y[ii] = acc / H[ii * m + ii];
    }
    for (std::size_t ii = 0; ii < jm; ++ii)
      for (std::size_t l = 0; l < n; ++l) x[l] += y[ii] * V[ii][l];

    residual_vec(r);
    beta = nrm2(r);
    out.residual = beta;
    if (beta <= opt.abs_tol) {
      out.converged = true;
      return out;
    }
    if (out.stagnated) return out;
  }
  return out;
}

}  // namespace mst
