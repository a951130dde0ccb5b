#include "dense_blas.hpp"

#include <dlfcn.h>

#include <cmath>
#include <cstdlib>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "kubo/common.hpp"

namespace kubo::dense {

namespace {

using cplx = std::complex<double>;
using dsyevd_t = void(const char*, const char*, const int*, double*, const int*, double*, double*,
                      const int*, int*, const int*, int*, std::size_t, std::size_t);
using zheevd_t = void(const char*, const char*, const int*, cplx*, const int*, double*, cplx*,
                      const int*, double*, const int*, int*, const int*, int*, std::size_t,
                      std::size_t);
using dgemm_t = void(const char*, const char*, const int*, const int*, const int*, const double*,
                     const double*, const int*, const double*, const int*, const double*, double*,
                     const int*, std::size_t, std::size_t);
using zgemm_t = void(const char*, const char*, const int*, const int*, const int*, const cplx*,
                     const cplx*, const int*, const cplx*, const int*, const cplx*, cplx*,
                     const int*, std::size_t, std::size_t);
using corename_t = char*();

struct Lib {
  dsyevd_t* dsyevd = nullptr;
  zheevd_t* zheevd = nullptr;
  dgemm_t* dgemm = nullptr;
  zgemm_t* zgemm = nullptr;
  corename_t* corename = nullptr;
};

template <class F>
F* sym(void* h, const char* name) {
  void* p = dlsym(h, name);
  if (!p) throw NumericalError(std::string("OpenBLAS symbol missing: ") + name);
  return reinterpret_cast<F*>(p);
}

void self_check(const Lib& lib) {
  const int n = 320;
  std::mt19937 g(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> a(n * n), b(n * n), c(n * n);
  for (double& x : a) x = u(g);
  for (double& x : b) x = u(g);
  const double one = 1.0, zero = 0.0;
  lib.dgemm("T", "N", &n, &n, &n, &one, a.data(), &n, b.data(), &n, &zero, c.data(), &n, 1, 1);
  double err = 0.0;
  for (int j = 0; j < n; j += 17)
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += a[i * n + k] * b[j * n + k];
      err = std::max(err, std::abs(s - c[j * n + i]));
    }
  if (!(err < 1e-10))
    throw NumericalError("OpenBLAS dgemm self-check failed (core " + std::string(lib.corename()) +
                         "); set OPENBLAS_CORETYPE to a working core, e.g. Haswell");
}

const Lib& lib() {
  static Lib l;
  static std::once_flag once;
  std::call_once(once, [] {
    if (!std::getenv("OPENBLAS_CORETYPE") && __builtin_cpu_supports("avx512bf16"))
      setenv("OPENBLAS_CORETYPE", "SkylakeX", 0);
    void* h = nullptr;
    for (const char* name : {"libopenblas.so.0", "libopenblas.so"})
      if ((h = dlopen(name, RTLD_NOW | RTLD_LOCAL))) break;
    if (!h) throw NumericalError(std::string("cannot load OpenBLAS: ") + dlerror());
    Lib t;
    t.dsyevd = sym<dsyevd_t>(h, "dsyevd_");
    t.zheevd = sym<zheevd_t>(h, "zheevd_");
    t.dgemm = sym<dgemm_t>(h, "dgemm_");
    t.zgemm = sym<zgemm_t>(h, "zgemm_");
    t.corename = sym<corename_t>(h, "openblas_get_corename");
    self_check(t);
    l = t;
  });
  return l;
}

}  // namespace

int dsyevd(int n, double* a, double* w) {
  const Lib& f = lib();
  int info = 0, lwork = -1, liwork = -1, iq = 0;
  double wq = 0.0;
  f.dsyevd("V", "U", &n, a, &n, w, &wq, &lwork, &iq, &liwork, &info, 1, 1);
  if (info != 0) return info;
  lwork = static_cast<int>(wq);
  liwork = iq;
  std::vector<double> work(lwork);
  std::vector<int> iwork(liwork);
  f.dsyevd("V", "U", &n, a, &n, w, work.data(), &lwork, iwork.data(), &liwork, &info, 1, 1);
  return info;
}

int zheevd(int n, cplx* a, double* w) {
  const Lib& f = lib();
  int info = 0, lwork = -1, lrwork = -1, liwork = -1, iq = 0;
  cplx wq = 0.0;
  double rq = 0.0;
  f.zheevd("V", "U", &n, a, &n, w, &wq, &lwork, &rq, &lrwork, &iq, &liwork, &info, 1, 1);
  if (info != 0) return info;
  lwork = static_cast<int>(wq.real());
  lrwork = static_cast<int>(rq);
  liwork = iq;
  std::vector<cplx> work(lwork);
  std::vector<double> rwork(lrwork);
  std::vector<int> iwork(liwork);
  f.zheevd("V", "U", &n, a, &n, w, work.data(), &lwork, rwork.data(), &lrwork, iwork.data(), &liwork,
           &info, 1, 1);
  return info;
}

void dgemm_tn(int n, const double* a, const double* b, double* c) {
  const double one = 1.0, zero = 0.0;
  lib().dgemm("T", "N", &n, &n, &n, &one, a, &n, b, &n, &zero, c, &n, 1, 1);
}

void zgemm_hn(int n, const cplx* a, const cplx* b, cplx* c) {
  const cplx one = 1.0, zero = 0.0;
  lib().zgemm("C", "N", &n, &n, &n, &one, a, &n, b, &n, &zero, c, &n, 1, 1);
}

const char* core_name() { return lib().corename(); }

}  // namespace kubo::dense
