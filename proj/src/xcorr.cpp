#include "chansel/xcorr.hpp"

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <limits>
#include <mutex>
#include <string>

#include "chansel/error.hpp"
#include "chansel/parallel.hpp"

namespace chansel {
namespace {

// FFTW's planner keeps global state; executing an existing plan is thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

template <typename T>
struct FftwDeleter {
  void operator()(T* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double, FftwDeleter<double>>;
using ComplexBuffer = std::unique_ptr<fftw_complex, FftwDeleter<fftw_complex>>;

RealBuffer alloc_real(std::size_t n) {
  auto* p = fftw_alloc_real(n);
  if (p == nullptr) throw std::bad_alloc();
  return RealBuffer(p);
}

ComplexBuffer alloc_complex(std::size_t n) {
  auto* p = fftw_alloc_complex(n);
  if (p == nullptr) throw std::bad_alloc();
  return ComplexBuffer(p);
}

std::size_t lag_window(std::size_t t, std::optional<std::size_t> max_lag) {
  const std::size_t full = t - 1;
  return max_lag ? std::min(*max_lag, full) : full;
}

void require_same_length(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ValidationError("cross-correlation inputs differ in length (" +
                          std::to_string(x.size()) + " vs " + std::to_string(y.size()) + ")");
  }
  if (x.empty()) throw ValidationError("cross-correlation of empty signals");
}

// Direct evaluation of r(k) for one lag.
double lag_product(std::span<const double> x, std::span<const double> y, long k) {
  const long t = static_cast<long>(x.size());
  const long lo = std::max(0L, -k);
  const long hi = std::min(t, t - k);
  double acc = 0.0;
  for (long i = lo; i < hi; ++i) acc += x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i + k)];
  return acc;
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

long LagSeries::argmax() const {
  if (values.empty()) throw ValidationError("argmax of an empty lag series");
  const auto it = std::max_element(values.begin(), values.end());
  return lag_offset + static_cast<long>(it - values.begin());
}

LagSeries xcorr_full(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  const long t = static_cast<long>(x.size());
  LagSeries out;
  out.lag_offset = -(t - 1);
  out.values.reserve(static_cast<std::size_t>(2 * t - 1));
  for (long k = -(t - 1); k <= t - 1; ++k) out.values.push_back(lag_product(x, y, k));
  return out;
}

double similarity(std::span<const double> x, std::span<const double> y,
                  std::optional<std::size_t> max_lag) {
  require_same_length(x, y);
  const long w = static_cast<long>(lag_window(x.size(), max_lag));
  double best = -std::numeric_limits<double>::infinity();
  for (long k = -w; k <= w; ++k) best = std::max(best, lag_product(x, y, k));
  return best;
}

namespace {

void check_trials(std::span<const std::span<const double>> trials, std::size_t t) {
  if (trials.size() < 2) throw ValidationError("pairwise similarity needs at least two trials");
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (trials[i].size() != t) {
      throw ValidationError("trial " + std::to_string(i) + " has " +
                            std::to_string(trials[i].size()) + " samples, expected " +
                            std::to_string(t));
    }
  }
}

}  // namespace

SimilarityMatrix naive_pairwise_similarity(std::span<const std::span<const double>> trials,
                                           const XcorrOptions& options) {
  if (trials.empty()) throw ValidationError("pairwise similarity needs at least two trials");
  check_trials(trials, trials.front().size());
  const auto n = trials.size();
  SimilarityMatrix out{Eigen::MatrixXd(n, n), 0};
  parallel_for(n, options.threads, [&](std::size_t i, unsigned) {
    for (std::size_t j = i; j < n; ++j) {
      const double s = similarity(trials[i], trials[j], options.max_lag);
      out.values(i, j) = s;
      out.values(j, i) = s;
    }
  });
  return out;
}

struct SimilarityEngine::Impl {
  std::size_t t = 0;
  std::size_t fft_len = 0;
  std::size_t bins = 0;
  std::size_t window = 0;
  unsigned threads = 1;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;

  struct Workspace {
    RealBuffer real;
    ComplexBuffer spectrum;
  };

  Workspace make_workspace() const { return {alloc_real(fft_len), alloc_complex(bins)}; }

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward != nullptr) fftw_destroy_plan(forward);
    if (inverse != nullptr) fftw_destroy_plan(inverse);
  }

  // Zero-padded forward transform of one trial into `dst` (bins values).
  void transform(std::span<const double> x, Workspace& ws, std::complex<double>* dst) const {
    double* in = ws.real.get();
    std::copy(x.begin(), x.end(), in);
    std::fill(in + t, in + fft_len, 0.0);
    fftw_execute_dft_r2c(forward, in, ws.spectrum.get());
    const auto* spec = ws.spectrum.get();
    for (std::size_t f = 0; f < bins; ++f) dst[f] = {spec[f][0], spec[f][1]};
  }

  // Unnormalized r(k) of the pair (x_spec, y_spec) lands in ws.real: lag
  // k >= 0 at index k, lag k < 0 at index fft_len + k.
  void correlate(const std::complex<double>* xs, const std::complex<double>* ys,
                 Workspace& ws) const {
    auto* prod = ws.spectrum.get();
    const double* a = reinterpret_cast<const double*>(xs);
    const double* b = reinterpret_cast<const double*>(ys);
    for (std::size_t f = 0; f < bins; ++f) {
      const double ar = a[2 * f];
      const double ai = a[2 * f + 1];
      const double br = b[2 * f];
      const double bi = b[2 * f + 1];
      // conj(a) * b
      prod[f][0] = ar * br + ai * bi;
      prod[f][1] = ar * bi - ai * br;
    }
    fftw_execute_dft_c2r(inverse, prod, ws.real.get());
  }

  double window_max(const double* r) const {
    double best = r[0];
    for (std::size_t k = 1; k <= window; ++k) best = std::max(best, r[k]);
    for (std::size_t k = fft_len - window; k < fft_len; ++k) best = std::max(best, r[k]);
    return best / static_cast<double>(fft_len);
  }
};

SimilarityEngine::SimilarityEngine(std::size_t n_samples, XcorrOptions options)
    : impl_(std::make_unique<Impl>()) {
  if (n_samples == 0) throw ValidationError("similarity engine needs T >= 1");
  auto& s = *impl_;
  s.t = n_samples;
  s.fft_len = next_pow2(2 * n_samples - 1);
  s.bins = s.fft_len / 2 + 1;
  s.window = lag_window(n_samples, options.max_lag);
  s.threads = options.threads;

  auto real = alloc_real(s.fft_len);
  auto spec = alloc_complex(s.bins);
  std::lock_guard lock(planner_mutex());
  const int len = static_cast<int>(s.fft_len);
  // ESTIMATE keeps plan selection independent of timing, so results are reproducible.
  s.forward = fftw_plan_dft_r2c_1d(len, real.get(), spec.get(), FFTW_ESTIMATE);
  s.inverse = fftw_plan_dft_c2r_1d(len, spec.get(), real.get(), FFTW_ESTIMATE);
  if (s.forward == nullptr || s.inverse == nullptr) throw Error("FFTW planning failed");
}

SimilarityEngine::~SimilarityEngine() = default;
SimilarityEngine::SimilarityEngine(SimilarityEngine&&) noexcept = default;
SimilarityEngine& SimilarityEngine::operator=(SimilarityEngine&&) noexcept = default;

std::size_t SimilarityEngine::n_samples() const { return impl_->t; }
std::size_t SimilarityEngine::fft_length() const { return impl_->fft_len; }

SimilarityMatrix SimilarityEngine::pairwise(std::span<const std::span<const double>> trials,
                                            std::size_t channel) const {
  const auto& s = *impl_;
  check_trials(trials, s.t);
  const auto n = trials.size();
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(s.threads), n));

  std::vector<Impl::Workspace> ws;
  ws.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) ws.push_back(s.make_workspace());

  std::vector<std::complex<double>> spectra(n * s.bins);
  parallel_for(n, workers, [&](std::size_t i, unsigned w) {
    s.transform(trials[i], ws[w], spectra.data() + i * s.bins);
  });

  SimilarityMatrix out{Eigen::MatrixXd(n, n), channel};
  parallel_for(n, workers, [&](std::size_t i, unsigned w) {
    const auto* xi = spectra.data() + i * s.bins;
    for (std::size_t j = i; j < n; ++j) {
      s.correlate(xi, spectra.data() + j * s.bins, ws[w]);
      const double v = s.window_max(ws[w].real.get());
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      out.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  });
  return out;
}

LagSeries SimilarityEngine::xcorr(std::span<const double> x, std::span<const double> y) const {
  const auto& s = *impl_;
  require_same_length(x, y);
  if (x.size() != s.t) throw ValidationError("signal length does not match the engine");
  auto ws = s.make_workspace();
  std::vector<std::complex<double>> xs(s.bins);
  std::vector<std::complex<double>> ys(s.bins);
  s.transform(x, ws, xs.data());
  s.transform(y, ws, ys.data());
  s.correlate(xs.data(), ys.data(), ws);

  const long t = static_cast<long>(s.t);
  LagSeries out;
  out.lag_offset = -(t - 1);
  const double scale = 1.0 / static_cast<double>(s.fft_len);
  for (long k = -(t - 1); k <= t - 1; ++k) {
    const auto idx = k >= 0 ? static_cast<std::size_t>(k) : s.fft_len - static_cast<std::size_t>(-k);
    out.values.push_back(ws.real.get()[idx] * scale);
  }
  return out;
}

SimilarityMatrix pairwise_similarity(std::span<const std::span<const double>> trials,
                                     const XcorrOptions& options) {
  if (trials.empty()) throw ValidationError("pairwise similarity needs at least two trials");
  SimilarityEngine engine(trials.front().size(), options);
  return engine.pairwise(trials);
}

}  // namespace chansel
