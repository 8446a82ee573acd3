// One PASS/FAIL line per acceptance criterion; exit status is the number of
// failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "chansel/baselines.hpp"
#include "chansel/csp.hpp"
#include "chansel/dataset_io.hpp"
#include "chansel/evaluation.hpp"
#include "chansel/pipeline.hpp"
#include "chansel/preprocess.hpp"
#include "chansel/synth.hpp"
#include "chansel/xcdc.hpp"
#include "chansel/xcorr.hpp"

using namespace chansel;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Noise level for the planted-channel family; see README.
constexpr double kNoiseSigma = 2.5;
const std::vector<std::size_t> kInformative{2, 7, 11};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

EpochedDataset planted(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.n_channels = 16;
  cfg.informative = kInformative;
  cfg.n_trials_per_class = 150;
  cfg.modulation_depth = 0.5;
  cfg.noise_sigma = kNoiseSigma;
  cfg.seed = seed;
  return generate_synthetic(cfg);
}

std::vector<std::span<const double>> as_spans(const std::vector<std::vector<double>>& rows) {
  return {rows.begin(), rows.end()};
}

void criterion_1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> n_dist(2, 16), t_dist(1, 512), lag_dist(0, 40);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const auto n = n_dist(rng);
    const auto t = t_dist(rng);
    std::vector<std::vector<double>> rows(n, std::vector<double>(t));
    const double scale = std::exp(g(rng));
    for (auto& r : rows) {
      for (auto& v : r) v = scale * g(rng);
    }
    XcorrOptions opt;
    if (rep % 4 == 3) opt.max_lag = lag_dist(rng);
    const auto spans = as_spans(rows);
    const auto fast = pairwise_similarity(spans, opt);
    const auto slow = naive_pairwise_similarity(spans, opt);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double a = fast.values(i, j), b = slow.values(i, j);
        // relative to the pair's energy scale, which bounds |S|
        const double ref = std::sqrt(slow.values(i, i) * slow.values(j, j));
        const double denom = std::max({std::abs(b), ref, 1e-300});
        worst = std::max(worst, std::abs(a - b) / denom);
      }
    }
  }
  const double secs = seconds_since(t0);
  report(1, "FFT engine equals naive similarity", worst <= 1e-9 && secs < 60.0,
         fmt("1000 cases, max relative error %.3g, %.1f s", worst, secs));
}

double channel_d(const std::vector<std::span<const double>>& trials, std::span<const int> labels,
                 bool naive) {
  std::vector<std::vector<double>> z;
  z.reserve(trials.size());
  for (const auto& t : trials) z.push_back(zscore(t));
  const auto spans = as_spans(z);
  const auto sim = naive ? naive_pairwise_similarity(spans) : pairwise_similarity(spans);
  const auto rb = within_between(sim, labels);
  return discriminant_score(rb.r_w, rb.r_b, 0.5);
}

void criterion_2() {
  const std::size_t n = 600, t = 400;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> rows(n, std::vector<double>(t));
  for (auto& r : rows) {
    for (auto& v : r) v = g(rng);
  }
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 2);
  const auto spans = as_spans(rows);

  double fast_best = 1e300, fast_d = 0.0;
  for (int rep = 0; rep < 3; ++rep) {
    const auto t0 = Clock::now();
    fast_d = channel_d(spans, labels, false);
    fast_best = std::min(fast_best, seconds_since(t0));
  }
  const auto t0 = Clock::now();
  const double slow_d = channel_d(spans, labels, true);
  const double slow = seconds_since(t0);
  const double speedup = slow / fast_best;
  const bool agree = std::abs(fast_d - slow_d) <= 1e-9 * std::max(1.0, std::abs(slow_d));
  report(2, "one-channel D, 600 trials x 400 samples", speedup >= 20.0 && fast_best <= 4.0 && agree,
         fmt("engine %.3f s, naive %.2f s, speedup %.1fx, single thread", fast_best, slow, speedup));
}

void criteria_3_4() {
  const auto t0 = Clock::now();
  int top3 = 0, small_km = 0;
  double xcdc_km = 0.0, random_km = 0.0;
  int random_runs = 0;
  std::string kms;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto ds = planted(seed);
    const auto res = rank_channels(ds, 0.5);
    auto top = res.ranking.top(3);
    std::sort(top.begin(), top.end());
    if (top == kInformative) ++top3;

    const auto ks = default_ks(ds.n_channels());
    const auto curve = accuracy_curve(ds, res.ranking, ks);
    const auto km = minimal_subset(curve, curve.reference, 0.01).k_m;
    if (km <= 6) ++small_km;
    xcdc_km += static_cast<double>(km);
    kms += (kms.empty() ? "" : ",") + std::to_string(km);

    std::mt19937_64 rng(seed);
    for (int r = 0; r < 5; ++r) {
      std::vector<std::size_t> perm(ds.n_channels());
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      std::shuffle(perm.begin(), perm.end(), rng);
      const auto rc = accuracy_curve(ds, std::span<const std::size_t>(perm), ks);
      random_km += static_cast<double>(minimal_subset(rc, rc.reference, 0.01).k_m);
      ++random_runs;
    }
  }
  const double secs = seconds_since(t0);
  xcdc_km /= 20.0;
  random_km /= random_runs;
  report(3, "planted channels in the XCDC top 3", top3 >= 18 && secs < 600.0,
         fmt("%d/20 seeds, noise sigma %.2f, %.0f s including criterion 4", top3, kNoiseSigma, secs));
  report(4, "minimal subset at d = 1%", small_km >= 18 && xcdc_km <= random_km - 4.0,
         fmt("k_m <= 6 on %d/20 seeds (k_m: %s); mean k_m XCDC %.2f vs random %.2f", small_km,
             kms.c_str(), xcdc_km, random_km));
}

struct PropertyLog {
  std::vector<std::string> failed;
  void check(bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  }
};

void criterion_5() {
  PropertyLog log;
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, 1.0);

  // similarity symmetry and S(z, z) = T
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 2 + rng() % 8, t = 1 + rng() % 300;
    std::vector<std::vector<double>> rows(n, std::vector<double>(t));
    for (auto& r : rows) {
      for (auto& v : r) v = g(rng);
      if (t > 1) r = zscore(r);
    }
    const auto sim = pairwise_similarity(as_spans(rows));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (sim.values(i, j) != sim.values(j, i)) log.check(false, "symmetry");
      }
      if (t > 1) {
        log.check(std::abs(sim.values(i, i) - double(t)) <= 1e-9 * double(t), "S(z,z) = T");
        log.check(std::abs(similarity(rows[i], rows[i]) - double(t)) <= 1e-9 * double(t),
                  "direct S(z,z) = T");
      }
    }
  }

  // D affine in lambda; ranking invariant under per-trial amplitude scaling
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    SynthConfig cfg;
    cfg.n_channels = 8;
    cfg.informative = {1, 5};
    cfg.n_trials_per_class = 20;
    cfg.t_samples = 64;
    cfg.seed = seed;
    const auto ds = generate_synthetic(cfg);
    const auto sims = channel_similarities(ds);
    const auto labels = ds.labels();
    const auto members = ds.indices_of(Split::train);
    const auto at0 = rank_from_similarities(sims, labels, members, 0.0);
    const auto at1 = rank_from_similarities(sims, labels, members, 1.0);
    for (double lam : {0.1, 0.37, 0.5, 0.9}) {
      const auto mid = rank_from_similarities(sims, labels, members, lam);
      for (std::size_t c = 0; c < ds.n_channels(); ++c) {
        const double expect = lam * at1.discriminant.per_channel[c].d +
                              (1.0 - lam) * at0.discriminant.per_channel[c].d;
        log.check(std::abs(mid.discriminant.per_channel[c].d - expect) <= 1e-12 * (1.0 + std::abs(expect)),
                  "D affine in lambda");
      }
    }
    std::vector<Trial> scaled = ds.trials();
    std::uniform_real_distribution<double> amp(0.01, 100.0);
    for (auto& tr : scaled) tr.data *= amp(rng);
    const EpochedDataset ds2(std::move(scaled), ds.fs(), ds.layout(), ds.class_names());
    log.check(rank_channels(ds, 0.5).ranking.order() == rank_channels(ds2, 0.5).ranking.order(),
              "rank invariance under amplitude scaling");
  }

  // minimal_subset: brute-force equality and monotonicity in d
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 1000; ++rep) {
    AccuracyCurve c;
    const std::size_t n = 1 + rng() % 30;
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      k += 1 + rng() % 3;
      c.ks.push_back(k);
      c.accuracies.push_back(std::round(u(rng) * 20.0) / 20.0);
    }
    const double reference = c.accuracies.back();
    std::size_t prev = static_cast<std::size_t>(-1);
    for (double d : {0.0, 0.01, 0.05, 0.1, 0.25, 0.5, 1.0}) {
      const double thr = reference * (1.0 - d);
      std::size_t brute = 0;
      for (std::size_t i = 0; i < n && brute == 0; ++i) {
        if (c.accuracies[i] >= thr) brute = c.ks[i];
      }
      const auto km = minimal_subset(c, reference, d).k_m;
      log.check(km == brute, "minimal_subset brute force");
      log.check(km <= prev, "minimal_subset monotone in d");
      prev = km;
    }
  }

  // CSP identities
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index ch = 2 + static_cast<Eigen::Index>(rng() % 14);
    auto spd = [&] {
      Eigen::MatrixXd a(ch, 3 * ch);
      for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
      Eigen::MatrixXd c = a * a.transpose();
      return Eigen::MatrixXd(c / c.trace());
    };
    const auto c1 = spd(), c2 = spd();
    const auto model = csp_from_covariances(c1, c2);
    const Eigen::MatrixXd w = model.filters;
    const Eigen::MatrixXd id = w * (c1 + c2) * w.transpose();
    log.check((id - Eigen::MatrixXd::Identity(ch, ch)).cwiseAbs().maxCoeff() <= 1e-8, "CSP whitening");
    log.check(model.eigenvalues.minCoeff() >= 0.0 && model.eigenvalues.maxCoeff() <= 1.0,
              "CSP eigenvalues in [0, 1]");
  }

  // zscore mean and std
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<double> x(2 + rng() % 1000);
    const double shift = 1e3 * g(rng), scale = std::exp(3.0 * g(rng));
    for (auto& v : x) v = shift + scale * g(rng);
    const auto z = zscore(x);
    const double mean = std::accumulate(z.begin(), z.end(), 0.0) / double(z.size());
    double var = 0.0;
    for (double v : z) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / double(z.size()));
    log.check(std::abs(mean) <= 1e-12 && std::abs(sd - 1.0) <= 1e-12, "zscore moments");
  }

  // load(save(d)) == d
  const auto dir = fs::temp_directory_path() / ("chansel_acceptance_io_" + std::to_string(::getpid()));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthConfig cfg;
    cfg.n_channels = 5;
    cfg.informative = {0};
    cfg.n_trials_per_class = 7;
    cfg.t_samples = 33;
    cfg.seed = seed;
    const auto ds = generate_synthetic(cfg);
    save_dataset(ds, dir);
    log.check(load_dataset(dir) == ds, "load/save round trip");
    fs::remove_all(dir);
  }

  std::sort(log.failed.begin(), log.failed.end());
  log.failed.erase(std::unique(log.failed.begin(), log.failed.end()), log.failed.end());
  std::string detail = "symmetry, S(z,z)=T, affine D, scaling invariance, minimal_subset, CSP, zscore, round trip";
  if (!log.failed.empty()) {
    detail = "violated:";
    for (const auto& f : log.failed) detail += " [" + f + "]";
  }
  report(5, "property suites", log.failed.empty(), detail);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string out, line;
  while (std::getline(ss, line)) {
    if (line.find("\"created_utc\"") == std::string::npos) out += line + "\n";
  }
  return out;
}

void criterion_6() {
  const auto root = fs::temp_directory_path() / ("chansel_acceptance_run_" + std::to_string(::getpid()));
  fs::remove_all(root);
  SynthConfig cfg;
  cfg.noise_sigma = kNoiseSigma;
  cfg.n_trials_per_class = 60;
  cfg.seed = 11;
  save_dataset(generate_synthetic(cfg), root / "data");
  auto config = parse_run_config({{"dataset", (root / "data").string()},
                                  {"preprocess", {{"band_hz", {8.0, 12.0}}, {"channel_zscore", true}}},
                                  {"folds", 4},
                                  {"seed", 3}});

  const std::vector<std::pair<std::string, unsigned>> runs{{"a", 1}, {"b", 1}, {"c", 2}, {"d", 4}};
  for (const auto& [name, threads] : runs) run_pipeline(config, root / name, threads);

  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root / "a"));
  }
  std::sort(files.begin(), files.end());
  std::size_t mismatches = 0;
  for (const auto& [name, threads] : runs) {
    std::size_t count = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / name)) count += e.is_regular_file();
    if (count != files.size()) ++mismatches;
    for (const auto& f : files) {
      if (slurp(root / "a" / f) != slurp(root / name / f)) ++mismatches;
    }
  }
  fs::remove_all(root);
  report(6, "run bundles are deterministic", mismatches == 0 && !files.empty(),
         fmt("%zu files x 4 runs (threads 1, 1, 2, 4), %zu mismatches", files.size(), mismatches));
}

EpochedDataset with_duplicate(const EpochedDataset& ds, std::size_t from, std::size_t to) {
  std::vector<Trial> trials = ds.trials();
  for (auto& t : trials) t.data.row(static_cast<Eigen::Index>(to)) = t.data.row(static_cast<Eigen::Index>(from));
  return {std::move(trials), ds.fs(), ds.layout(), ds.class_names()};
}

std::size_t position(const ChannelRanking& r, std::size_t channel) {
  const auto& o = r.order();
  return static_cast<std::size_t>(std::find(o.begin(), o.end(), channel) - o.begin());
}

void criterion_7() {
  int ccs_fooled = 0, xcdc_clean = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const std::size_t a = 0, b = 14;
    const auto ds = with_duplicate(planted(seed), a, b);
    const auto ccs = ccs_rank(ds);
    const auto xcdc = rank_channels(ds, 0.5).ranking;
    // CCS is fooled if both duplicates outrank every informative channel;
    // XCDC is clean if every informative channel outranks both duplicates.
    std::size_t best_inf_ccs = ds.n_channels(), worst_inf_xcdc = 0;
    for (auto c : kInformative) {
      best_inf_ccs = std::min(best_inf_ccs, position(ccs, c));
      worst_inf_xcdc = std::max(worst_inf_xcdc, position(xcdc, c));
    }
    if (std::max(position(ccs, a), position(ccs, b)) < best_inf_ccs) ++ccs_fooled;
    const auto dup_best_xcdc = std::min(position(xcdc, a), position(xcdc, b));
    if (worst_inf_xcdc < dup_best_xcdc) ++xcdc_clean;
  }
  report(7, "duplicated noise pair fools CCS but not XCDC", ccs_fooled >= 18 && xcdc_clean >= 18,
         fmt("CCS puts the pair above all informative channels on %d/20 seeds, "
             "XCDC keeps every informative channel above the pair on %d/20",
             ccs_fooled, xcdc_clean));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> checks{criterion_1, criterion_2, criteria_3_4,
                                                  criterion_5, criterion_6, criterion_7};
  for (const auto& check : checks) {
    try {
      check();
    } catch (const std::exception& e) {
      std::printf("FAIL criterion check threw: %s\n", e.what());
      ++failures;
    }
  }
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
