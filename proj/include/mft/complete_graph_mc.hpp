#pragma once

// Monte Carlo for the complete-graph Hamiltonian
//   beta H_N(S) = -(J/N) sum_{x<y} (S_x, S_y)
// with heat-bath updates for the discrete models and Metropolis for the nematic one.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "mf_solver.hpp"
#include "models.hpp"
#include "parallel.hpp"

namespace mft {

/// 64-bit generator with a fixed uniform and normal transform, so runs reproduce across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return std::size_t(uniform() * double(n)); }
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// splitmix64 step; used to derive per-chain seeds from one master seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Observables of one configuration, all O(1) or O(n^2) from the running sums.
struct Snapshot {
  double scalar_m = 0.0;           // on-axis projection
  double pair = 0.0;               // average of (S_x, S_y) over ordered pairs x != y
  std::vector<double> mean_spin;   // components of (1/N) sum_x S_x
};

// ---------------------------------------------------------------- chains

/// q-state Potts. Spin k is the simplex vertex e_k - (1/q) 1.
class PottsChain {
 public:
  PottsChain(int q, int N, double J) : q_(q), N_(N), J_(J), spin_(N, 0), count_(q, 0), boltz_(N + 1) {
    for (int n = 0; n <= N; ++n) boltz_[n] = std::exp(J * n / N);
    count_[0] = N;
  }

  void randomize(Rng& rng) {
    std::fill(count_.begin(), count_.end(), 0);
    for (int& s : spin_) {
      s = int(rng.below(q_));
      ++count_[s];
    }
  }

  /// One heat-bath update at a uniformly chosen site.
  void update(Rng& rng) {
    int x = int(rng.below(N_));
    --count_[spin_[x]];
    double w[64];
    double tot = 0.0;
    for (int k = 0; k < q_; ++k) tot += (w[k] = boltz_[count_[k]]);
    double u = rng.uniform() * tot;
    int k = 0;
    while (k < q_ - 1 && (u -= w[k]) >= 0.0) ++k;
    spin_[x] = k;
    ++count_[k];
  }

  void sweep(Rng& rng) {
    for (int i = 0; i < N_; ++i) update(rng);
  }

  Snapshot snapshot() const {
    Snapshot s;
    s.mean_spin.resize(q_);
    double sum_sq = 0.0;
    int nmax = 0;
    for (int k = 0; k < q_; ++k) {
      s.mean_spin[k] = double(count_[k]) / N_ - 1.0 / q_;
      sum_sq += double(count_[k]) * count_[k];
      nmax = std::max(nmax, count_[k]);
    }
    s.scalar_m = double(nmax) / N_ - 1.0 / q_;
    double N = N_;
    s.pair = (sum_sq - N - N * (N - 1.0) / q_) / (N * (N - 1.0));
    return s;
  }

  const std::vector<int>& spins() const { return spin_; }
  int sweep_sites() const { return N_; }
  double acceptance() const { return 1.0; }
  void tune(bool) {}

 private:
  int q_, N_;
  double J_;
  std::vector<int> spin_, count_;
  std::vector<double> boltz_;
};

/// r-component cubic spins: S in {+-e_1, ..., +-e_r}.
class CubicChain {
 public:
  CubicChain(int r, int N, double J) : r_(r), N_(N), J_(J), axis_(N, 0), sign_(N, 1), M_(r, 0), boltz_(2 * N + 1) {
    for (int j = -N; j <= N; ++j) boltz_[j + N] = std::exp(J * j / N);
    M_[0] = N;
  }

  void randomize(Rng& rng) {
    std::fill(M_.begin(), M_.end(), 0);
    for (int x = 0; x < N_; ++x) {
      std::size_t c = rng.below(2 * r_);
      axis_[x] = int(c / 2);
      sign_[x] = c % 2 ? -1 : 1;
      M_[axis_[x]] += sign_[x];
    }
  }

  void update(Rng& rng) {
    int x = int(rng.below(N_));
    M_[axis_[x]] -= sign_[x];
    double w[128];
    double tot = 0.0;
    for (int k = 0; k < r_; ++k) {
      tot += (w[2 * k] = boltz_[M_[k] + N_]);
      tot += (w[2 * k + 1] = boltz_[-M_[k] + N_]);
    }
    double u = rng.uniform() * tot;
    int c = 0;
    while (c < 2 * r_ - 1 && (u -= w[c]) >= 0.0) ++c;
    axis_[x] = c / 2;
    sign_[x] = c % 2 ? -1 : 1;
    M_[axis_[x]] += sign_[x];
  }

  void sweep(Rng& rng) {
    for (int i = 0; i < N_; ++i) update(rng);
  }

  Snapshot snapshot() const {
    Snapshot s;
    s.mean_spin.resize(r_);
    double sq = 0.0, mx = 0.0;
    for (int k = 0; k < r_; ++k) {
      s.mean_spin[k] = double(M_[k]) / N_;
      sq += double(M_[k]) * M_[k];
      mx = std::max(mx, std::fabs(s.mean_spin[k]));
    }
    s.scalar_m = mx;
    double N = N_;
    s.pair = (sq - N) / (N * (N - 1.0));
    return s;
  }

  int sweep_sites() const { return N_; }
  double acceptance() const { return 1.0; }
  void tune(bool) {}

 private:
  int r_, N_;
  double J_;
  std::vector<int> axis_, sign_, M_;
  std::vector<double> boltz_;
};

/// O(n)-nematic: unit vectors v, S = v v^T - I/n. Metropolis with Gaussian tangent steps.
class NematicChain {
 public:
  NematicChain(int n, int N, double J) : n_(n), N_(N), J_(J), v_(n, N), T_(Eigen::MatrixXd::Zero(n, n)) {
    v_.setZero();
    v_.row(0).setOnes();
    rebuild();
  }

  void randomize(Rng& rng) {
    for (int x = 0; x < N_; ++x) {
      for (int a = 0; a < n_; ++a) v_(a, x) = rng.normal();
      v_.col(x).normalize();
    }
    rebuild();
  }

  void update(Rng& rng) {
    int x = int(rng.below(N_));
    Eigen::VectorXd v = v_.col(x);
    Eigen::VectorXd xi(n_);
    for (int a = 0; a < n_; ++a) xi[a] = rng.normal();
    xi -= xi.dot(v) * v;
    Eigen::VectorXd w = (v + step_ * xi).normalized();
    Eigen::MatrixXd Tr = T_ - v * v.transpose();
    double dbh = -(J_ / N_) * (w.dot(Tr * w) - v.dot(Tr * v));
    ++tried_;
    if (dbh <= 0.0 || rng.uniform() < std::exp(-dbh)) {
      v_.col(x) = w;
      T_ = Tr + w * w.transpose();
      ++accepted_;
    }
  }

  void sweep(Rng& rng) {
    for (int i = 0; i < N_; ++i) update(rng);
    if (++since_rebuild_ >= 64) rebuild();
  }

  /// Nudges the step size toward 40% acceptance using the last sweep's counts.
  void tune(bool active) {
    if (active && tried_ > 0) {
      double a = double(accepted_) / tried_;
      if (a > 0.5) step_ *= 1.15;
      else if (a < 0.3) step_ *= 0.85;
      else step_ *= 1.0 + 0.5 * (a - 0.4);
      step_ = std::clamp(step_, 1e-4, 20.0);
    }
    if (active) tried_ = accepted_ = 0;
  }

  double acceptance() const { return tried_ ? double(accepted_) / tried_ : 0.0; }

  Snapshot snapshot() const {
    Snapshot s;
    Eigen::MatrixXd Q = T_ / double(N_) - Eigen::MatrixXd::Identity(n_, n_) / double(n_);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q, Eigen::EigenvaluesOnly);
    s.scalar_m = es.eigenvalues()[n_ - 1];
    s.mean_spin.assign(Q.data(), Q.data() + n_ * n_);
    double N = N_;
    s.pair = ((T_.array() * T_.array()).sum() - N - N * (N - 1.0) / n_) / (N * (N - 1.0));
    return s;
  }

  int sweep_sites() const { return N_; }

 private:
  void rebuild() {
    T_ = v_ * v_.transpose();
    since_rebuild_ = 0;
  }

  int n_, N_;
  double J_;
  Eigen::MatrixXd v_, T_;
  double step_ = 0.5;
  long tried_ = 0, accepted_ = 0;
  int since_rebuild_ = 0;
};

// ---------------------------------------------------------------- driver

struct Histogram {
  double lo = 0.0, hi = 1.0;
  std::vector<long> counts;
  long total() const {
    long t = 0;
    for (long c : counts) t += c;
    return t;
  }
  double width() const { return (hi - lo) / double(counts.size()); }
  double center(std::size_t i) const { return lo + (i + 0.5) * width(); }
  std::size_t bin(double m) const {
    double f = (m - lo) / (hi - lo);
    auto b = std::ptrdiff_t(std::floor(f * double(counts.size())));
    return std::size_t(std::clamp<std::ptrdiff_t>(b, 0, std::ptrdiff_t(counts.size()) - 1));
  }
};

struct MCConfig {
  ModelSpec model = ModelSpec::potts(3);
  double J = 0.0;
  int N = 100;
  long sweeps = 10000;
  long burn_in = 1000;
  std::uint64_t seed = 1;
  int histogram_bins = 100;
  std::optional<std::pair<double, double>> histogram_range;  // default: the model interval
  int batches = 50;
  bool random_start = true;
};

struct MCResult {
  long samples = 0;
  double mean_scalar_m = 0.0;
  double mean_scalar_m_stderr = 0.0;
  double mean_abs_scalar_m = 0.0;
  Histogram histogram;
  std::vector<long> batch_bin_counts;  // batches x bins, row major
  int batches = 0;
  double pair_correlation = 0.0;
  double pair_stderr = 0.0;
  double mean_spin_sq = 0.0;             // |<S>|^2 of the time-averaged empirical mean
  double correlation_gap = 0.0;          // pair_correlation - mean_spin_sq
  double correlation_gap_stderr = 0.0;   // jackknife over batches
  double acceptance = 1.0;
  std::optional<std::vector<double>> rate_estimates;  // -(1/N) log(frequency) per bin
};

inline void validate(const MCConfig& c) {
  if (c.N < 2) throw Error(ErrorCode::InvalidConfig, "N must be >= 2");
  if (c.burn_in < 0 || c.sweeps <= c.burn_in) throw Error(ErrorCode::InvalidConfig, "need sweeps > burn_in >= 0");
  if (c.histogram_bins < 1) throw Error(ErrorCode::InvalidConfig, "histogram_bins must be >= 1");
  if (c.batches < 2 || c.batches > c.sweeps - c.burn_in)
    throw Error(ErrorCode::InvalidConfig, "batches must be in [2, sweeps - burn_in]");
  if (!std::isfinite(c.J)) throw Error(ErrorCode::InvalidConfig, "J must be finite");
  if (c.model.kind == ModelKind::Potts && c.model.param > 64) throw Error(ErrorCode::InvalidConfig, "q > 64");
  if (c.model.kind == ModelKind::Cubic && c.model.param > 64) throw Error(ErrorCode::InvalidConfig, "r > 64");
  if (c.histogram_range && !(c.histogram_range->first < c.histogram_range->second))
    throw Error(ErrorCode::InvalidConfig, "empty histogram range");
}

namespace detail {

template <class Chain>
MCResult run_chain(Chain& chain, const MCConfig& c) {
  Rng rng(c.seed);
  if (c.random_start) chain.randomize(rng);
  for (long s = 0; s < c.burn_in; ++s) {
    chain.sweep(rng);
    chain.tune(true);
  }
  chain.tune(true);  // reset counters; the step is frozen from here on

  MCResult res;
  auto range = c.histogram_range.value_or(c.model.interval());
  res.histogram.lo = range.first;
  res.histogram.hi = range.second;
  res.histogram.counts.assign(c.histogram_bins, 0);
  const long n = c.sweeps - c.burn_in;
  const int B = c.batches;
  res.batches = B;
  res.batch_bin_counts.assign(std::size_t(B) * c.histogram_bins, 0);

  std::size_t dim = chain.snapshot().mean_spin.size();
  std::vector<double> bm(B, 0.0), bpair(B, 0.0), bsz(B, 0.0);
  std::vector<std::vector<double>> bspin(B, std::vector<double>(dim, 0.0));
  double abs_sum = 0.0;
  for (long t = 0; t < n; ++t) {
    chain.sweep(rng);
    Snapshot s = chain.snapshot();
    int b = int(t * B / n);
    bm[b] += s.scalar_m;
    bpair[b] += s.pair;
    bsz[b] += 1.0;
    for (std::size_t i = 0; i < dim; ++i) bspin[b][i] += s.mean_spin[i];
    abs_sum += std::fabs(s.scalar_m);
    std::size_t k = res.histogram.bin(s.scalar_m);
    ++res.histogram.counts[k];
    ++res.batch_bin_counts[std::size_t(b) * c.histogram_bins + k];
  }
  res.samples = n;
  res.acceptance = chain.acceptance();

  auto mean_stderr = [&](const std::vector<double>& sums) {
    double tot = 0.0;
    for (double v : sums) tot += v;
    double mean = tot / double(n);
    double var = 0.0;
    for (int b = 0; b < B; ++b) {
      double d = sums[b] / bsz[b] - mean;
      var += d * d;
    }
    var /= double(B - 1);
    return std::pair{mean, std::sqrt(var / B)};
  };
  std::tie(res.mean_scalar_m, res.mean_scalar_m_stderr) = mean_stderr(bm);
  std::tie(res.pair_correlation, res.pair_stderr) = mean_stderr(bpair);
  res.mean_abs_scalar_m = abs_sum / double(n);

  // gap = <pair> - |<S>|^2, jackknife over batches for its error
  std::vector<double> spin_tot(dim, 0.0);
  double pair_tot = 0.0;
  for (int b = 0; b < B; ++b) {
    pair_tot += bpair[b];
    for (std::size_t i = 0; i < dim; ++i) spin_tot[i] += bspin[b][i];
  }
  auto gap_without = [&](int skip) {
    double cnt = double(n) - (skip >= 0 ? bsz[skip] : 0.0);
    double p = pair_tot - (skip >= 0 ? bpair[skip] : 0.0);
    double sq = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      double m = (spin_tot[i] - (skip >= 0 ? bspin[skip][i] : 0.0)) / cnt;
      sq += m * m;
    }
    return std::pair{p / cnt - sq, sq};
  };
  auto full = gap_without(-1);
  res.correlation_gap = full.first;
  res.mean_spin_sq = full.second;
  double jm = 0.0;
  std::vector<double> jk(B);
  for (int b = 0; b < B; ++b) jm += (jk[b] = gap_without(b).first);
  jm /= B;
  double jv = 0.0;
  for (double v : jk) jv += (v - jm) * (v - jm);
  res.correlation_gap_stderr = std::sqrt((B - 1.0) / B * jv);

  std::vector<double> rates(c.histogram_bins, kInf);
  for (int k = 0; k < c.histogram_bins; ++k)
    if (res.histogram.counts[k] > 0) rates[k] = -std::log(double(res.histogram.counts[k]) / double(n)) / c.N;
  res.rate_estimates = rates;
  return res;
}

}  // namespace detail

/// Runs one chain. The same config always produces the same result.
inline MCResult run_mc(const MCConfig& c) {
  validate(c);
  switch (c.model.kind) {
    case ModelKind::Potts: {
      PottsChain ch(c.model.param, c.N, c.J);
      return detail::run_chain(ch, c);
    }
    case ModelKind::Cubic: {
      CubicChain ch(c.model.param, c.N, c.J);
      return detail::run_chain(ch, c);
    }
    case ModelKind::Nematic: {
      NematicChain ch(c.model.param, c.N, c.J);
      return detail::run_chain(ch, c);
    }
  }
  throw Error(ErrorCode::InvalidConfig, "unknown model");
}

/// Independent chains, one per config, run in parallel; output order follows input order.
inline std::vector<MCResult> run_mc_many(const std::vector<MCConfig>& cs) {
  for (auto& c : cs) validate(c);
  return parallel_map<MCResult>(cs.size(), [&](std::size_t i) { return run_mc(cs[i]); });
}

// ---------------------------------------------------------------- rate function

struct RateBin {
  double center = 0.0;
  double rate = kNaN;     // extrapolated to 1/N -> 0 and shifted so the minimum is 0
  double rate_stderr = kNaN;
  double phi_shifted = kNaN;  // full-scale phi minus its minimum on the scalar axis
  bool insufficient = true;   // fewer than min_count samples at some N (the largest N in practice)
};

struct RateOptions {
  long sweeps = 200000;
  long burn_in = 2000;
  std::uint64_t seed = 1;
  int bins = 20;
  std::optional<std::pair<double, double>> range;  // default [0, upper end of the interval]
  long min_count = 10;
  int batches = 20;
};

struct RateCurve {
  std::vector<int> Ns;
  std::vector<RateBin> bins;
  std::vector<MCResult> runs;
};

/// Per-bin -(1/N) log(frequency) for each N, fitted by weighted least squares to a + c/N
/// and reported as a, shifted to minimum 0 over the adequately sampled bins.
inline RateCurve estimate_rate_function(const ModelSpec& M, double J, const std::vector<int>& Ns,
                                        const RateOptions& opt = {}) {
  if (Ns.size() < 3) throw Error(ErrorCode::InvalidConfig, "need at least 3 system sizes");
  for (std::size_t i = 1; i < Ns.size(); ++i)
    if (Ns[i] <= Ns[i - 1]) throw Error(ErrorCode::InvalidConfig, "system sizes must increase");
  if (opt.min_count < 1) throw Error(ErrorCode::InvalidConfig, "min_count must be >= 1");
  auto range = opt.range.value_or(std::pair{0.0, M.interval().second});

  std::vector<MCConfig> cfg;
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    MCConfig c;
    c.model = M;
    c.J = J;
    c.N = Ns[i];
    c.sweeps = opt.sweeps;
    c.burn_in = opt.burn_in;
    c.seed = derive_seed(opt.seed, i);
    c.histogram_bins = opt.bins;
    c.histogram_range = range;
    c.batches = opt.batches;
    cfg.push_back(c);
  }
  RateCurve out;
  out.Ns = Ns;
  out.runs = run_mc_many(cfg);

  const int K = opt.bins;
  out.bins.resize(K);
  auto gm = solve_branches(M, J).global_min();
  if (!gm) throw Error(ErrorCode::NoAsymmetricBranch, "no stable root at this J");
  const double phi_min = gm->phi_full;
  for (int k = 0; k < K; ++k) {
    RateBin& rb = out.bins[k];
    rb.center = out.runs[0].histogram.center(k);
    try {
      rb.phi_shifted = full_phi(M, J, rb.center);
    } catch (const Error&) {
      rb.phi_shifted = kNaN;
    }
    bool ok = true;
    std::vector<double> x, y, w;
    for (std::size_t i = 0; i < Ns.size(); ++i) {
      const MCResult& r = out.runs[i];
      long cnt = r.histogram.counts[k];
      if (cnt < opt.min_count) {
        ok = false;
        break;
      }
      double p = double(cnt) / double(r.samples);
      // batch-means error of the frequency
      double var = 0.0;
      double per = double(r.samples) / r.batches;
      for (int b = 0; b < r.batches; ++b) {
        double pb = double(r.batch_bin_counts[std::size_t(b) * K + k]) / per;
        var += (pb - p) * (pb - p);
      }
      var /= (r.batches - 1.0) * r.batches;
      double sp = std::max(std::sqrt(var), std::sqrt(double(cnt)) / double(r.samples));
      double sr = sp / (p * Ns[i]);
      x.push_back(1.0 / Ns[i]);
      y.push_back(-std::log(p) / Ns[i]);
      w.push_back(1.0 / (sr * sr));
    }
    rb.insufficient = !ok;
    if (!ok) continue;
    double S = 0, Sx = 0, Sy = 0, Sxx = 0, Sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      S += w[i];
      Sx += w[i] * x[i];
      Sy += w[i] * y[i];
      Sxx += w[i] * x[i] * x[i];
      Sxy += w[i] * x[i] * y[i];
    }
    double det = S * Sxx - Sx * Sx;
    rb.rate = (Sxx * Sy - Sx * Sxy) / det;
    rb.rate_stderr = std::sqrt(Sxx / det);
  }
  double rmin = kInf;
  for (auto& rb : out.bins)
    if (!rb.insufficient) rmin = std::min(rmin, rb.rate);
  for (auto& rb : out.bins) {
    if (!rb.insufficient) rb.rate -= rmin;
    rb.phi_shifted -= phi_min;
  }
  return out;
}

}  // namespace mft
