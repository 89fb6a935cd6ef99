#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "grdfit/common.hpp"

namespace grdfit {

struct Resolution {
  int width = 0, height = 0;
  long pixels() const { return static_cast<long>(width) * height; }
  bool operator==(const Resolution&) const = default;
  auto operator<=>(const Resolution&) const = default;
};

/// The representation grid: resolution-major indexing, bitrate ascending
/// within each resolution.
struct GridSpec {
  std::vector<double> bitrates_kbps;
  std::vector<Resolution> resolutions;

  int size() const { return static_cast<int>(bitrates_kbps.size() * resolutions.size()); }
  int index(int r, int b) const { return r * static_cast<int>(bitrates_kbps.size()) + b; }
  std::pair<int, int> split(int idx) const {
    const int nb = static_cast<int>(bitrates_kbps.size());
    return {idx / nb, idx % nb};
  }

  void validate() const {
    if (size() < 2) throw GridMismatch("grid needs at least 2 representations");
    for (size_t i = 1; i < bitrates_kbps.size(); ++i)
      if (bitrates_kbps[i] <= bitrates_kbps[i - 1])
        throw GridMismatch("bitrates must be strictly ascending");
    for (size_t i = 1; i < resolutions.size(); ++i)
      if (resolutions[i].pixels() <= resolutions[i - 1].pixels())
        throw GridMismatch("resolutions must be strictly ascending in pixel count");
  }
  bool operator==(const GridSpec&) const = default;
};

/// Dense ground-truth samples of M surfaces on one grid, per device:
/// values[m][d] is the length-N vector of surface m on device d.
struct GridSurfaceSet {
  GridSpec grid;
  std::vector<std::string> devices;
  std::vector<std::vector<Vec>> values;

  int count() const { return static_cast<int>(values.size()); }
  void validate() const {
    grid.validate();
    for (const auto& m : values) {
      if (m.size() != devices.size()) throw GridMismatch("surface with wrong device count");
      for (const auto& v : m)
        if (v.size() != grid.size()) throw GridMismatch("surface not sampled on the grid");
    }
  }
};

struct CovariancePrior {
  GridSpec grid;
  std::vector<std::string> devices;
  std::vector<Mat> sigma;  // one N x N symmetric PSD matrix per device
  double epsilon = 1e-3;
  int corpus_size = 0;
};

/// Empirical covariance of the corpus plus diagonal shrinkage
/// (epsilon * mean diagonal, or epsilon itself for a zero-variance corpus),
/// which keeps pivots admissible when the corpus is smaller than the grid.
inline CovariancePrior estimate_prior(const GridSurfaceSet& corpus, double epsilon = 1e-3) {
  corpus.validate();
  const int M = corpus.count();
  if (M < 2) throw DegenerateCorpus("need at least 2 corpus surfaces, got " + std::to_string(M));
  const int N = corpus.grid.size();
  CovariancePrior prior;
  prior.grid = corpus.grid;
  prior.devices = corpus.devices;
  prior.epsilon = epsilon;
  prior.corpus_size = M;
  for (size_t d = 0; d < corpus.devices.size(); ++d) {
    Vec mean = Vec::Zero(N);
    for (int m = 0; m < M; ++m) mean += corpus.values[m][d];
    mean /= M;
    Mat sigma = Mat::Zero(N, N);
    for (int m = 0; m < M; ++m) {
      const Vec c = corpus.values[m][d] - mean;
      sigma.noalias() += c * c.transpose();
    }
    sigma /= (M - 1);
    sigma = 0.5 * (sigma + sigma.transpose());
    double scale = sigma.diagonal().mean();
    if (scale <= 0.0) scale = 1.0;
    sigma.diagonal().array() += epsilon * scale;
    prior.sigma.push_back(std::move(sigma));
  }
  return prior;
}

inline double schur_pivot_floor(const Mat& sigma) {
  return 1e-12 * sigma.trace() / static_cast<double>(sigma.rows());
}

/// One conditioning step: observe entry i, return the Schur complement with
/// row/column i removed. PSD is preserved and the trace never grows.
inline Mat condition(const Mat& sigma, int i) {
  const int n = static_cast<int>(sigma.rows());
  if (i < 0 || i >= n) throw NearSingularPivot("pivot index out of range");
  const double piv = sigma(i, i);
  if (piv <= schur_pivot_floor(sigma))
    throw NearSingularPivot("pivot " + std::to_string(piv) + " at index " + std::to_string(i) +
                            " carries no residual information");
  std::vector<int> keep;
  keep.reserve(n - 1);
  for (int j = 0; j < n; ++j)
    if (j != i) keep.push_back(j);
  Vec col(n - 1);
  for (int j = 0; j < n - 1; ++j) col[j] = sigma(keep[j], i);
  Mat out(n - 1, n - 1);
  for (int r = 0; r < n - 1; ++r)
    for (int c = 0; c < n - 1; ++c) out(r, c) = sigma(keep[r], keep[c]) - col[r] * col[c] / piv;
  return out;
}

/// Post-conditioning trace if entry i were observed:
/// tr(S) - (s_ii + sum_{j != i} s_ij^2 / s_ii).
inline double remaining_trace(const Mat& sigma, int i) {
  const double piv = sigma(i, i);
  const double cross = sigma.col(i).squaredNorm() - piv * piv;
  return sigma.trace() - (piv + cross / piv);
}

/// Reference scorer: log-determinant of the conditioned matrix. Used by tests
/// to sanity-check the trace bound; not part of the production objective.
inline double reference_logdet_after(const Mat& sigma, int i) {
  const Mat c = condition(sigma, i);
  const Eigen::LDLT<Mat> f(c);
  double ld = 0.0;
  for (int j = 0; j < c.rows(); ++j) ld += std::log(std::max(f.vectorD()[j], 1e-300));
  return ld;
}

/// Most informative next observation: argmin over admissible pivots of the
/// device-averaged remaining trace, lowest index on ties.
inline int next_index(const std::vector<Mat>& sigmas) {
  if (sigmas.empty() || sigmas[0].rows() == 0) throw NoAdmissiblePivot("no candidates left");
  const int n = static_cast<int>(sigmas[0].rows());
  int best = -1;
  double best_score = 0.0;
  for (int i = 0; i < n; ++i) {
    bool admissible = true;
    double score = 0.0;
    for (const auto& s : sigmas) {
      if (s(i, i) <= schur_pivot_floor(s)) {
        admissible = false;
        break;
      }
      score += remaining_trace(s, i);
    }
    if (!admissible) continue;
    score /= static_cast<double>(sigmas.size());
    // strict improvement only: ties keep the lower index
    if (best < 0 || score < best_score) {
      best = i;
      best_score = score;
    }
  }
  if (best < 0) throw NoAdmissiblePivot("all pivots are numerically singular");
  return best;
}

struct SamplingPlan {
  std::vector<int> order;      // global grid indices in probe order
  std::vector<double> trace;   // device-averaged trace after each observation
  double threshold = 0.0;
  int stop_index = -1;         // order position where the threshold fired
  std::vector<double> probed;  // measured values when a probe was supplied
};

/// Greedy content-independent probe order. The initial set is the min- and
/// max-bitrate representation of every resolution (the hull guard), then each
/// step observes the representation minimizing the remaining uncertainty.
/// Stops when the post-update device-averaged trace drops to T, or when
/// k_max representations are listed. The optional probe is invoked per
/// selected representation; its values are recorded but never influence the
/// selection (observing a Gaussian component changes the conditional
/// covariance independently of the observed value).
inline SamplingPlan plan(const CovariancePrior& prior, double threshold, int k_max,
                         const std::function<double(int)>& probe = {}) {
  prior.grid.validate();
  const int N = prior.grid.size();
  if (k_max < 0 || k_max > N) throw GridMismatch("k_max must be in [0, N]");
  SamplingPlan out;
  out.threshold = threshold;

  std::vector<Mat> sig = prior.sigma;
  std::vector<int> active(N);
  for (int i = 0; i < N; ++i) active[i] = i;

  const auto avg_trace = [&]() {
    double t = 0.0;
    for (const auto& s : sig) t += s.trace();
    return t / static_cast<double>(sig.size());
  };

  const auto observe = [&](int local) {
    const int global = active[local];
    bool ok = true;
    for (auto& s : sig)
      if (s(local, local) <= schur_pivot_floor(s)) ok = false;
    if (!ok) return false;
    for (auto& s : sig) s = condition(s, local);
    active.erase(active.begin() + local);
    out.order.push_back(global);
    out.trace.push_back(avg_trace());
    if (probe) out.probed.push_back(probe(global));
    return true;
  };

  // seed set: (min, max) bitrate per resolution, resolution-major
  const int nb = static_cast<int>(prior.grid.bitrates_kbps.size());
  for (size_t r = 0; r < prior.grid.resolutions.size(); ++r) {
    for (const int b : {0, nb - 1}) {
      if (static_cast<int>(out.order.size()) >= k_max) break;
      const int global = prior.grid.index(static_cast<int>(r), b);
      const auto it = std::find(active.begin(), active.end(), global);
      if (it == active.end()) continue;
      observe(static_cast<int>(it - active.begin()));
    }
  }

  if (!out.trace.empty() && out.trace.back() <= threshold) {
    out.stop_index = static_cast<int>(out.order.size()) - 1;
    return out;
  }

  while (static_cast<int>(out.order.size()) < k_max && !active.empty()) {
    int local;
    try {
      local = next_index(sig);
    } catch (const NoAdmissiblePivot&) {
      break;
    }
    if (!observe(local)) break;
    if (out.trace.back() <= threshold) {
      out.stop_index = static_cast<int>(out.order.size()) - 1;
      break;
    }
  }
  return out;
}

}  // namespace grdfit
