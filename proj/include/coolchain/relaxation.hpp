#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "coolchain/constants.hpp"
#include "coolchain/dynamics.hpp"
#include "coolchain/errors.hpp"

namespace coolchain {

// Default coarse-graining window: 20 trap periods, long against every mode
// oscillation but short against cooling transients.
inline constexpr double default_coarse_window = 20.0 * constants::two_pi;

// ---------------------------------------------------------------------------
// Coarse-grained view of a displacement series: per window the mean and the
// two envelopes of delta_x = sqrt(<x^2>).
// ---------------------------------------------------------------------------

struct CoarseSeries {
  double window = 0;
  std::vector<double> centers;
  std::vector<int> ions;
  Eigen::MatrixXd mean;   // windows x ions
  Eigen::MatrixXd upper;
  Eigen::MatrixXd lower;

  int windows() const { return static_cast<int>(centers.size()); }
};

inline CoarseSeries coarse_grain(const TimeSeries& series,
                                 double window = default_coarse_window) {
  if (window <= 0) throw invalid_input("coarse graining needs window > 0");
  if (series.times.empty())
    throw invalid_input("coarse graining needs a non-empty series");
  const int ni = static_cast<int>(series.ions.size());
  const double t0 = series.times.front();

  CoarseSeries out;
  out.window = window;
  out.ions = series.ions;

  std::vector<double> sum;
  std::vector<double> hi, lo;
  int count = 0;
  long current = -1;
  auto flush = [&]() {
    if (count == 0) return;
    out.centers.push_back(t0 + (current + 0.5) * window);
    const int row = static_cast<int>(out.centers.size()) - 1;
    out.mean.conservativeResize(row + 1, ni);
    out.upper.conservativeResize(row + 1, ni);
    out.lower.conservativeResize(row + 1, ni);
    for (int j = 0; j < ni; ++j) {
      out.mean(row, j) = sum[j] / count;
      out.upper(row, j) = hi[j];
      out.lower(row, j) = lo[j];
    }
  };

  for (size_t k = 0; k < series.times.size(); ++k) {
    const long idx =
        static_cast<long>(std::floor((series.times[k] - t0) / window));
    if (idx != current) {
      flush();
      current = idx;
      count = 0;
      sum.assign(ni, 0.0);
      hi.assign(ni, -1e300);
      lo.assign(ni, 1e300);
    }
    for (int j = 0; j < ni; ++j) {
      const double d = std::sqrt(std::max(0.0, series.xx(k, j)));
      sum[j] += d;
      hi[j] = std::max(hi[j], d);
      lo[j] = std::min(lo[j], d);
    }
    ++count;
  }
  flush();
  return out;
}

// ---------------------------------------------------------------------------
// Relaxation time of a coarse-grained series: the earliest window from which
// the upper envelope stays within `criterion` (relative) of the asymptotic
// displacement for the rest of the series.  A series that is settled from
// the first window reports zero.
// ---------------------------------------------------------------------------

inline double relaxation_time(const CoarseSeries& coarse, int ion_column,
                              double asymptote, double criterion = 0.01) {
  if (asymptote <= 0)
    throw invalid_input("relaxation time needs a positive asymptote");
  if (criterion <= 0)
    throw invalid_input("relaxation time needs a positive criterion");
  const int nw = coarse.windows();
  if (nw == 0) throw invalid_input("relaxation time needs windows");

  int first_settled = nw;  // first window index from which all are in band
  for (int k = nw - 1; k >= 0; --k) {
    if (std::abs(coarse.upper(k, ion_column) - asymptote) <=
        criterion * asymptote)
      first_settled = k;
    else
      break;
  }
  if (first_settled == nw) {
    const double disc =
        std::abs(coarse.upper(nw - 1, ion_column) - asymptote) / asymptote;
    throw not_relaxed("series never settles within the criterion band", disc);
  }
  return first_settled == 0 ? 0.0 : coarse.centers[first_settled];
}

// ---------------------------------------------------------------------------
// Adaptive relaxation scan.  Evaluating the closed-form moments densely from
// zero to relaxation (often > 1e5 trap periods) is wasteful; instead probe
// whole coarse windows at geometrically growing start times, bisect the
// transition, and spot-check far beyond it.
// ---------------------------------------------------------------------------

struct RelaxationScanOptions {
  double window = default_coarse_window;
  int samples_per_window = 32;
  double criterion = 0.01;
  double growth = 1.3;          // probe spacing after the contiguous prefix
  int contiguous_prefix = 8;    // probe this many adjacent windows first
  int max_probes = 600;
  int bisect_iterations = 12;
};

struct RelaxationScanResult {
  double tau = 0;                    // slowest tracked ion
  std::vector<double> tau_per_ion;
  std::vector<int> ions;
  CoarseSeries sampled;              // every window the scan evaluated
  double criterion = 0;
};

namespace detail {

struct WindowStats {
  std::vector<double> mean, upper, lower;
};

// Envelope statistics of delta_x over one window starting at s.
inline WindowStats probe_window(const SecondMomentKernel& kernel,
                                const std::vector<int>& ions, double s,
                                const RelaxationScanOptions& opts) {
  const int ns = opts.samples_per_window;
  std::vector<double> times(ns);
  for (int i = 0; i < ns; ++i) times[i] = s + opts.window * i / ns;
  const Eigen::MatrixXd xx = kernel.xx_series(times, ions);
  WindowStats st;
  const int ni = static_cast<int>(ions.size());
  st.mean.assign(ni, 0.0);
  st.upper.assign(ni, -1e300);
  st.lower.assign(ni, 1e300);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < ni; ++j) {
      const double d = std::sqrt(std::max(0.0, xx(i, j)));
      st.mean[j] += d;
      st.upper[j] = std::max(st.upper[j], d);
      st.lower[j] = std::min(st.lower[j], d);
    }
  for (int j = 0; j < ni; ++j) st.mean[j] /= ns;
  return st;
}

}  // namespace detail

inline RelaxationScanResult relaxation_scan(
    const SecondMomentKernel& kernel, const MomentProfile& asymptote,
    const std::vector<int>& ions, const RelaxationScanOptions& opts = {}) {
  const int ni = static_cast<int>(ions.size());
  if (ni == 0) throw invalid_input("relaxation scan needs tracked ions");
  std::vector<double> target(ni);
  for (int j = 0; j < ni; ++j) {
    target[j] = std::sqrt(asymptote.xx[ions[j]]);
    if (!(target[j] > 0))
      throw invalid_input("relaxation scan needs positive asymptotes");
  }

  struct Probe {
    double start;
    detail::WindowStats stats;
    bool in_band_all;
  };
  std::vector<Probe> probes;

  auto in_band = [&](const detail::WindowStats& st, int j) {
    return std::abs(st.upper[j] - target[j]) <=
           opts.criterion * target[j];
  };
  auto evaluate = [&](double s) {
    Probe p{s, detail::probe_window(kernel, ions, s, opts), true};
    for (int j = 0; j < ni; ++j)
      if (!in_band(p.stats, j)) p.in_band_all = false;
    return p;
  };

  // Phase 1: geometric bracketing until a stable in-band streak well past
  // the last violation.
  std::vector<double> last_violation(ni, -1.0);
  double last_violation_any = -1.0;
  int streak = 0;
  double s = 0;
  int k = 0;
  for (; k < opts.max_probes; ++k) {
    Probe p = evaluate(s);
    for (int j = 0; j < ni; ++j)
      if (!in_band(p.stats, j)) last_violation[j] = s;
    if (p.in_band_all) {
      ++streak;
    } else {
      streak = 0;
      last_violation_any = s;
    }
    probes.push_back(std::move(p));
    if (streak >= 3 && (last_violation_any < 0 || s > 3 * std::max(last_violation_any, opts.window)))
      break;
    s = (k < opts.contiguous_prefix)
            ? s + opts.window
            : std::max(s * opts.growth, s + opts.window);
  }
  if (k == opts.max_probes) {
    const Probe& last = probes.back();
    double disc = 0;
    for (int j = 0; j < ni; ++j)
      disc = std::max(disc,
                      std::abs(last.stats.upper[j] - target[j]) / target[j]);
    throw not_relaxed("relaxation scan exhausted its probe budget", disc);
  }

  // Phase 2: per-ion bisection of the settling transition.
  RelaxationScanResult result;
  result.ions = ions;
  result.criterion = opts.criterion;
  result.tau_per_ion.assign(ni, 0.0);
  for (int j = 0; j < ni; ++j) {
    if (last_violation[j] < 0) {
      result.tau_per_ion[j] = 0;  // settled from the first window
      continue;
    }
    // Bracket: the last violating probe and the earliest later in-band one.
    double lo = last_violation[j];
    double hi = -1;
    for (const Probe& p : probes)
      if (p.start > lo && in_band(p.stats, j)) {
        hi = p.start;
        break;
      }
    if (hi < 0) hi = lo + opts.window;
    for (int it = 0; it < opts.bisect_iterations && hi - lo > 0.05 * opts.window;
         ++it) {
      const double mid = 0.5 * (lo + hi);
      Probe p = evaluate(mid);
      (in_band(p.stats, j) ? hi : lo) = mid;
      probes.push_back(std::move(p));
    }
    result.tau_per_ion[j] = hi + 0.5 * opts.window;
  }
  result.tau = *std::max_element(result.tau_per_ion.begin(),
                                 result.tau_per_ion.end());

  // Phase 3: spot checks far beyond the reported transition.
  if (result.tau > 0) {
    for (double factor : {2.0, 4.0, 8.0}) {
      Probe p = evaluate(factor * result.tau);
      if (!p.in_band_all) {
        double disc = 0;
        for (int j = 0; j < ni; ++j)
          disc = std::max(
              disc, std::abs(p.stats.upper[j] - target[j]) / target[j]);
        probes.push_back(std::move(p));
        throw not_relaxed(
            "relaxation scan: envelope re-exits the band after settling",
            disc);
      }
      probes.push_back(std::move(p));
    }
  }

  // Diagnostics: every probed window, sorted by time.
  std::sort(probes.begin(), probes.end(),
            [](const Probe& a, const Probe& b) { return a.start < b.start; });
  result.sampled.window = opts.window;
  result.sampled.ions = ions;
  const int nw = static_cast<int>(probes.size());
  result.sampled.mean.resize(nw, ni);
  result.sampled.upper.resize(nw, ni);
  result.sampled.lower.resize(nw, ni);
  for (int w = 0; w < nw; ++w) {
    result.sampled.centers.push_back(probes[w].start + 0.5 * opts.window);
    for (int j = 0; j < ni; ++j) {
      result.sampled.mean(w, j) = probes[w].stats.mean[j];
      result.sampled.upper(w, j) = probes[w].stats.upper[j];
      result.sampled.lower(w, j) = probes[w].stats.lower[j];
    }
  }
  return result;
}

}  // namespace coolchain
