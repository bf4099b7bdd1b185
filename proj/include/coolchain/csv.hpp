#pragma once

#include <charconv>
#include <ostream>
#include <string>
#include <vector>

#include "coolchain/chain.hpp"
#include "coolchain/dynamics.hpp"
#include "coolchain/errors.hpp"
#include "coolchain/metrics.hpp"
#include "coolchain/modes.hpp"
#include "coolchain/relaxation.hpp"

namespace coolchain {

// ---------------------------------------------------------------------------
// CSV writers with pinned column orders.  Output is UTF-8, comma-delimited,
// one header line, LF line endings, and fully numeric (missing values are
// empty fields), so files can be snapshot-compared byte for byte.  Numbers
// are rendered with to_chars shortest round-trip, which is locale
// independent and reproduces the exact double on read-back.  Ion and mode
// indices are 1-based in files to match the usual plotting convention
// (ion 61 is the centre of a 121-ion chain).
// ---------------------------------------------------------------------------

inline std::string csv_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string csv_number(int v) { return std::to_string(v); }

inline void write_positions_csv(std::ostream& os, const ChainEquilibrium& eq) {
  os << "index,z0,spacing,beta_z\n";
  const int n = static_cast<int>(eq.positions.size());
  for (int i = 0; i < n; ++i) {
    os << (i + 1) << ',' << csv_number(eq.positions[i]) << ',';
    if (i + 1 < n) os << csv_number(eq.positions[i + 1] - eq.positions[i]);
    os << ',' << csv_number(eq.axial_curvatures[i]) << '\n';
  }
}

inline void write_modes_csv(std::ostream& os, const NormalModes& modes) {
  const int n = modes.size();
  os << "k,omega_k";
  for (int i = 0; i < n; ++i) os << ",g_" << (i + 1);
  os << '\n';
  for (int k = 0; k < n; ++k) {
    os << (k + 1) << ',' << csv_number(modes.omega[k]);
    for (int i = 0; i < n; ++i) os << ',' << csv_number(modes.g(i, k));
    os << '\n';
  }
}

// Steady-state profile with the ideal (uniformly cooled) reference beside
// it.  Directions that were not computed stay as empty fields.
inline void write_profile_csv(std::ostream& os,
                              const std::vector<double>& positions,
                              const MomentProfile* transverse,
                              const MomentProfile* axial,
                              const MomentProfile* transverse_ideal,
                              const MomentProfile* axial_ideal) {
  const int n = static_cast<int>(positions.size());
  for (const MomentProfile* p :
       {transverse, axial, transverse_ideal, axial_ideal})
    if (p && p->size() != n)
      throw invalid_input("profile csv: size mismatch with positions");
  os << "ion,z0,delta_x,delta_z,delta_x_ideal,delta_z_ideal\n";
  for (int i = 0; i < n; ++i) {
    os << (i + 1) << ',' << csv_number(positions[i]);
    for (const MomentProfile* p :
         {transverse, axial, transverse_ideal, axial_ideal}) {
      os << ',';
      if (p) os << csv_number(p->delta_x(i));
    }
    os << '\n';
  }
}

// Raw second-moment time series in long format; time in units of t0.
inline void write_series_csv(std::ostream& os, const TimeSeries& series) {
  os << "t_over_t0,ion,delta\n";
  const int nt = static_cast<int>(series.times.size());
  for (int j = 0; j < nt; ++j) {
    const double t = series.times[j] / (2.0 * constants::pi);
    for (std::size_t c = 0; c < series.ions.size(); ++c)
      os << csv_number(t) << ',' << (series.ions[c] + 1) << ','
         << csv_number(std::sqrt(series.xx(j, static_cast<int>(c)))) << '\n';
  }
}

// Coarse-grained series with per-window envelopes, long format.
inline void write_coarse_csv(std::ostream& os, const CoarseSeries& coarse) {
  os << "t_over_t0,ion,mean,upper,lower\n";
  const int nw = static_cast<int>(coarse.centers.size());
  for (int w = 0; w < nw; ++w) {
    const double t = coarse.centers[w] / (2.0 * constants::pi);
    for (std::size_t c = 0; c < coarse.ions.size(); ++c) {
      const int j = static_cast<int>(c);
      os << csv_number(t) << ',' << (coarse.ions[c] + 1) << ','
         << csv_number(coarse.mean(w, j)) << ',' << csv_number(coarse.upper(w, j))
         << ',' << csv_number(coarse.lower(w, j)) << '\n';
    }
  }
}

// One row per sweep point; skipped points keep their axis value and leave
// every metric field empty (the JSON summary carries the reason).
inline void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
  os << "value,axial_max_normalized,axial_mean_ratio,axial_worst_ratio,"
        "axial_worst_ion,transverse_max_normalized,transverse_mean_ratio,"
        "transverse_worst_ratio,transverse_worst_ion,tau_axial_over_t0,"
        "tau_transverse_over_t0\n";
  for (const SweepPoint& pt : sweep.points) {
    os << csv_number(pt.value);
    auto report_fields = [&os](bool has, const EfficiencyReport& rep) {
      if (has)
        os << ',' << csv_number(rep.max_normalized) << ','
           << csv_number(rep.mean_ratio) << ',' << csv_number(rep.worst_ratio)
           << ',' << (rep.worst_ion + 1);
      else
        os << ",,,,";
    };
    report_fields(!pt.skipped && pt.has_axial, pt.axial);
    report_fields(!pt.skipped && pt.has_transverse, pt.transverse);
    os << ',';
    if (!pt.skipped && pt.has_tau_axial)
      os << csv_number(pt.tau_axial / (2.0 * constants::pi));
    os << ',';
    if (!pt.skipped && pt.has_tau_transverse)
      os << csv_number(pt.tau_transverse / (2.0 * constants::pi));
    os << '\n';
  }
}

}  // namespace coolchain
