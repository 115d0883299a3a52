#pragma once

#include "pagecurve/observables.hpp"
#include "pagecurve/state_prep.hpp"

#include <vector>

namespace pagecurve {

/// Short-time closed forms, independent of the anisotropies and of J'. For the high-entropy
/// start the entanglement curve is an empirical fit, not a derived result.
struct EarlyTimePrediction {
  InitialKind kind = InitialKind::filled;
  std::vector<double> t;
  std::vector<double> s_vn;
  std::vector<double> n_bath;
  std::vector<double> n_bath_var;
  bool s_vn_empirical = false;
  double validity_horizon = 1.0;
};

double early_s_vn(InitialKind kind, double t);
double early_n_bath(InitialKind kind, double t);
double early_n_bath_var(InitialKind kind, double t);

EarlyTimePrediction predict(InitialKind kind, const std::vector<double>& t_grid);

struct EarlyTimeDeviation {
  double s_vn = 0.0;  // max relative deviation over the window
  double n_bath = 0.0;
  double n_bath_var = 0.0;
  int samples = 0;
};

/// Max relative deviation of the records from the closed forms for t in [t_lo, t_hi]. Records
/// whose variance was not measured are skipped for that quantity.
EarlyTimeDeviation compare(InitialKind kind, const std::vector<TimeSeriesRecord>& records, double t_lo = 0.05,
                           double t_hi = 0.5);

}  // namespace pagecurve
