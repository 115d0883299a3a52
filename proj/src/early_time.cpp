#include "pagecurve/early_time.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pagecurve {

double early_s_vn(InitialKind kind, double t) {
  if (t <= 0.0) return 0.0;
  if (kind == InitialKind::filled) return -0.5 * t * t * std::log(0.5 * t) + 0.25 * t * t;
  return t * t / 8.0 - 0.25 * t * t * std::log(t);
}

double early_n_bath(InitialKind kind, double t) { return kind == InitialKind::filled ? t * t / 4.0 : t * t / 8.0; }

double early_n_bath_var(InitialKind kind, double t) { return early_n_bath(kind, t); }

EarlyTimePrediction predict(InitialKind kind, const std::vector<double>& t_grid) {
  EarlyTimePrediction p;
  p.kind = kind;
  p.t = t_grid;
  p.s_vn_empirical = kind == InitialKind::high_entropy;
  for (double t : t_grid) {
    if (t < 0.0) throw std::invalid_argument("predict: negative time");
    p.s_vn.push_back(early_s_vn(kind, t));
    p.n_bath.push_back(early_n_bath(kind, t));
    p.n_bath_var.push_back(early_n_bath_var(kind, t));
  }
  return p;
}

EarlyTimeDeviation compare(InitialKind kind, const std::vector<TimeSeriesRecord>& records, double t_lo, double t_hi) {
  EarlyTimeDeviation d;
  auto rel = [](double got, double want) { return std::abs(got - want) / std::abs(want); };
  for (const auto& r : records) {
    if (r.t < t_lo - 1e-12 || r.t > t_hi + 1e-12) continue;
    ++d.samples;
    d.s_vn = std::max(d.s_vn, rel(r.s_vn, early_s_vn(kind, r.t)));
    d.n_bath = std::max(d.n_bath, rel(r.n_bath_mean, early_n_bath(kind, r.t)));
    if (!std::isnan(r.n_bath_var)) d.n_bath_var = std::max(d.n_bath_var, rel(r.n_bath_var, early_n_bath_var(kind, r.t)));
  }
  return d;
}

}  // namespace pagecurve
