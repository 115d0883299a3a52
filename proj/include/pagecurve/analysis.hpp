#pragma once

#include <optional>
#include <string>
#include <vector>

namespace pagecurve {

struct PowerLawFit {
  std::string quantity;
  double exponent = 0.0;
  double stderr_ = 0.0;
  double intercept = 0.0;  // ln prefactor
  double t_lo = 0.0;
  double t_hi = 0.0;
  double r2 = 0.0;
  int samples = 0;
};

/// Ordinary least squares of ln y on ln t over t in [t_lo, t_hi]; non-positive y are skipped.
/// Throws std::invalid_argument with fewer than 3 usable points or t_lo >= t_hi.
PowerLawFit fit_power_law(const std::vector<double>& t, const std::vector<double>& y, double t_lo, double t_hi,
                          const std::string& quantity = "y");

/// Centered moving average; near the ends the window shrinks to the available samples.
std::vector<double> moving_average(const std::vector<double>& y, int half_width);

struct PageReport {
  bool has_page = false;
  double t_page = 0.0;
  double s_vn_max = 0.0;
  double escaped_fraction = 0.0;
  std::optional<PowerLawFit> decay;  // fit of S_vN on (1.5 t_page, t_end]
};

/// Page time = argmax of the smoothed S_vN. A maximum on the last smoothing window (monotone
/// growth within the horizon) means no Page time. `n_sys` gives the escaped fraction
/// 1 - N_sys(t_page)/N_sys(0); pass an empty vector to skip it.
PageReport detect_page(const std::vector<double>& t, const std::vector<double>& s_vn,
                       const std::vector<double>& n_sys = {}, int half_width = 5);

/// Intermediate-window growth exponents of S_vN, var(N_bath) and <N_bath> plus the Page data.
struct SeriesSummary {
  std::string label;
  PageReport page;
  std::vector<PowerLawFit> growth;
};

struct SeriesColumns {
  std::vector<double> t, s_vn, n_bath_mean, n_bath_var, n_sys;
};

/// Window defaults to [2, 0.5 t_page] (or [2, t_end] without a Page time); a value <= 0 keeps
/// the default for that end.
SeriesSummary summarize(const std::string& label, const SeriesColumns& cols, double t_lo = 0.0, double t_hi = 0.0);

/// Text table: one row per quantity, one column per series.
std::string format_summary(const std::vector<SeriesSummary>& rows);

}  // namespace pagecurve
