#include "pagecurve/analysis.hpp"

#include "pagecurve/format.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pagecurve {

PowerLawFit fit_power_law(const std::vector<double>& t, const std::vector<double>& y, double t_lo, double t_hi,
                          const std::string& quantity) {
  if (t.size() != y.size()) throw std::invalid_argument("fit_power_law: length mismatch");
  if (!(t_lo < t_hi)) throw std::invalid_argument("fit_power_law: empty window");
  std::vector<double> x, v;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (t[k] >= t_lo && t[k] <= t_hi && t[k] > 0.0 && y[k] > 0.0 && std::isfinite(y[k])) {
      x.push_back(std::log(t[k]));
      v.push_back(std::log(y[k]));
    }
  const std::size_t n = x.size();
  if (n < 3) throw std::invalid_argument("fit_power_law: fewer than 3 points in the window");
  double mx = 0.0, mv = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += x[k];
    mv += v[k];
  }
  mx /= n;
  mv /= n;
  double sxx = 0.0, sxv = 0.0, svv = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxv += (x[k] - mx) * (v[k] - mv);
    svv += (v[k] - mv) * (v[k] - mv);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_power_law: degenerate abscissae");
  PowerLawFit f;
  f.quantity = quantity;
  f.exponent = sxv / sxx;
  f.intercept = mv - f.exponent * mx;
  double rss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = v[k] - f.intercept - f.exponent * x[k];
    rss += r * r;
  }
  f.stderr_ = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  f.r2 = svv > 0.0 ? 1.0 - rss / svv : 1.0;
  f.t_lo = t_lo;
  f.t_hi = t_hi;
  f.samples = static_cast<int>(n);
  return f;
}

std::vector<double> moving_average(const std::vector<double>& y, int half_width) {
  const int n = static_cast<int>(y.size());
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const int a = std::max(0, i - half_width);
    const int b = std::min(n - 1, i + half_width);
    double s = 0.0;
    for (int k = a; k <= b; ++k) s += y[k];
    out[i] = s / (b - a + 1);
  }
  return out;
}

PageReport detect_page(const std::vector<double>& t, const std::vector<double>& s_vn, const std::vector<double>& n_sys,
                       int half_width) {
  if (t.size() != s_vn.size()) throw std::invalid_argument("detect_page: length mismatch");
  PageReport r;
  const int n = static_cast<int>(t.size());
  if (n < 3) return r;
  const auto smooth = moving_average(s_vn, half_width);
  const int k = static_cast<int>(std::max_element(smooth.begin(), smooth.end()) - smooth.begin());
  r.s_vn_max = s_vn[k];
  if (k >= n - 1 - half_width || k == 0) return r;
  r.has_page = true;
  r.t_page = t[k];
  if (!n_sys.empty()) {
    if (n_sys.size() != t.size()) throw std::invalid_argument("detect_page: n_sys length mismatch");
    r.escaped_fraction = std::clamp(1.0 - n_sys[k] / n_sys[0], 0.0, 1.0);
  }
  const double lo = 1.5 * r.t_page;
  int tail = 0;
  for (double x : t) tail += x > lo ? 1 : 0;
  if (tail >= 3) {
    try {
      r.decay = fit_power_law(t, s_vn, std::nextafter(lo, lo + 1.0), t.back(), "s_vn_decay");
    } catch (const std::invalid_argument&) {
    }
  }
  return r;
}

SeriesSummary summarize(const std::string& label, const SeriesColumns& c, double t_lo, double t_hi) {
  SeriesSummary s;
  s.label = label;
  s.page = detect_page(c.t, c.s_vn, c.n_sys);
  const double lo = t_lo > 0.0 ? t_lo : 2.0;
  const double hi = t_hi > 0.0 ? t_hi : (s.page.has_page ? 0.5 * s.page.t_page : (c.t.empty() ? 0.0 : c.t.back()));
  const std::pair<const char*, const std::vector<double>*> cols[] = {
      {"s_vn", &c.s_vn}, {"n_bath_var", &c.n_bath_var}, {"n_bath_mean", &c.n_bath_mean}};
  for (const auto& [name, y] : cols) {
    if (y->size() != c.t.size()) continue;
    try {
      s.growth.push_back(fit_power_law(c.t, *y, lo, hi, name));
    } catch (const std::invalid_argument&) {
      PowerLawFit f;
      f.quantity = name;
      f.exponent = std::nan("");
      f.t_lo = lo;
      f.t_hi = hi;
      s.growth.push_back(f);
    }
  }
  return s;
}

std::string format_summary(const std::vector<SeriesSummary>& rows) {
  std::ostringstream os;
  os << "quantity";
  for (const auto& r : rows) os << "\t" << r.label;
  os << "\n";
  const char* names[] = {"s_vn", "n_bath_var", "n_bath_mean"};
  for (const char* name : names) {
    os << name;
    for (const auto& r : rows) {
      os << "\t";
      auto it = std::find_if(r.growth.begin(), r.growth.end(), [&](const PowerLawFit& f) { return f.quantity == name; });
      if (it == r.growth.end() || std::isnan(it->exponent))
        os << "N.A.";
      else
        os << fmt_double(it->exponent) << " +- " << fmt_double(it->stderr_) << " [" << fmt_double(it->t_lo) << ","
           << fmt_double(it->t_hi) << "]";
    }
    os << "\n";
  }
  os << "t_page";
  for (const auto& r : rows) os << "\t" << (r.page.has_page ? fmt_double(r.page.t_page) : "none");
  os << "\nescaped_fraction";
  for (const auto& r : rows) os << "\t" << (r.page.has_page ? fmt_double(r.page.escaped_fraction) : "N.A.");
  os << "\ndecay_exponent";
  for (const auto& r : rows) os << "\t" << (r.page.decay ? fmt_double(r.page.decay->exponent) : "N.A.");
  os << "\n";
  return os.str();
}

}  // namespace pagecurve
