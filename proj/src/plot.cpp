#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "semr/harness.hpp"

namespace semr {

SlopeFit fit_slope(const std::vector<SlopePoint>& points, SlopeCorrection correction) {
  SlopeFit fit;
  fit.correction = correction;

  std::vector<double> xs, ys;
  for (const SlopePoint& p : points) {
    if (p.n < 2.0) throw SemrError("fit_slope needs n >= 2 at every point");
    if (p.regret <= 0.0) {
      fit.dropped_n.push_back(p.n);
      continue;
    }
    const double x = std::log(p.n);
    double y = std::log(p.regret);
    if (correction == SlopeCorrection::SqrtLog) y -= 0.5 * std::log(std::log(p.n));
    xs.push_back(x);
    ys.push_back(y);
  }

  const size_t m = xs.size();
  if (m < 3)
    throw SlopeFitError("slope fit needs at least 3 positive-regret points, have " +
                        std::to_string(m));
  fit.points_used = static_cast<int>(m);

  double xbar = 0.0, ybar = 0.0;
  for (size_t i = 0; i < m; ++i) {
    xbar += xs[i];
    ybar += ys[i];
  }
  xbar /= static_cast<double>(m);
  ybar /= static_cast<double>(m);

  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - xbar) * (xs[i] - xbar);
    sxy += (xs[i] - xbar) * (ys[i] - ybar);
  }
  if (sxx == 0.0) throw SlopeFitError("slope fit needs at least two distinct n values");
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;

  double ssr = 0.0;
  for (size_t i = 0; i < m; ++i) {
    const double resid = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ssr += resid * resid;
  }
  fit.slope_se = std::sqrt(ssr / static_cast<double>(m - 2) / sxx);
  return fit;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

std::string emit_svg(const std::vector<SlopePoint>& points, const SlopeFit& fit) {
  std::vector<SlopePoint> kept;
  for (const SlopePoint& p : points)
    if (p.regret > 0.0 && p.n >= 2.0) kept.push_back(p);
  if (kept.empty()) throw EmptyInputError("emit_svg needs at least one positive point");
  std::sort(kept.begin(), kept.end(),
            [](const SlopePoint& a, const SlopePoint& b) { return a.n < b.n; });

  // Data and fitted curve in (ln n, ln regret) coordinates. The fit was made
  // on the (possibly corrected) response, so map it back before overlaying.
  std::vector<double> xs, ys, fys;
  for (const SlopePoint& p : kept) {
    const double x = std::log(p.n);
    xs.push_back(x);
    ys.push_back(std::log(p.regret));
    double fy = fit.intercept + fit.slope * x;
    if (fit.correction == SlopeCorrection::SqrtLog) fy += 0.5 * std::log(x);
    fys.push_back(fy);
  }

  double xmin = xs.front(), xmax = xs.back();
  double ymin = ys[0], ymax = ys[0];
  for (size_t i = 0; i < ys.size(); ++i) {
    ymin = std::fmin(ymin, std::fmin(ys[i], fys[i]));
    ymax = std::fmax(ymax, std::fmax(ys[i], fys[i]));
  }
  if (xmax == xmin) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }

  const double width = 640.0, height = 480.0;
  const double left = 70.0, right = 620.0, top = 20.0, bottom = 430.0;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (right - left); };
  auto py = [&](double y) { return bottom - (y - ymin) / (ymax - ymin) * (bottom - top); };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";

  // Axes.
  svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(bottom) << "\" x2=\""
      << num(right) << "\" y2=\"" << num(bottom)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left)
      << "\" y2=\"" << num(bottom) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  // Per-point x ticks labelled with n; y range labels at the extremes.
  for (size_t i = 0; i < kept.size(); ++i) {
    const double x = px(xs[i]);
    svg << "<line x1=\"" << num(x) << "\" y1=\"" << num(bottom) << "\" x2=\"" << num(x)
        << "\" y2=\"" << num(bottom + 5.0) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << num(x) << "\" y=\"" << num(bottom + 18.0)
        << "\" font-size=\"10\" text-anchor=\"middle\">" << static_cast<long long>(kept[i].n)
        << "</text>\n";
  }
  svg << "<text x=\"" << num(left - 8.0) << "\" y=\"" << num(bottom)
      << "\" font-size=\"10\" text-anchor=\"end\">" << num(ymin) << "</text>\n";
  svg << "<text x=\"" << num(left - 8.0) << "\" y=\"" << num(top + 10.0)
      << "\" font-size=\"10\" text-anchor=\"end\">" << num(ymax) << "</text>\n";
  svg << "<text x=\"" << num((left + right) / 2.0) << "\" y=\"" << num(bottom + 34.0)
      << "\" font-size=\"12\" text-anchor=\"middle\">n (log scale)</text>\n";
  svg << "<text x=\"14\" y=\"" << num((top + bottom) / 2.0)
      << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << num((top + bottom) / 2.0) << ")\">regret (log scale)</text>\n";

  // Fitted curve (dashed), then the data polyline and markers.
  svg << "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\" "
         "stroke-dasharray=\"6 4\" points=\"";
  for (size_t i = 0; i < kept.size(); ++i) {
    if (i) svg << ' ';
    svg << num(px(xs[i])) << ',' << num(py(fys[i]));
  }
  svg << "\"/>\n";
  svg << "<polyline fill=\"none\" stroke=\"#2c3e50\" stroke-width=\"1.5\" points=\"";
  for (size_t i = 0; i < kept.size(); ++i) {
    if (i) svg << ' ';
    svg << num(px(xs[i])) << ',' << num(py(ys[i]));
  }
  svg << "\"/>\n";
  for (size_t i = 0; i < kept.size(); ++i)
    svg << "<circle cx=\"" << num(px(xs[i])) << "\" cy=\"" << num(py(ys[i]))
        << "\" r=\"3\" fill=\"#2c3e50\"/>\n";

  char note[160];
  std::snprintf(note, sizeof(note),
                "slope = %.4f (se %.4f)%s", fit.slope, fit.slope_se,
                fit.correction == SlopeCorrection::SqrtLog ? ", sqrt-log corrected" : "");
  svg << "<text x=\"" << num(right - 4.0) << "\" y=\"" << num(top + 14.0)
      << "\" font-size=\"12\" text-anchor=\"end\">" << note << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace semr
