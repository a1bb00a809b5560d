#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "gdv/error.hpp"
#include "gdv/io.hpp"

namespace gdv {
namespace {

constexpr const char *kPalette[10] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                      "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;  // room for the legend
constexpr double kTop = 40.0;
constexpr double kBottom = 55.0;

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double margin = 0.05 * (hi - lo);
    lo -= margin;
    hi += margin;
  }
};

class Canvas {
 public:
  Canvas(Range x, Range y) : x_(x), y_(y) {}

  double px(double v) const { return kLeft + (v - x_.lo) / (x_.hi - x_.lo) * (kWidth - kLeft - kRight); }
  double py(double v) const { return kHeight - kBottom - (v - y_.lo) / (y_.hi - y_.lo) * (kHeight - kTop - kBottom); }

  void frame(std::ostream &out, const std::string &title, const std::string &x_label,
             const std::string &y_label) const {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty()) {
      out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
          << "</text>\n";
    }
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    out << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\"" << y0 - y1
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double xv = x_.lo + (x_.hi - x_.lo) * t / 4.0;
      const double yv = y_.lo + (y_.hi - y_.lo) * t / 4.0;
      out << "<text x=\"" << num(px(xv)) << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\">" << num(xv)
          << "</text>\n";
      out << "<text x=\"" << x0 - 6 << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">" << num(yv)
          << "</text>\n";
    }
    if (!x_label.empty()) {
      out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 14 << "\" text-anchor=\"middle\">"
          << escape(x_label) << "</text>\n";
    }
    if (!y_label.empty()) {
      out << "<text transform=\"translate(18," << (y0 + y1) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
          << escape(y_label) << "</text>\n";
    }
  }

  static void legend(std::ostream &out, std::size_t slot, const std::string &colour, const std::string &name) {
    const double x = kWidth - kRight + 15;
    const double y = kTop + 10 + 18.0 * static_cast<double>(slot);
    out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"12\" height=\"12\" fill=\"" << colour << "\"/>\n";
    out << "<text x=\"" << x + 18 << "\" y=\"" << y + 10 << "\">" << escape(name) << "</text>\n";
  }

 private:
  Range x_;
  Range y_;
};

void save(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot create " + path.string());
  out << text;
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace

LineSeries curve_series(std::string name, const GdvCurve &curve) {
  LineSeries series{std::move(name), {}, {}};
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    series.x.push_back(static_cast<double>(i));
    series.y.push_back(curve.points[i].gdv);
  }
  return series;
}

void write_svg_scatter(const std::filesystem::path &path, const Projection2D &projection,
                       std::span<const Label> labels, const std::string &title) {
  if (projection.sample_indices.size() != static_cast<std::size_t>(projection.coords.rows())) {
    throw Error(ErrorKind::ShapeMismatch, "projection rows and sample indices differ");
  }
  Range xr, yr;
  std::map<Label, std::size_t> slots;
  for (Eigen::Index i = 0; i < projection.coords.rows(); ++i) {
    xr.add(projection.coords(i, 0));
    yr.add(projection.coords(i, 1));
    const std::size_t source = projection.sample_indices[static_cast<std::size_t>(i)];
    if (source >= labels.size()) throw Error(ErrorKind::ShapeMismatch, "label vector shorter than the input");
    slots.emplace(labels[source], 0);
  }
  std::size_t next = 0;
  for (auto &[label, slot] : slots) slot = next++;
  xr.pad();
  yr.pad();

  const Canvas canvas(xr, yr);
  std::ostringstream out;
  canvas.frame(out, title, "component 1", "component 2");
  for (Eigen::Index i = 0; i < projection.coords.rows(); ++i) {
    const Label label = labels[projection.sample_indices[static_cast<std::size_t>(i)]];
    out << "<circle cx=\"" << num(canvas.px(projection.coords(i, 0))) << "\" cy=\""
        << num(canvas.py(projection.coords(i, 1))) << "\" r=\"2\" fill=\"" << kPalette[slots[label] % 10]
        << "\" fill-opacity=\"0.7\"/>\n";
  }
  for (const auto &[label, slot] : slots) Canvas::legend(out, slot, kPalette[slot % 10], "class " + std::to_string(label));
  out << "</svg>\n";
  save(path, out.str());
}

void write_svg_lines(const std::filesystem::path &path, std::span<const LineSeries> series, const std::string &title,
                     const std::string &x_label, const std::string &y_label) {
  Range xr, yr;
  for (const auto &s : series) {
    if (s.x.size() != s.y.size()) throw Error(ErrorKind::ShapeMismatch, "series '" + s.name + "' has unequal x and y");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!s.y[i]) continue;
      xr.add(s.x[i]);
      yr.add(*s.y[i]);
    }
  }
  xr.pad();
  yr.pad();

  const Canvas canvas(xr, yr);
  std::ostringstream out;
  canvas.frame(out, title, x_label, y_label);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto &s = series[k];
    const char *colour = kPalette[k % 10];
    // Missing values split the polyline.
    std::string points;
    auto flush = [&] {
      if (!points.empty()) {
        out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"" << points
            << "\"/>\n";
      }
      points.clear();
    };
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!s.y[i]) {
        flush();
        continue;
      }
      const double x = canvas.px(s.x[i]);
      const double y = canvas.py(*s.y[i]);
      points += num(x) + ',' + num(y) + ' ';
      out << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
    }
    flush();
    Canvas::legend(out, k, colour, s.name);
  }
  out << "</svg>\n";
  save(path, out.str());
}

}  // namespace gdv
