#include "memristor/plot.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace memristor {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Series {
  std::vector<double> x, y;
  std::string color;
  std::string label;
};

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(const std::vector<double>& v) {
    for (double a : v) {
      if (std::isfinite(a)) {
        lo = std::min(lo, a);
        hi = std::max(hi, a);
      }
    }
  }
  // Pads flat or empty ranges so the mapping stays finite.
  void settle() {
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
      const double pad = std::max(1e-9, 0.05 * std::abs(hi));
      lo -= pad;
      hi += pad;
    }
  }
};

// One plot panel placed at (ox, oy) with size (w, h) inside an SVG document.
class Panel {
 public:
  Panel(double ox, double oy, double w, double h) : ox_(ox), oy_(oy), w_(w), h_(h) {}

  void draw(std::ostringstream& svg, const std::string& title, const std::string& xlabel,
            const std::vector<Series>& left, const std::string& left_label, const std::vector<Series>& right = {},
            const std::string& right_label = {}) const {
    Range xr, yl, yr;
    for (const auto& s : left) xr.add(s.x), yl.add(s.y);
    for (const auto& s : right) xr.add(s.x), yr.add(s.y);
    xr.settle();
    yl.settle();
    yr.settle();
    const double x0 = ox_ + 88, x1 = ox_ + w_ - (right.empty() ? 20 : 80), y0 = oy_ + h_ - 45, y1 = oy_ + 30;
    auto X = [&](double v) { return x0 + (v - xr.lo) / (xr.hi - xr.lo) * (x1 - x0); };
    auto Y = [&](const Range& r, double v) { return y0 - (v - r.lo) / (r.hi - r.lo) * (y0 - y1); };

    svg << "<text x=\"" << px(0.5 * (x0 + x1)) << "\" y=\"" << px(oy_ + 18)
        << "\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    svg << "<rect x=\"" << px(x0) << "\" y=\"" << px(y1) << "\" width=\"" << px(x1 - x0) << "\" height=\""
        << px(y0 - y1) << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
      svg << "<text x=\"" << px(X(fx)) << "\" y=\"" << px(y0 + 16) << "\" text-anchor=\"middle\" font-size=\"11\">"
          << num(fx) << "</text>\n";
      const double fy = yl.lo + (yl.hi - yl.lo) * i / 4.0;
      svg << "<text x=\"" << px(x0 - 5) << "\" y=\"" << px(Y(yl, fy) + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
          << num(fy) << "</text>\n";
      if (!right.empty()) {
        const double fr = yr.lo + (yr.hi - yr.lo) * i / 4.0;
        svg << "<text x=\"" << px(x1 + 5) << "\" y=\"" << px(Y(yr, fr) + 4) << "\" font-size=\"11\">" << num(fr)
            << "</text>\n";
      }
    }
    svg << "<text x=\"" << px(0.5 * (x0 + x1)) << "\" y=\"" << px(y0 + 34)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel << "</text>\n";
    svg << "<text x=\"" << px(ox_ + 12) << "\" y=\"" << px(0.5 * (y0 + y1)) << "\" font-size=\"12\" transform=\"rotate(-90 "
        << px(ox_ + 12) << ' ' << px(0.5 * (y0 + y1)) << ")\" text-anchor=\"middle\">" << left_label << "</text>\n";
    if (!right.empty()) {
      svg << "<text x=\"" << px(ox_ + w_ - 8) << "\" y=\"" << px(0.5 * (y0 + y1)) << "\" font-size=\"12\" transform=\"rotate(90 "
          << px(ox_ + w_ - 8) << ' ' << px(0.5 * (y0 + y1)) << ")\" text-anchor=\"middle\">" << right_label << "</text>\n";
    }
    auto line = [&](const Series& s, const Range& r, bool dashed) {
      svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
          << (dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.y[i])) continue;
        svg << px(X(s.x[i])) << ',' << px(Y(r, s.y[i])) << ' ';
      }
      svg << "\"/>\n";
    };
    double ly = y1 + 14;
    auto legend = [&](const Series& s, bool dashed) {
      if (s.label.empty()) return;
      svg << "<line x1=\"" << px(x1 - 120) << "\" y1=\"" << px(ly - 4) << "\" x2=\"" << px(x1 - 100) << "\" y2=\""
          << px(ly - 4) << "\" stroke=\"" << s.color << "\" stroke-width=\"1.5\"" << (dashed ? " stroke-dasharray=\"5,3\"" : "")
          << "/>\n<text x=\"" << px(x1 - 95) << "\" y=\"" << px(ly) << "\" font-size=\"11\">" << s.label << "</text>\n";
      ly += 14;
    };
    for (const auto& s : left) line(s, yl, false), legend(s, false);
    for (const auto& s : right) line(s, yr, true), legend(s, true);
  }

 private:
  double ox_, oy_, w_, h_;
};

// log10 of every series when all values are positive and span more than
// three decades; the axis label gets a "log10" prefix.
void maybe_log(std::vector<Series>& series, std::string& label) {
  Range r;
  for (const auto& s : series) r.add(s.y);
  if (!(r.lo > 0.0) || r.hi / r.lo <= 1e3) return;
  for (auto& s : series) {
    for (double& v : s.y) v = std::log10(v);
  }
  label = "log10 " + label;
}

std::string open_svg(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(w) + "\" height=\"" + px(h) +
         "\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void save(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw PlotError("cannot write " + path.string());
  out << text;
}

}  // namespace

std::vector<double> CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw PlotError("missing column '" + name + "'");
  const auto k = static_cast<std::size_t>(it - header.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

bool CsvTable::has(const std::string& name) const { return std::find(header.begin(), header.end(), name) != header.end(); }

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw PlotError("cannot read " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw PlotError(path.string() + " is empty");
  std::istringstream h(line);
  for (std::string cell; std::getline(h, cell, ',');) t.header.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream r(line);
    for (std::string cell; std::getline(r, cell, ',');) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      row.push_back(end == cell.c_str() ? std::numeric_limits<double>::quiet_NaN() : v);
    }
    if (row.size() != t.header.size()) throw PlotError(path.string() + ": ragged row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<fs::path> plot_run(const fs::path& run_dir) {
  const fs::path steps_path = run_dir / "steps.csv";
  if (!fs::exists(steps_path)) throw PlotError("no steps.csv in " + run_dir.string());
  const CsvTable steps = read_csv(steps_path);
  if (steps.rows.empty()) throw PlotError(steps_path.string() + " has no rows");

  double Lambda = -1.0;
  if (fs::exists(run_dir / "summary.json")) {
    std::ifstream in(run_dir / "summary.json");
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (!j.is_discarded() && j.contains("Lambda")) Lambda = j["Lambda"].get<double>();
  }

  const fs::path out_dir = run_dir / "plots";
  fs::create_directories(out_dir);
  std::vector<fs::path> written;

  const auto t = steps.column("t");
  const auto E = steps.column("E");
  {
    std::string title = "free energy";
    if (Lambda == 0.0) {
      bool monotone = true;
      for (std::size_t i = 1; i < E.size(); ++i) monotone = monotone && E[i] <= E[i - 1] + 1e-9;
      title += monotone ? " (Lambda = 0, nonincreasing)" : " (Lambda = 0, NOT monotone)";
    } else if (Lambda > 0.0) {
      title += " (Lambda = " + num(Lambda) + ")";
    }
    // skip the initial row for dissipation, it belongs to no step
    Series diss{{t.begin() + 1, t.end()}, {}, kColors[1], "dissipation"};
    const auto d = steps.column("dissipation");
    diss.y.assign(d.begin() + 1, d.end());
    std::vector<Series> left{{t, E, kColors[0], "E"}}, right{diss};
    std::string left_label = "E", right_label = "dissipation";
    maybe_log(left, left_label);
    maybe_log(right, right_label);
    std::ostringstream svg;
    svg << open_svg(720, 420);
    Panel(0, 0, 720, 420).draw(svg, title, "t", left, left_label, right, right_label);
    svg << "</svg>\n";
    save(out_dir / "energy.svg", svg.str());
    written.push_back(out_dir / "energy.svg");
  }
  {
    std::ostringstream svg;
    svg << open_svg(720, 420);
    Panel(0, 0, 720, 420).draw(svg, "vacancy mass", "t", {{t, steps.column("mass_D"), kColors[2], ""}}, "mass_D");
    svg << "</svg>\n";
    save(out_dir / "mass_D.svg", svg.str());
    written.push_back(out_dir / "mass_D.svg");
  }

  const fs::path index_path = run_dir / "states" / "index.csv";
  if (fs::exists(index_path)) {
    std::ifstream in(index_path);
    std::string line;
    std::getline(in, line);
    std::vector<std::pair<std::string, std::string>> dumps;
    while (std::getline(in, line)) {
      const auto comma = line.find(',');
      if (comma != std::string::npos) dumps.emplace_back(line.substr(0, comma), line.substr(comma + 1));
    }
    if (!dumps.empty()) {
      const std::vector<std::string> fields{"n", "p", "D", "V"};
      std::map<std::string, std::vector<Series>> panels;
      bool two_d = false;
      for (std::size_t k = 0; k < dumps.size(); ++k) {
        const CsvTable s = read_csv(run_dir / "states" / dumps[k].first);
        auto x = s.column("x");
        std::vector<std::size_t> keep(x.size());
        for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
        if (s.has("y")) {
          // 2D: the row of cells closest to mid-height
          two_d = true;
          const auto y = s.column("y");
          const double mid = 0.5 * (*std::min_element(y.begin(), y.end()) + *std::max_element(y.begin(), y.end()));
          double best = std::numeric_limits<double>::infinity();
          for (double v : y) best = std::min(best, std::abs(v - mid));
          keep.clear();
          for (std::size_t i = 0; i < y.size(); ++i) {
            if (std::abs(std::abs(y[i] - mid) - best) <= 1e-12 && (keep.empty() || y[i] == y[keep.front()])) keep.push_back(i);
          }
        }
        const char* color = kColors[k % (sizeof kColors / sizeof *kColors)];
        for (const auto& f : fields) {
          const auto v = s.column(f);
          Series ser{{}, {}, color, "t = " + num(std::strtod(dumps[k].second.c_str(), nullptr))};
          for (std::size_t i : keep) ser.x.push_back(x[i]), ser.y.push_back(v[i]);
          panels[f].push_back(std::move(ser));
        }
      }
      std::ostringstream svg;
      svg << open_svg(960, 720);
      const std::string xlabel = two_d ? "x (mid-height row)" : "x";
      for (std::size_t k = 0; k < fields.size(); ++k) {
        Panel(480.0 * static_cast<double>(k % 2), 360.0 * static_cast<double>(k / 2), 480, 360)
            .draw(svg, fields[k] + " profiles", xlabel, panels[fields[k]], fields[k]);
      }
      svg << "</svg>\n";
      save(out_dir / "profiles.svg", svg.str());
      written.push_back(out_dir / "profiles.svg");
    }
  }
  return written;
}

}  // namespace memristor
