#include "sentlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "sentlab/errors.hpp"

namespace sentlab::eval {

namespace {

std::string fmt6(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// "concat:3" -> (concat, 3); "encoder" -> (encoder, 0)
bool parse_spec_n(const std::string& spec, std::string& space, uint32_t& n) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) {
    space = spec;
    n = 0;
    return spec == "encoder";
  }
  space = spec.substr(0, colon);
  n = uint32_t(std::stoul(spec.substr(colon + 1)));
  return true;
}

}  // namespace

std::string render_report_csv(std::span<const EvalReport> reports) {
  std::ostringstream out;
  out << "dataset,encoder,decoder,spec,similarity,pearson,spearman,accuracy,seed\n";
  for (const auto& r : reports) {
    out << r.dataset << ',' << r.encoder << ',' << r.decoder << ',' << r.spec
        << ',' << r.similarity << ',' << fmt6(r.pearson) << ','
        << fmt6(r.spearman) << ',' << fmt6(r.accuracy) << ',' << r.seed
        << '\n';
  }
  return out.str();
}

std::string render_report_svg(std::span<const EvalReport> reports) {
  // collect sweep series: space name -> metric -> (n -> value)
  struct Series {
    std::map<uint32_t, double> points;
  };
  std::map<std::string, Series> series;
  std::optional<double> base_pearson, base_spearman;
  double lo = 1e300, hi = -1e300;
  uint32_t n_max = 0;
  auto feed = [&](double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  };
  for (const auto& r : reports) {
    std::string space;
    uint32_t n = 0;
    if (!parse_spec_n(r.spec, space, n)) continue;
    if (space == "encoder") {
      if (r.pearson) base_pearson = *r.pearson;
      if (r.spearman) base_spearman = *r.spearman;
      if (r.pearson) feed(*r.pearson);
      if (r.spearman) feed(*r.spearman);
      continue;
    }
    n_max = std::max(n_max, n);
    if (r.pearson) {
      series[space + "/pearson"].points[n] = *r.pearson;
      feed(*r.pearson);
    }
    if (r.spearman) {
      series[space + "/spearman"].points[n] = *r.spearman;
      feed(*r.spearman);
    }
  }
  if (series.empty() || n_max == 0)
    throw DataError("emit_report: no sweep rows to chart");
  if (hi <= lo) {
    hi = lo + 1e-3;
  }
  const double pad = 0.1 * (hi - lo);
  lo -= pad;
  hi += pad;

  const double width = 640, height = 420;
  const double ml = 60, mr = 20, mt = 20, mb = 45;
  auto sx = [&](double n) {
    return n_max == 1 ? ml + (width - ml - mr) / 2
                      : ml + (n - 1) / double(n_max - 1) * (width - ml - mr);
  };
  auto sy = [&](double v) {
    return mt + (hi - v) / (hi - lo) * (height - mt - mb);
  };

  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b"};
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\""
      << width - mr << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  for (uint32_t n = 1; n <= n_max; ++n) {
    out << "<text x=\"" << sx(n) << "\" y=\"" << height - mb + 18
        << "\" font-size=\"11\" text-anchor=\"middle\">" << n << "</text>\n";
  }
  out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 8
      << "\" font-size=\"12\" text-anchor=\"middle\">unroll steps</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    out << "<text x=\"" << ml - 6 << "\" y=\"" << sy(v) + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << fmt2(v)
        << "</text>\n";
  }
  // baselines from the raw encoder output
  auto baseline = [&](std::optional<double> v, const char* label, double ty) {
    if (!v) return;
    out << "<line x1=\"" << ml << "\" y1=\"" << sy(*v) << "\" x2=\""
        << width - mr << "\" y2=\"" << sy(*v)
        << "\" stroke=\"#999\" stroke-dasharray=\"5,4\"/>\n";
    out << "<text x=\"" << width - mr - 4 << "\" y=\"" << sy(*v) + ty
        << "\" font-size=\"10\" text-anchor=\"end\" fill=\"#666\">" << label
        << "</text>\n";
  };
  baseline(base_pearson, "encoder pearson", -4);
  baseline(base_spearman, "encoder spearman", 12);
  // series
  size_t color_idx = 0;
  double legend_y = mt + 10;
  for (const auto& [name, s] : series) {
    const char* color = kColors[color_idx++ % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& [n, v] : s.points) {
      if (!first) out << ' ';
      out << sx(n) << ',' << sy(v);
      first = false;
    }
    out << "\"/>\n";
    out << "<line x1=\"" << ml + 8 << "\" y1=\"" << legend_y << "\" x2=\""
        << ml + 28 << "\" y2=\"" << legend_y << "\" stroke=\"" << color
        << "\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << ml + 33 << "\" y=\"" << legend_y + 4
        << "\" font-size=\"11\">" << name << "</text>\n";
    legend_y += 16;
  }
  out << "</svg>\n";
  return out.str();
}

void emit_report(std::span<const EvalReport> reports, ReportFormat format,
                 const std::string& path) {
  if (reports.empty()) throw DataError("emit_report: no reports");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("emit_report: cannot write " + path);
  out << (format == ReportFormat::csv ? render_report_csv(reports)
                                      : render_report_svg(reports));
  out.flush();
  if (!out) throw DataError("emit_report: write failed for " + path);
}

}  // namespace sentlab::eval
