#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "thermocap/experiments.hpp"

namespace thermocap {

namespace {

// NaN and inf are not JSON numbers
json num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << s;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

json report_to_json(const ExperimentReport& r) {
  json j;
  j["kind"] = to_string(r.config.kind);
  j["version"] = kVersion;
  j["config"] = r.config.raw;
  j["aggregates"] = r.aggregates;
  j["capacity"] = r.capacity;
  json v = json::array();
  for (const auto& x : r.verdicts)
    v.push_back(json{{"name", x.name}, {"value", num(x.value)}, {"target", num(x.target)},
                     {"tolerance", x.tolerance}, {"pass", x.pass}, {"note", x.note}});
  j["verdicts"] = v;
  json t = json::array();
  for (const auto& x : r.trials) {
    json e{{"trial", x.trial},
           {"stream", x.stream},
           {"hits", x.hits},
           {"dim_estimate", num(x.dim_estimate)},
           {"runtime_ms", x.runtime_ms}};
    if (!x.extra.is_null()) e["extra"] = x.extra;
    t.push_back(e);
  }
  j["trials"] = t;
  j["notes"] = r.notes;
  json p = json::array();
  for (const auto& x : r.plots) p.push_back(x.file);
  j["plots"] = p;
  return j;
}

std::string trials_csv(const std::vector<TrialRecord>& trials, bool with_runtime) {
  std::ostringstream out;
  out << "trial,stream,hits,dim_estimate,runtime_ms\n";
  for (const auto& t : trials) {
    out << t.trial << ',' << t.stream << ',' << t.hits << ','
        << (std::isnan(t.dim_estimate) ? std::string("nan") : fmt("%.9g", t.dim_estimate)) << ','
        << (with_runtime ? fmt("%.0f", t.runtime_ms) : std::string()) << '\n';
  }
  return out.str();
}

// FNV-1a over the canonical dump (object keys are sorted).
std::string config_hash(const json& config) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_svg_loglog(const PlotSeries& p, const std::string& file) {
  const double W = 520, H = 380, L = 70, R = 20, T = 40, B = 50;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < p.x.size(); ++i)
    if (p.x[i] > 0 && p.y[i] > 0) {
      lx.push_back(std::log10(p.x[i]));
      ly.push_back(std::log10(p.y[i]));
    }
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
    << p.title << "</text>\n";
  if (!lx.empty()) {
    double x0 = *std::min_element(lx.begin(), lx.end()), x1 = *std::max_element(lx.begin(), lx.end());
    double y0 = *std::min_element(ly.begin(), ly.end()), y1 = *std::max_element(ly.begin(), ly.end());
    if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
    double px = 0.05 * (x1 - x0), py = 0.05 * (y1 - y0);
    x0 -= px, x1 += px, y0 -= py, y1 += py;
    auto X = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
    auto Y = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };
    s << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (std::size_t i = 0; i < lx.size(); ++i)
      s << "<circle cx=\"" << X(lx[i]) << "\" cy=\"" << Y(ly[i]) << "\" r=\"3.5\" fill=\"steelblue\"/>\n";
    // fitted line: ln y = intercept + slope ln x
    auto fy = [&](double l10x) { return (p.intercept + p.slope * l10x * std::log(10.0)) / std::log(10.0); };
    s << "<line x1=\"" << X(x0) << "\" y1=\"" << Y(fy(x0)) << "\" x2=\"" << X(x1) << "\" y2=\"" << Y(fy(x1))
      << "\" stroke=\"firebrick\"/>\n";
    s << "<text x=\"" << L + 8 << "\" y=\"" << T + 18 << "\" font-family=\"sans-serif\" font-size=\"12\">slope "
      << fmt("%.4f", p.slope) << "</text>\n";
    s << "<text x=\"" << L << "\" y=\"" << H - B + 18 << "\" font-family=\"sans-serif\" font-size=\"11\">"
      << fmt("%.3g", std::pow(10.0, x0)) << "</text>\n";
    s << "<text x=\"" << W - R << "\" y=\"" << H - B + 18
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt("%.3g", std::pow(10.0, x1))
      << "</text>\n";
    s << "<text x=\"" << L - 6 << "\" y=\"" << H - B << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
      << "font-size=\"11\">" << fmt("%.3g", std::pow(10.0, y0)) << "</text>\n";
    s << "<text x=\"" << L - 6 << "\" y=\"" << T + 10 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
      << "font-size=\"11\">" << fmt("%.3g", std::pow(10.0, y1)) << "</text>\n";
  }
  s << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
    << "font-size=\"12\">" << p.xlabel << " (log)</text>\n";
  s << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
    << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << p.ylabel << " (log)</text>\n";
  s << "</svg>\n";
  write_text(file, s.str());
}

void write_report(const ExperimentReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir);
  fs::path base(dir);
  write_text(base / "report.json", report_to_json(r).dump(2) + "\n");
  write_text(base / "trials.csv", trials_csv(r.trials, r.config.record_runtime));
  json m{{"seed", r.config.seed}, {"version", kVersion}, {"config_hash", config_hash(r.config.raw)},
         {"kind", to_string(r.config.kind)}};
  write_text(base / "manifest.json", m.dump(2) + "\n");
  for (const auto& p : r.plots) write_svg_loglog(p, (base / p.file).string());
}

std::string summarize_report_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  fs::path f = fs::path(dir) / "report.json";
  std::ifstream in(f);
  if (!in) throw ConfigError("no report.json in " + dir);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("report.json: " + std::string(e.what()));
  }
  std::ostringstream s;
  s << "kind: " << j.value("kind", "?") << "  version: " << j.value("version", "?") << "\n";
  s << "trials: " << (j.contains("trials") ? j["trials"].size() : 0) << "\n";
  if (j.contains("verdicts"))
    for (const auto& v : j["verdicts"]) {
      s << (v.value("pass", false) ? "PASS " : "FAIL ") << v.value("name", "") << "  value=" << v["value"].dump()
        << " target=" << v["target"].dump() << " tol=" << v["tolerance"].dump();
      if (!v.value("note", "").empty()) s << "  (" << v["note"].get<std::string>() << ")";
      s << "\n";
    }
  return s.str();
}

}  // namespace thermocap
