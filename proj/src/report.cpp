#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "portsim/csv.hpp"
#include "portsim/experiment.hpp"

namespace portsim {

namespace {

const std::vector<std::string> kCsvHeader{"condition", "algorithm", "group", "mean_utility", "pct_delta_vs_baseline"};

std::string csv_text(const AggregateResult& r, Stakeholder s) {
  std::ostringstream os;
  for (std::size_t i = 0; i < kCsvHeader.size(); ++i) os << (i ? "," : "") << kCsvHeader[i];
  os << '\n';
  for (const auto& row : r.rows) {
    if (row.stakeholder != s) continue;
    os << to_string(row.condition) << ',' << to_string(row.algorithm) << ',' << to_string(row.group) << ','
       << format_double(row.mean) << ',' << (row.pct_delta ? format_double(*row.pct_delta) : "") << '\n';
  }
  return os.str();
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string summary_text(const AggregateResult& r, const nlohmann::json& manifest) {
  std::ostringstream os;
  os << "# Portability experiment summary\n\n";
  if (manifest.contains("niche_genre")) os << "Niche genre: `" << manifest["niche_genre"].get<std::string>() << "`\n\n";
  os << "Means over the last " << r.eval_cycles << " cycles, averaged across seeds. "
     << "Deltas are relative to the baseline of the same algorithm.\n";
  for (auto s : {Stakeholder::Consumer, Stakeholder::Provider}) {
    os << "\n## " << (s == Stakeholder::Consumer ? "Consumer utility" : "Provider utility (clicks per provider per cycle)")
       << "\n\n| condition | algorithm | niche | generic |\n|---|---|---|---|\n";
    std::set<std::pair<Algorithm, Condition>> cells;
    for (const auto& row : r.rows)
      if (row.stakeholder == s) cells.insert({row.algorithm, row.condition});
    for (const auto& [a, c] : cells) {
      os << "| " << to_string(c) << " | " << to_string(a);
      for (auto g : {Group::Niche, Group::Generic}) {
        const auto* row = r.find(c, a, s, g);
        os << " | " << (row ? fixed(row->mean, 4) + " (" + format_delta(row->pct_delta) + ")" : std::string("-"));
      }
      os << " |\n";
    }
  }
  return os.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
  if (!out) throw Error("write failed for " + p.string());
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
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

}  // namespace

void export_results(const AggregateResult& result, const nlohmann::json& manifest, const std::filesystem::path& out_dir,
                    bool plots) {
  std::map<std::string, std::string> files;
  files["consumer_utility.csv"] = csv_text(result, Stakeholder::Consumer);
  files["provider_utility.csv"] = csv_text(result, Stakeholder::Provider);
  files["summary.md"] = summary_text(result, manifest);
  files["manifest.json"] = manifest.dump(2) + "\n";
  if (plots) {
    files["consumer_utility.svg"] = render_plot_svg(result, Stakeholder::Consumer);
    files["provider_utility.svg"] = render_plot_svg(result, Stakeholder::Provider);
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create output directory " + out_dir.string() + ": " + ec.message());
  const auto probe = out_dir / ".portsim-write-probe";
  {
    std::ofstream p(probe);
    if (!p) throw Error("output directory is not writable: " + out_dir.string());
  }
  std::filesystem::remove(probe, ec);
  for (const auto& [name, text] : files) write_file(out_dir / name, text);
}

std::vector<AggregateRow> read_result_csv(const std::filesystem::path& path, Stakeholder stakeholder) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  CsvReader reader(in, path.string());
  reader.expect_header(kCsvHeader);
  std::vector<AggregateRow> rows;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() != kCsvHeader.size()) reader.fail("expected 5 fields");
    AggregateRow r{};
    try {
      r.condition = parse_condition(f[0]);
      r.algorithm = parse_algorithm(f[1]);
      r.group = parse_group(f[2]);
      r.mean = std::stod(f[3]);
      if (!f[4].empty()) r.pct_delta = std::stod(f[4]);
    } catch (const std::exception& e) {
      reader.fail(e.what());
    }
    r.stakeholder = stakeholder;
    rows.push_back(r);
  }
  return rows;
}

std::string render_plot_svg(const AggregateResult& result, Stakeholder stakeholder) {
  std::vector<Algorithm> algos;
  std::vector<Condition> conds;
  double ymax = 0.0;
  for (const auto& r : result.rows) {
    if (r.stakeholder != stakeholder) continue;
    if (std::find(algos.begin(), algos.end(), r.algorithm) == algos.end()) algos.push_back(r.algorithm);
    if (r.condition != Condition::Baseline && std::find(conds.begin(), conds.end(), r.condition) == conds.end())
      conds.push_back(r.condition);
    ymax = std::max(ymax, r.mean);
  }
  std::sort(algos.begin(), algos.end());
  std::sort(conds.begin(), conds.end());
  if (ymax <= 0.0) ymax = 1.0;
  ymax *= 1.1;

  const double panel_w = 320, panel_h = 240, margin = 50, top = 40;
  const double width = margin + algos.size() * (panel_w + margin);
  const double height = top + panel_h + 80;
  const char* colors[2] = {"#d95f02", "#1b9e77"};  // niche, generic
  const Group groups[2] = {Group::Niche, Group::Generic};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<text x=\"" << margin << "\" y=\"20\" font-size=\"14\">"
     << (stakeholder == Stakeholder::Consumer ? "Consumer utility" : "Provider utility (clicks per provider per cycle)")
     << "</text>\n";
  for (std::size_t p = 0; p < algos.size(); ++p) {
    const double x0 = margin + p * (panel_w + margin);
    const double y0 = top + panel_h;
    auto ypos = [&](double v) { return y0 - v / ymax * panel_h; };
    os << "<g>\n<text x=\"" << x0 << "\" y=\"" << top - 4 << "\">" << xml_escape(to_string(algos[p])) << "</text>\n";
    os << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 + panel_w << "\" y2=\"" << y0
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << x0 << "\" y1=\"" << top << "\" x2=\"" << x0 << "\" y2=\"" << y0 << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double v = ymax * t / 4;
      os << "<text x=\"" << x0 - 4 << "\" y=\"" << ypos(v) + 3 << "\" text-anchor=\"end\">" << fixed(v, 3)
         << "</text>\n";
    }
    const double slot = conds.empty() ? panel_w : panel_w / conds.size();
    for (std::size_t c = 0; c < conds.size(); ++c) {
      for (int g = 0; g < 2; ++g) {
        const auto* r = result.find(conds[c], algos[p], stakeholder, groups[g]);
        if (!r) continue;
        const double bw = slot * 0.35;
        const double bx = x0 + c * slot + slot * 0.12 + g * bw;
        os << "<rect x=\"" << bx << "\" y=\"" << ypos(r->mean) << "\" width=\"" << bw << "\" height=\""
           << y0 - ypos(r->mean) << "\" fill=\"" << colors[g] << "\"><title>" << to_string(groups[g]) << ' '
           << fixed(r->mean, 4) << ' ' << format_delta(r->pct_delta) << "</title></rect>\n";
      }
      os << "<text x=\"" << x0 + (c + 0.5) * slot << "\" y=\"" << y0 + 14 << "\" text-anchor=\"middle\">"
         << xml_escape(to_string(conds[c])) << "</text>\n";
    }
    for (int g = 0; g < 2; ++g) {
      const auto* b = result.find(Condition::Baseline, algos[p], stakeholder, groups[g]);
      if (!b) continue;
      os << "<line x1=\"" << x0 << "\" y1=\"" << ypos(b->mean) << "\" x2=\"" << x0 + panel_w << "\" y2=\""
         << ypos(b->mean) << "\" stroke=\"" << colors[g] << "\" stroke-dasharray=\"5,3\"/>\n";
    }
    os << "</g>\n";
  }
  const double ly = height - 20;
  for (int g = 0; g < 2; ++g) {
    const double lx = margin + g * 160;
    os << "<rect x=\"" << lx << "\" y=\"" << ly - 9 << "\" width=\"10\" height=\"10\" fill=\"" << colors[g] << "\"/>"
       << "<text x=\"" << lx + 14 << "\" y=\"" << ly << "\">" << to_string(groups[g]) << " (dashed: baseline)</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace portsim
