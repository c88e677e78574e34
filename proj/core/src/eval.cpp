#include "parasent/eval.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace parasent {

std::vector<double> score_pairs(const EvalDataset& dataset,
                                const Encoder& encoder,
                                const ParameterSet<float>& params,
                                bool scale_to_range) {
  const auto lay = encoder.layout(params);
  std::vector<double> out;
  out.reserve(dataset.pairs.size());
  for (std::size_t i = 0; i < dataset.pairs.size(); ++i) {
    const auto& p = dataset.pairs[i];
    const auto a = encoder.embed(params, lay, p.first);
    const auto b = encoder.embed(params, lay, p.second);
    double c = 0.0;
    try {
      c = cosine(a, b);
    } catch (const DegenerateVectorError&) {
      throw DegenerateVectorError(dataset.name + ": pair " +
                                  std::to_string(i + 1) +
                                  " has a zero sentence embedding");
    }
    out.push_back(scale_to_range ? 2.5 * (c + 1.0) : c);
  }
  return out;
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  detail::require(x.size() == y.size(), "pearson_r", x.size(), y.size());
  if (x.size() < 2) throw RangeError("pearson_r needs at least 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericalError("zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    // Positions i..j (0-based) share ranks i+1..j+1.
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  detail::require(x.size() == y.size(), "spearman_rho", x.size(), y.size());
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson_r(rx, ry);
}

const Manifest::Group* Manifest::find(const std::string& name) const {
  for (const auto& g : groups) {
    if (g.name == name) return &g;
  }
  return nullptr;
}

namespace {
std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}
}  // namespace

Manifest parse_manifest(std::istream& in) {
  Manifest m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const auto body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto colon = body.find(':');
    if (colon == std::string::npos) {
      throw FormatError("expected 'group: file, ...'", line_no);
    }
    Manifest::Group g;
    g.name = trim(std::string_view(body).substr(0, colon));
    if (g.name.empty()) throw FormatError("empty group name", line_no);
    if (m.find(g.name)) {
      throw FormatError("duplicate group '" + g.name + "'", line_no);
    }
    std::stringstream files(body.substr(colon + 1));
    std::string file;
    while (std::getline(files, file, ',')) {
      auto f = trim(file);
      if (!f.empty()) g.files.push_back(std::move(f));
    }
    if (g.files.empty()) {
      throw FormatError("group '" + g.name + "' lists no files", line_no);
    }
    m.groups.push_back(std::move(g));
  }
  if (m.groups.empty()) throw FormatError("manifest declares no groups");
  return m;
}

const DatasetScore* EvalReport::find(const std::string& name) const {
  for (const auto& d : datasets) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

std::vector<std::pair<std::string, double>> EvalReport::group_means(
    const Manifest& manifest) const {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& g : manifest.groups) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& f : g.files) {
      if (const auto* d = find(f)) {
        sum += d->pearson;
        ++n;
      }
    }
    if (n > 0) out.emplace_back(g.name, sum / static_cast<double>(n));
  }
  return out;
}

EvalReport evaluate_datasets(const std::string& configuration,
                             std::span<const EvalDataset> datasets,
                             const Manifest& manifest, const Encoder& encoder,
                             const ParameterSet<float>& params) {
  EvalReport report;
  report.configuration = configuration;
  for (const auto& ds : datasets) {
    if (ds.pairs.empty()) {
      throw FormatError("dataset '" + ds.name + "' is empty");
    }
    const auto predicted = score_pairs(ds, encoder, params, false);
    std::vector<double> gold;
    gold.reserve(ds.pairs.size());
    for (const auto& p : ds.pairs) gold.push_back(p.gold);
    DatasetScore s;
    s.name = ds.name;
    s.pairs = ds.pairs.size();
    for (const auto& g : manifest.groups) {
      if (std::find(g.files.begin(), g.files.end(), ds.name) != g.files.end()) {
        s.group = g.name;
        break;
      }
    }
    s.pearson = pearson_r(predicted, gold);
    s.spearman = spearman_rho(predicted, gold);
    report.datasets.push_back(std::move(s));
  }
  std::sort(report.datasets.begin(), report.datasets.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });
  return report;
}

SelectionMode parse_selection_mode(std::string_view name) {
  const auto n = to_lower(name);
  if (n == "test") return SelectionMode::Test;
  if (n == "oracle") return SelectionMode::Oracle;
  throw ConfigError("unknown selection mode '" + std::string(name) +
                    "' (expected test or oracle)");
}

std::string to_string(SelectionMode mode) {
  return mode == SelectionMode::Test ? "test" : "oracle";
}

Selection aggregate(std::span<const EvalReport> reports, SelectionMode mode,
                    const Manifest& manifest,
                    const std::string& held_out_group) {
  if (reports.empty()) throw ConfigError("aggregate: no configurations");
  const Manifest::Group* held_out = nullptr;
  if (!held_out_group.empty()) {
    held_out = manifest.find(held_out_group);
    if (!held_out) {
      throw ConfigError("held-out group '" + held_out_group +
                        "' not in manifest");
    }
  }
  if (mode == SelectionMode::Test && !held_out) {
    throw ConfigError("test selection requires a held-out group");
  }

  Selection sel;
  if (mode == SelectionMode::Test) {
    sel.selection_datasets = held_out->files;
  } else {
    for (const auto& g : manifest.groups) {
      if (held_out && g.name == held_out->name) continue;
      sel.selection_datasets.insert(sel.selection_datasets.end(),
                                    g.files.begin(), g.files.end());
    }
  }
  if (sel.selection_datasets.empty()) {
    throw ConfigError("aggregate: no datasets to select on");
  }

  for (const auto& r : reports) {
    double sum = 0.0;
    for (const auto& name : sel.selection_datasets) {
      const auto* d = r.find(name);
      if (!d) {
        throw ConfigError("configuration '" + r.configuration +
                          "' is missing dataset '" + name + "'");
      }
      sum += d->pearson;
    }
    sel.criterion.push_back(sum /
                            static_cast<double>(sel.selection_datasets.size()));
  }
  sel.winner = static_cast<std::size_t>(
      std::max_element(sel.criterion.begin(), sel.criterion.end()) -
      sel.criterion.begin());
  return sel;
}

void write_report_tsv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "configuration\tdataset\tgroup\tpairs\tpearson\tspearman\n";
  const auto old = out.precision(10);
  for (const auto& r : reports) {
    for (const auto& d : r.datasets) {
      out << r.configuration << '\t' << d.name << '\t' << d.group << '\t'
          << d.pairs << '\t' << d.pearson << '\t' << d.spearman << '\n';
    }
  }
  out.precision(old);
}

void write_report_text(std::ostream& out, std::span<const EvalReport> reports,
                       const Manifest& manifest, const Selection* selection,
                       SelectionMode mode) {
  std::size_t width = 8;
  for (const auto& r : reports) {
    for (const auto& d : r.datasets) width = std::max(width, d.name.size());
  }
  const auto flags = out.flags();
  for (std::size_t c = 0; c < reports.size(); ++c) {
    const auto& r = reports[c];
    out << "configuration: " << r.configuration;
    if (selection) {
      out << "  (" << to_string(mode) << " criterion "
          << std::fixed << std::setprecision(2)
          << 100.0 * selection->criterion[c] << ")";
      if (selection->winner == c) out << "  <- selected";
    }
    out << '\n';
    out << "  " << std::left << std::setw(static_cast<int>(width)) << "dataset"
        << std::right << std::setw(10) << "pearson" << std::setw(10)
        << "spearman" << '\n';
    for (const auto& d : r.datasets) {
      out << "  " << std::left << std::setw(static_cast<int>(width)) << d.name
          << std::right << std::fixed << std::setprecision(2) << std::setw(10)
          << 100.0 * d.pearson << std::setw(10) << 100.0 * d.spearman << '\n';
    }
    for (const auto& [group, mean] : r.group_means(manifest)) {
      out << "  " << std::left << std::setw(static_cast<int>(width))
          << (group + " avg") << std::right << std::fixed
          << std::setprecision(2) << std::setw(10) << 100.0 * mean << '\n';
    }
  }
  out.flags(flags);
}

}  // namespace parasent
