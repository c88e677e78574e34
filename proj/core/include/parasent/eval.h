#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "parasent/encoders.h"

namespace parasent {

struct EvalPair {
  TokenSequence first;
  TokenSequence second;
  double gold = 0.0;  // [0, 5]
};

struct EvalDataset {
  std::string name;
  std::vector<EvalPair> pairs;
};

// cos(g(s1), g(s2)) per pair; with `scale_to_range`, mapped to 2.5 (c + 1).
std::vector<double> score_pairs(const EvalDataset& dataset,
                                const Encoder& encoder,
                                const ParameterSet<float>& params,
                                bool scale_to_range = false);

double pearson_r(std::span<const double> x, std::span<const double> y);
// Pearson on fractional ranks; ties share their average rank.
double spearman_rho(std::span<const double> x, std::span<const double> y);
std::vector<double> average_ranks(std::span<const double> x);

// `group: file1, file2, ...` lines; '#' starts a comment.
struct Manifest {
  struct Group {
    std::string name;
    std::vector<std::string> files;
  };
  std::vector<Group> groups;

  const Group* find(const std::string& name) const;
};

Manifest parse_manifest(std::istream& in);

struct DatasetScore {
  std::string name;
  std::string group;
  std::size_t pairs = 0;
  double pearson = 0.0;
  double spearman = 0.0;
};

struct EvalReport {
  std::string configuration;
  std::vector<DatasetScore> datasets;  // sorted by dataset name

  const DatasetScore* find(const std::string& name) const;
  // Mean Pearson per manifest group, in manifest order.
  std::vector<std::pair<std::string, double>> group_means(
      const Manifest& manifest) const;
};

EvalReport evaluate_datasets(const std::string& configuration,
                             std::span<const EvalDataset> datasets,
                             const Manifest& manifest, const Encoder& encoder,
                             const ParameterSet<float>& params);

enum class SelectionMode { Test, Oracle };

SelectionMode parse_selection_mode(std::string_view name);
std::string to_string(SelectionMode mode);

struct Selection {
  std::size_t winner = 0;
  std::vector<double> criterion;  // per configuration
  std::vector<std::string> selection_datasets;
};

// TEST: mean Pearson over the held-out group's datasets. ORACLE: mean over
// every evaluation dataset outside the held-out group (all datasets when the
// group is empty). Ties go to the earliest configuration.
Selection aggregate(std::span<const EvalReport> reports, SelectionMode mode,
                    const Manifest& manifest,
                    const std::string& held_out_group);

void write_report_tsv(std::ostream& out, std::span<const EvalReport> reports);
void write_report_text(std::ostream& out, std::span<const EvalReport> reports,
                       const Manifest& manifest, const Selection* selection,
                       SelectionMode mode);

}  // namespace parasent
