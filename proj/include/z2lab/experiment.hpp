#pragma once
// Configuration-driven experiment runner: plain key=value configs, tabular results
// written as CSV with a JSON provenance sidecar.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "z2lab/mc.hpp"
#include "z2lab/model.hpp"

namespace z2lab {

class ParseError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { Verify, Constants, Exact, MonteCarlo, Scan, Cluster, FreeReport };

ExperimentKind parse_experiment_kind(const std::string& s);
const char* experiment_kind_name(ExperimentKind k);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Verify;
  int m = 3;
  int N = 2;
  std::string lattice = "box";                 // box | single_edge | single_plaquette | cube2 | slab
  std::vector<double> betas{0.3}, kappas{0.4};  // grid = cartesian product
  std::vector<std::pair<int, int>> sizes{{1, 1}};
  std::vector<std::vector<int>> path;          // vertex walk; empty: a default path
  RunConfig run;
  std::string observable = "ratio";            // mc: ratio | correlation
  std::vector<int> separations{1, 2, 3, 4, 5};
  int axis = 0;
  // truncation / bounds
  std::string phase = "higgs";                 // cluster: higgs | confinement
  std::string mode = "logrho";                 // cluster: logz | logwilson | logrho | covariance
  int n_max = 3, size_max = 6;
  double eps = 0.1, slack = 0.0, alpha = 0.5;
  int rows = 8, enumerate_max = 0;
  bool exact = false;
  bool require_admissible = true;
  int d0_exponent = -1;
  std::string out;                             // output prefix; empty: the kind name

  std::vector<ModelParams> grid() const;
  // Resolved configuration as ordered key=value lines (also the hash input).
  std::map<std::string, std::string> resolved() const;
  std::string canonical() const;
  std::uint64_t hash() const;
};

// Parse key=value text ('#' comments, blank lines ignored). Unknown keys, duplicate keys
// and malformed values raise ParseError.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});
// Apply one key=value assignment.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

using Value = std::variant<long long, double, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;
  std::map<std::string, Value> summary;  // scalar results that are not per row
};

std::string format_value(const Value& v);
std::string to_csv(const Table& t);
// CSV text back into string cells (header excluded).
std::vector<std::vector<std::string>> parse_csv(const std::string& text, std::vector<std::string>* header = nullptr);

struct RunArtifacts {
  std::string csv_path, json_path;
  Table table;
};

// Run an experiment and return its table (no files written).
Table run_table(const ExperimentConfig& cfg);
// Run and write <out>.csv and <out>.json. Throws std::runtime_error for empty results.
RunArtifacts run(const ExperimentConfig& cfg);
// Write the CSV and the JSON sidecar for a finished table.
RunArtifacts emit_report(const ExperimentConfig& cfg, const Table& t);

const char* build_id();

}  // namespace z2lab
