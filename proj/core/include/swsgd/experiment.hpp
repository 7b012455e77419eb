#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "swsgd/document.hpp"
#include "swsgd/measures.hpp"
#include "swsgd/network.hpp"
#include "swsgd/sgd.hpp"
#include "swsgd/swloss.hpp"
#include "swsgd/trajectory.hpp"

namespace swsgd {

struct FlowSettings {
  int k_max = 8;
  int grid_per_unit = 200;
  /// Euler step of the reference flow; 0 picks min(alphas) / 50.
  double step = 0.0;
  bool check = true;
};

struct CriticalitySettings {
  /// Continuous-time length of each run; 0 keeps sgd.t_max for every alpha.
  double horizon = 0.0;
  double tail_fraction = 0.25;
  int gap_points = 50;
  bool check = true;
  /// Smallest-alpha median gap must fall below this fraction of the initial gradient norm.
  double final_ratio = 0.2;
};

struct VerifySettings {
  int gradient_probes = 100;
  int sorting_instances = 1000;
  int lipschitz_instances = 20;
  long lipschitz_pairs = 10000;
  int p_instances = 500;
  int projection_seeds = 10;
  std::uint64_t seed = 7;
};

/// Parsed experiment document. `document` keeps the effective key/value set
/// (file contents plus overrides) and is what every artifact echoes.
struct ExperimentConfig {
  Document document;
  NetworkSpec network;
  std::optional<DiscreteMeasure> mx;
  std::optional<DiscreteMeasure> my;
  SGDConfig sgd;
  std::vector<double> alphas;
  std::vector<std::uint64_t> seeds;
  PopulationMode population;
  FlowSettings flow;
  CriticalitySettings criticality;
  VerifySettings verify;
  /// "auto": second-derivative probe; a number: used as M̂; 0: no threshold check.
  std::string m_hat = "auto";
  std::filesystem::path out_dir = "out";
  int workers = 1;

  /// Relative measure paths are resolved against `base_dir` and stored back
  /// into the document as absolute paths. Throws naming the first missing
  /// file when `require_measures` is set.
  static ExperimentConfig from_document(Document doc, const std::filesystem::path& base_dir,
                                        bool require_measures = true);

  /// Document echo for one (alpha, seed) run: sweep lists collapsed to the
  /// run's values; output and worker settings omitted.
  std::string echo(double alpha, std::uint64_t seed) const;
  /// Echo of the whole sweep.
  std::string echo() const;
};

/// Reads a config file; a CSV artifact is accepted too (its `#` header echo is parsed).
Document load_config_document(const std::filesystem::path& path);

struct CommandResult {
  int exit_code = 0;
  std::string message;
  std::vector<std::filesystem::path> files;
  /// JSON summary (also written to disk by the command).
  std::string summary;
};

/// True when `values` (ordered by decreasing alpha) never increase, allowing
/// at most one increase of at most `allowance` relative size.
bool non_increasing_with_allowance(const std::vector<double>& values, double allowance = 0.10);

double median(std::vector<double> values);

/// Runs fn(0..count-1) on up to `workers` threads; rethrows the lowest-index failure.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

std::string run_file_stem(const std::string& prefix, double alpha, std::uint64_t seed);

CommandResult cmd_train(const ExperimentConfig& config);
CommandResult cmd_compare_flow(const ExperimentConfig& config);
CommandResult cmd_criticality(const ExperimentConfig& config);

using GradientFn = std::function<Vector(const NetworkSpec&, const Vector&, const SampleBatch&, OrderP)>;

struct SuiteResult {
  std::string name;
  bool passed = false;
  double max_error = 0.0;
  double threshold = 0.0;
  long samples = 0;
  std::string detail;
};

struct VerifyReport {
  std::vector<SuiteResult> suites;
  bool passed() const;
  std::string to_json() const;
};

/// Verification bundles. `gradient` defaults to grad_phi; tests inject faulty
/// gradients through it.
SuiteResult verify_sorting_oracle(const VerifySettings& s);
SuiteResult verify_gradients(const NetworkSpec& spec, const std::string& name,
                             const VerifySettings& s, const GradientFn& gradient = {});
SuiteResult verify_lipschitz(const VerifySettings& s);
SuiteResult verify_projection(const VerifySettings& s);
SuiteResult verify_order_consistency(const VerifySettings& s);
VerifyReport run_verification(const VerifySettings& s, const GradientFn& gradient = {});

CommandResult cmd_verify(const ExperimentConfig& config, const GradientFn& gradient = {});

/// Small smooth (tanh) and relu networks used by the gradient suites.
NetworkSpec verification_network(Activation activation);

}  // namespace swsgd
