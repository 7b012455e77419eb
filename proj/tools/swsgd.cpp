// swsgd: training sweeps, flow comparison, criticality and verification
// suites for SGD on the sliced Wasserstein loss.
//
// Settings are read in this order, later wins: built-in defaults, the
// --config document, --set overrides, then the dedicated flags.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swsgd/experiment.hpp"
#include "swsgd/toy.hpp"

namespace {

struct Common {
  std::string config;
  std::string out;
  int workers = 0;
  long long seed = -1;
  std::string alpha_list;
  double p = 0.0;
  std::vector<std::string> sets;
};

void add_common(CLI::App* app, Common& c, bool config_required) {
  auto* opt = app->add_option("--config", c.config, "experiment document (or a CSV artifact to replay)");
  if (config_required) opt->required();
  app->add_option("--out", c.out, "output directory");
  app->add_option("--workers", c.workers, "parallel runs")->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed, "run a single seed")->check(CLI::NonNegativeNumber);
  app->add_option("--alpha-list", c.alpha_list, "comma separated step sizes");
  app->add_option("--p", c.p, "order of the sliced Wasserstein loss");
  app->add_option("--set", c.sets, "section.key=value override (repeatable)");
}

swsgd::ExperimentConfig load(const Common& c, bool require_measures) {
  swsgd::Document doc;
  std::filesystem::path base = std::filesystem::current_path();
  if (!c.config.empty()) {
    const std::filesystem::path path = std::filesystem::absolute(c.config);
    doc = swsgd::load_config_document(path);
    base = path.parent_path();
  } else {
    // verify alone may run without a document; it only needs a network.
    doc = swsgd::toy::config();
    doc.erase("measures.x");
    doc.erase("measures.y");
  }
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    doc.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!c.out.empty()) doc.set("output.dir", c.out);
  if (c.workers > 0) doc.set("runtime.workers", std::to_string(c.workers));
  if (c.seed >= 0) {
    doc.set("sweep.seeds", std::to_string(c.seed));
    doc.set("sgd.seed", std::to_string(c.seed));
  }
  if (!c.alpha_list.empty()) doc.set("sweep.alphas", c.alpha_list);
  if (c.p > 0.0) doc.set("sgd.p", swsgd::format_double(c.p));
  return swsgd::ExperimentConfig::from_document(std::move(doc), base, require_measures);
}

int report(const swsgd::CommandResult& r) {
  for (const auto& f : r.files) std::cout << f.string() << "\n";
  if (r.exit_code == 0) {
    std::cerr << r.message << "\n";
  } else {
    std::cerr << "error: " << r.message << "\n";
  }
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SGD on the sliced Wasserstein loss"};
  app.require_subcommand(1);

  Common train_opts, flow_opts, crit_opts, verify_opts;
  auto* train = app.add_subcommand("train", "run the (alpha, seed) sweep and write trajectories");
  add_common(train, train_opts, true);
  auto* flow = app.add_subcommand("compare-flow", "distance d_c between SGD interpolations and the reference flow");
  add_common(flow, flow_opts, true);
  auto* crit = app.add_subcommand("criticality", "tail-window criticality gaps of projected-noised runs");
  add_common(crit, crit_opts, true);
  auto* verify = app.add_subcommand("verify", "oracle suites: sorting, gradients, Lipschitz, projection");
  add_common(verify, verify_opts, false);

  std::string example_dir;
  auto* example = app.add_subcommand("example", "write the toy problem bundle (measures + config)");
  example->add_option("dir", example_dir, "target directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*example) {
      swsgd::toy::write_bundle(example_dir);
      std::cout << (std::filesystem::path(example_dir) / "toy.cfg").string() << "\n";
      return 0;
    }
    if (*train) return report(swsgd::cmd_train(load(train_opts, true)));
    if (*flow) return report(swsgd::cmd_compare_flow(load(flow_opts, true)));
    if (*crit) return report(swsgd::cmd_criticality(load(crit_opts, true)));
    if (*verify) return report(swsgd::cmd_verify(load(verify_opts, false)));
  } catch (const swsgd::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
