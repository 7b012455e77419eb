// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.
//
//   acceptance [path/to/swsgd]
//
// Without the CLI path the determinism criterion is reported as FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "swsgd/experiment.hpp"
#include "swsgd/oracle.hpp"
#include "swsgd/toy.hpp"

using namespace swsgd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& check, double budget_s = 0.0) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0.0 && secs > budget_s) {
    o.pass = false;
    o.detail += "; over the " + std::to_string(static_cast<int>(budget_s)) + " s budget";
  }
  if (!o.pass) ++failures;
  std::printf("%s %d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path work_dir() {
  auto dir = fs::temp_directory_path() / "swsgd_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Outcome sorting_optimality() {
  Rng rng = make_rng(101);
  const double orders[] = {1.0, 1.5, 2.0, 3.0};
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const int n = 1 + i % 6;
    const int d = 1 + (i / 6) % 3;
    const double p = orders[(i / 18) % 4];
    Matrix x = gaussian(n, d, rng), y = gaussian(n, d, rng);
    if (i % 7 == 0) {
      x = x.array().round();
      y = y.array().round();
    }
    const Vector th = sample_unit_sphere(d, rng);
    worst = std::max(worst, std::abs(w_theta_p(x, y, th, OrderP(p)) - oracle::wasserstein_1d_bruteforce(x, y, th, p)));
  }
  return {worst <= 1e-12, "1000 instances, max |w - brute force| = " + num(worst)};
}

// Random batches and parameters, keeping probes 1e-3 away from sorting ties
// and (for relu) from activation kinks.
double gradient_worst(const NetworkSpec& spec, Rng& rng) {
  const bool kinked = !spec.activation().smooth();
  const auto& ind = spec.indicator();
  double worst = 0.0;
  for (int probe = 0; probe < 100;) {
    const int n = 4;
    SampleBatch b{Matrix(n, spec.input_dim()), gaussian(n, spec.output_dim(), rng), Matrix(2, spec.output_dim())};
    for (int k = 0; k < n; ++k) b.x.row(k) = sample_ball(Vector::Zero(spec.input_dim()), ind.r_x + ind.eps, rng).transpose();
    for (int l = 0; l < 2; ++l) b.thetas.row(l) = sample_unit_sphere(spec.output_dim(), rng).transpose();
    const Vector u = sample_ball(Vector::Zero(spec.param_dim()), ind.r_u + ind.eps, rng);
    if (min_sorting_gap(spec, u, b) < 1e-3) continue;
    if (kinked) {
      double z = INFINITY;
      for (int k = 0; k < n; ++k) z = std::min(z, min_abs_preactivation(spec, u, b.x.row(k).transpose()));
      if (z < 1e-3) continue;
    }
    const Vector fd = oracle::fd_gradient([&](const Vector& v) { return sample_loss(spec, v, b); }, u, 1e-5);
    worst = std::max(worst, oracle::relative_error(grad_phi(spec, u, b), fd));
    ++probe;
  }
  return worst;
}

Outcome gradient_correctness() {
  Rng rng = make_rng(102);
  const double smooth = gradient_worst(verification_network(Activation::tanh), rng);
  const double relu = gradient_worst(verification_network(Activation::relu), rng);
  return {smooth < 1e-5 && relu < 1e-5,
          "max relative error tanh " + num(smooth) + ", relu " + num(relu) + " over 100 probes each"};
}

Outcome lipschitz_dominance() {
  Rng rng = make_rng(103);
  const double orders[] = {2.0, 1.0, 1.5, 3.0};
  int violations = 0;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const OrderP p(orders[i % 4]);
    const NetworkSpec spec = verification_network(i % 2 ? Activation::relu : Activation::tanh);
    const int n = 1 + i % 5;
    const Matrix x = gaussian(n, spec.input_dim(), rng), y = gaussian(n, spec.output_dim(), rng);
    const Vector th = sample_unit_sphere(spec.output_dim(), rng);
    const Vector u0 = spec.initial_parameters();

    const Matrix tx = forward_rows(spec, u0, x);
    const double r = 0.5;
    const double kw = lipschitz_K_w(r, tx, y, p);
    const auto pw = oracle::lipschitz_probe(
        [&](const Vector& v) { return w_theta_p(Eigen::Map<const Matrix>(v.data(), tx.rows(), tx.cols()), y, th, p); },
        Eigen::Map<const Vector>(tx.data(), tx.size()), r, 10000, rng);

    const double eps = 0.5;
    const double lt = estimate_lipschitz(spec, rng, 1024).value;
    const double kf = lipschitz_K_f(eps, spec, u0, x, y, lt, p);
    const SampleBatch b{x, y, th.transpose()};
    const auto pf = oracle::lipschitz_probe([&](const Vector& u) { return sample_loss(spec, u, b, p); }, u0, eps,
                                            10000, rng);
    // a ratio within rounding of the constant is not a violation
    violations += pw.max_value > kw * (1 + 1e-9);
    violations += pf.max_value > kf * (1 + 1e-9);
    worst = std::max({worst, pw.max_value / kw, pf.max_value / kf});
  }
  return {violations == 0,
          std::to_string(violations) + " violations on 20 instances x 2 constants, max ratio/constant " + num(worst)};
}

Outcome projection_invariant() {
  double worst = -INFINITY;
  long iterates = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (double alpha : {0.1, 0.03, 0.01}) {
      SGDConfig c;
      c.scheme = Scheme::projected_noised;
      c.alpha = alpha;
      c.beta = 1.0;
      c.radius = 1.0;
      c.t_max = 2000;
      c.n = toy::kBatchSize;
      c.init = InitLaw::uniform_ball(1.0);
      c.seed = seed;
      const auto t = run(toy::network(), c, toy::inputs(), toy::targets());
      for (long s = 0; s <= t.steps(); ++s) worst = std::max(worst, t.at(s).norm() - c.radius);
      iterates += t.steps() + 1;
    }
  }
  return {worst <= 0.0, std::to_string(iterates) + " iterates, max (||u|| - r) = " + num(worst)};
}

ExperimentConfig toy_experiment(const fs::path& dir, const std::string& scheme) {
  toy::write_bundle(dir);
  Document doc = load_config_document(dir / "toy.cfg");
  doc.set("sgd.scheme", scheme);
  doc.set("output.dir", (dir / "out").string());
  return ExperimentConfig::from_document(doc, dir);
}

std::string medians_text(const nlohmann::json& values) {
  std::string s;
  for (const auto& v : values) s += (s.empty() ? "" : ", ") + num(v.get<double>());
  return s;
}

Outcome flow_convergence(const fs::path& root) {
  const auto c = toy_experiment(root / "flow", "plain");
  const auto r = cmd_compare_flow(c);
  const auto j = nlohmann::json::parse(r.summary);
  return {r.exit_code == 0 && j["non_increasing"].get<bool>(),
          "median d_c for alpha 0.1, 0.03, 0.01 over 20 seeds: " + medians_text(j["median_d_c"])};
}

Outcome tail_criticality(const fs::path& root) {
  const auto c = toy_experiment(root / "crit", "projected_noised");
  const auto r = cmd_criticality(c);
  const auto j = nlohmann::json::parse(r.summary);
  const Matrix by_alpha = [&] {
    std::ifstream in(c.out_dir / "criticality_by_alpha.csv");
    std::string line, text;
    Matrix m(0, 3);
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line[0] == 'a') continue;
      std::stringstream ss(line);
      std::string cell;
      m.conservativeResize(m.rows() + 1, 3);
      for (int k = 0; k < 3 && std::getline(ss, cell, ','); ++k) m(m.rows() - 1, k) = std::stod(cell);
    }
    return m;
  }();
  std::string gaps;
  for (Eigen::Index i = 0; i < by_alpha.rows(); ++i) gaps += (i ? ", " : "") + num(by_alpha(i, 1));
  return {r.exit_code == 0 && j["non_increasing"].get<bool>() && j["smallest_alpha_below_ratio"].get<bool>(),
          "median tail gaps " + gaps + "; smallest-alpha gap / initial gradient norm = " +
              num(j["smallest_alpha_gap_ratio"].get<double>())};
}

Outcome alpha_zero_formula() {
  Rng rng = make_rng(107);
  std::uniform_int_distribution<int> dy(1, 5), du(1, 500);
  std::uniform_real_distribution<double> logu(-3.0, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int d_y = dy(rng), d_u = du(rng);
    const double r_y = std::pow(10.0, logu(rng)), m = std::pow(10.0, logu(rng));
    const double expected = 1.0 / ((d_y * d_y + 2.0 * r_y) * d_u * m);
    worst = std::max(worst, std::abs(alpha_zero(d_y, r_y, d_u, m) - expected) / expected);
  }
  return {worst <= 1e-15, "20 random inputs, max relative deviation " + num(worst)};
}

Outcome order_consistency() {
  Rng rng = make_rng(108);
  const NetworkSpec spec = verification_network(Activation::tanh);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const int n = 1 + i % 8;
    if (i % 2 == 0) {
      const int d = 1 + i % 3;
      const Matrix x = gaussian(n, d, rng), y = gaussian(n, d, rng);
      const Vector th = sample_unit_sphere(d, rng);
      const double q = w_theta_quadratic(x, y, th);
      worst = std::max(worst, std::abs(w_theta_p(x, y, th, OrderP(2)) - q) / std::max(1.0, q));
      const Matrix gq = grad_w_theta_quadratic(x, y, th);
      worst = std::max(worst, (grad_w_theta(x, y, th, OrderP(2)) - gq).cwiseAbs().maxCoeff() / std::max(1.0, gq.norm()));
    } else {
      SampleBatch b{gaussian(n, 2, rng), gaussian(n, 2, rng), Matrix(2, 2)};
      for (int l = 0; l < 2; ++l) b.thetas.row(l) = sample_unit_sphere(2, rng).transpose();
      const Vector u = spec.initial_parameters() + 0.3 * gaussian(spec.param_dim(), 1, rng).col(0);
      worst = std::max(worst, oracle::relative_error(grad_phi(spec, u, b, OrderP(2)), grad_phi_quadratic(spec, u, b)));
      const double general = sample_loss(spec, u, b, OrderP(2));
      double special = 0.0;
      const Matrix tx = forward_rows(spec, u, b.x);
      for (int l = 0; l < 2; ++l) special += w_theta_quadratic(tx, b.y, b.thetas.row(l).transpose()) / 2.0;
      worst = std::max(worst, std::abs(general - special) / std::max(1.0, special));
    }
  }
  return {worst <= 1e-12, "500 evaluations, max scaled deviation " + num(worst)};
}

Outcome indicator_shape() {
  const double h = 1e-5;
  // 1 and 0 are exact; the midpoint inherits the rounding of ‖v‖² = R² + ε²
  double plateau_err = 0.0, mid_err = 0.0, jump = 0.0;
  for (auto [r, eps] : {std::pair{1.0, 0.1}, std::pair{4.0, 0.5}, std::pair{10.0, 2.0}}) {
    auto g = [&](double t) {
      Vector v(2);
      v << t * 0.6, t * 0.8;
      return smooth_indicator(v, r, eps);
    };
    plateau_err = std::max({plateau_err, std::abs(g(r - eps) - 1.0), std::abs(g(r + eps))});
    mid_err = std::max(mid_err, std::abs(g(std::sqrt(r * r + eps * eps)) - 0.5));
    auto d1 = [&](double t) { return (g(t + h) - g(t - h)) / (2 * h); };
    auto d2 = [&](double t) { return (g(t + h) - 2 * g(t) + g(t - h)) / (h * h); };
    for (double b : {r - eps, r + eps}) {
      jump = std::max({jump, std::abs(d1(b + h) - d1(b - h)), std::abs(d2(b + h) - d2(b - h))});
    }
  }
  return {plateau_err == 0.0 && mid_err <= 1e-12 && jump < 1e-4,
          "plateau/zero error " + num(plateau_err) + ", midpoint error " + num(mid_err) +
              ", max derivative jump across shells " + num(jump)};
}

Outcome determinism(const std::string& cli, const fs::path& root) {
  if (cli.empty()) return {false, "CLI path not given"};
  const auto bundle = root / "bundle";
  if (std::system((cli + " example " + bundle.string() + " > /dev/null").c_str()) != 0) {
    return {false, "example bundle could not be written"};
  }
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"train", ""},
      {"compare-flow", ""},
      {"criticality", " --set sgd.scheme=projected_noised"},
      {"verify", ""},
  };
  long files = 0;
  for (const auto& [cmd, extra] : runs) {
    for (int k = 0; k < 2; ++k) {
      // second execution uses two workers; the outputs must not depend on it
      const auto out = root / ("det_" + cmd + "_" + std::to_string(k));
      const std::string line = cli + " " + cmd + " --config " + (bundle / "toy.cfg").string() + " --out " +
                               out.string() + " --workers " + std::to_string(k + 1) + extra + " > /dev/null 2>&1";
      if (std::system(line.c_str()) != 0) return {false, cmd + " exited nonzero"};
    }
    const auto a = root / ("det_" + cmd + "_0");
    const auto b = root / ("det_" + cmd + "_1");
    for (const auto& entry : fs::directory_iterator(a)) {
      const auto other = b / entry.path().filename();
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) {
        return {false, cmd + ": " + entry.path().filename().string() + " differs"};
      }
      ++files;
    }
    if (std::distance(fs::directory_iterator(a), fs::directory_iterator{}) !=
        std::distance(fs::directory_iterator(b), fs::directory_iterator{})) {
      return {false, cmd + ": file sets differ"};
    }
  }
  return {true, std::to_string(files) + " files byte-identical across two executions of each subcommand"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const fs::path root = work_dir();

  report(1, "sorting optimality", sorting_optimality, 10.0);
  report(2, "gradient correctness", gradient_correctness, 30.0);
  report(3, "Lipschitz dominance", lipschitz_dominance);
  report(4, "projection invariant", projection_invariant);
  report(5, "step-size convergence to the flow", [&] { return flow_convergence(root); }, 300.0);
  report(6, "long-run criticality", [&] { return tail_criticality(root); }, 300.0);
  report(7, "alpha_0 formula", alpha_zero_formula);
  report(8, "p-consistency", order_consistency);
  report(9, "smooth indicator", indicator_shape);
  report(10, "determinism", [&] { return determinism(cli, root); });

  std::printf("%s: %d of 10 criteria failed\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}
