#include "swsgd/toy.hpp"

#include "swsgd/csv.hpp"

namespace swsgd::toy {

NetworkSpec network() {
  return NetworkSpec::dense({1, 1}, ActivationFn{Activation::identity},
                            IndicatorShape{10.0, 10.0, 0.5}, DenseOptions{});
}

DiscreteMeasure inputs() {
  Matrix pts(4, 1);
  pts << -1.5, -0.5, 0.5, 1.5;
  return DiscreteMeasure(pts);
}

DiscreteMeasure targets() {
  Matrix pts(4, 1);
  pts << 0.0, 1.0, 2.0, 4.0;
  return DiscreteMeasure(pts);
}

Vector start() {
  Vector u(2);
  u << 0.2, -0.5;
  return u;
}

Document config(const std::string& x_path, const std::string& y_path) {
  Document doc;
  network().write_document(doc);
  doc.set("measures.x", x_path);
  doc.set("measures.y", y_path);
  doc.set("measures.weighted", "false");
  doc.set("sgd.scheme", "plain");
  doc.set("sgd.alpha", "0.01");
  doc.set("sgd.beta", "0.5");
  doc.set("sgd.radius", "5");
  doc.set("sgd.t_max", "2000");
  doc.set("sgd.n", std::to_string(kBatchSize));
  doc.set("sgd.directions", "1");
  doc.set("sgd.p", "2");
  doc.set("sgd.init", "point 0.2 -0.5");
  doc.set("sgd.noise", "gaussian");
  doc.set("sgd.loss_every", "500");
  doc.set("sgd.m_hat", "auto");
  doc.set("population.exhaustive", "true");
  doc.set("population.num_mc", "64");
  doc.set("population.directions", "1");
  doc.set("sweep.alphas", "0.1 0.03 0.01");
  doc.set("sweep.seeds", "1 2 3 4 5 6 7 8 9 10 11 12 13 14 15 16 17 18 19 20");
  doc.set("flow.k_max", "8");
  doc.set("flow.grid_per_unit", "200");
  doc.set("flow.step", "0");
  doc.set("flow.check", "true");
  doc.set("criticality.horizon", "20");
  doc.set("criticality.tail_fraction", "0.25");
  doc.set("criticality.gap_points", "50");
  doc.set("criticality.check", "true");
  return doc;
}

void write_bundle(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto column = [](const DiscreteMeasure& m) {
    std::string out = "value\n";
    for (Eigen::Index k = 0; k < m.size(); ++k) out += format_double(m.points()(k, 0)) + "\n";
    return out;
  };
  write_text_file(dir / "toy_x.csv", column(inputs()));
  write_text_file(dir / "toy_y.csv", column(targets()));
  write_text_file(dir / "toy.cfg", "# Toy problem: affine 1-D model, 4-atom input and target.\n" +
                                        config().render());
}

}  // namespace swsgd::toy
