#pragma once

#include "swsgd/document.hpp"
#include "swsgd/measures.hpp"
#include "swsgd/network.hpp"

// Desk-scale reference problem: a 1-D affine model T(u,x) = u_0 x + u_1
// (inside the indicator plateau) fitted to a 4-atom target from a 4-atom input.
namespace swsgd::toy {

NetworkSpec network();
DiscreteMeasure inputs();
DiscreteMeasure targets();
Vector start();
inline constexpr int kBatchSize = 2;

/// Complete experiment document for the toy problem. Measure files are
/// referenced by the given paths (see write_bundle).
Document config(const std::string& x_path = "toy_x.csv", const std::string& y_path = "toy_y.csv");

/// Writes toy_x.csv, toy_y.csv and toy.cfg into `dir`.
void write_bundle(const std::filesystem::path& dir);

}  // namespace swsgd::toy
