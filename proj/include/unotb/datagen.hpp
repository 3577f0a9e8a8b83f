#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unotb/tensor.hpp"

namespace unotb {

// Seeded synthetic dataset generators for the 2-D experiments plus general
// Gaussian sampling. Every generator is a pure function of its spec, so the
// same (name, n, seed) always reproduces the same matrix bit for bit.
struct DatasetSpec {
  std::string name;  // spiral | moons | gm8 | imbalance_p1 | imbalance_p2 |
                     // outlier_p1 | outlier_p2 | outlier_p3 | gaussian
  int64_t n = 0;
  uint64_t seed = 0;
  // Only read when name == "gaussian".
  Tensor mean;  // [D]
  Tensor cov;   // [D, D], symmetric positive definite
};

struct Dataset {
  Tensor points;                // [n, D]
  std::vector<int32_t> labels;  // per-row component id; for outlier_p* the
                                // outlier modes continue after the four
                                // in-distribution ones (label >= 4)
};

bool is_outlier_label(const std::string& name, int32_t label);

Dataset generate(const DatasetSpec& spec);

}  // namespace unotb
