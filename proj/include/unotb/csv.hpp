#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unotb/tensor.hpp"

namespace unotb {

// Locale-free CSV: comma separators, '.' decimal point, %.17g doubles so a
// write/read round trip is exact. No header unless one is passed.
void write_csv(const std::string& path, const Tensor& matrix,
               const std::vector<std::string>& header = {});
Tensor read_csv(const std::string& path);

// Single-column integer companions for per-row labels.
void write_labels(const std::string& path, const std::vector<int32_t>& labels);
std::vector<int32_t> read_labels(const std::string& path);

}  // namespace unotb
