#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bsgd/problems.hpp"

namespace bsgd {

// Sparse dataset parsed from LibSVM text: `<label> <idx>:<val> ...` with
// 1-based strictly increasing indices per row and optional `#` comments.
struct Dataset {
  int n = 0;
  int d = 0;  // max feature index seen
  std::vector<SparseRow> rows;  // indices stored 0-based
  std::vector<double> labels;   // raw label values
};

Dataset parse_libsvm(std::istream& in);
Dataset parse_libsvm_file(const std::string& path);
std::string write_libsvm(const Dataset& ds);

// Maps the lexicographically smaller raw label to -1 and the larger to +1;
// identity when labels are already in {-1, +1}.
std::vector<double> binarize_labels(const Dataset& ds);

}  // namespace bsgd
