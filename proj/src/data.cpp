#include "bsgd/data.hpp"

#include <cmath>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bsgd {

namespace {

[[noreturn]] void parse_fail(std::size_t line) {
  throw std::runtime_error("parse error at line " + std::to_string(line));
}

double to_double(const std::string& tok, std::size_t line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size() || !std::isfinite(v)) parse_fail(line);
    return v;
  } catch (const std::logic_error&) {
    parse_fail(line);
  }
}

}  // namespace

Dataset parse_libsvm(std::istream& in) {
  Dataset ds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line
    ds.labels.push_back(to_double(tok, lineno));
    SparseRow row;
    int prev = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) parse_fail(lineno);
      int idx = 0;
      const auto [p, ec] = std::from_chars(tok.data(), tok.data() + colon, idx);
      if (ec != std::errc{} || p != tok.data() + colon || idx < 1) parse_fail(lineno);
      if (idx <= prev)
        throw std::runtime_error("index order error at line " + std::to_string(lineno));
      prev = idx;
      row.idx.push_back(idx - 1);
      row.val.push_back(to_double(tok.substr(colon + 1), lineno));
      ds.d = std::max(ds.d, idx);
    }
    ds.rows.push_back(std::move(row));
  }
  ds.n = static_cast<int>(ds.rows.size());
  return ds;
}

Dataset parse_libsvm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  return parse_libsvm(in);
}

std::string write_libsvm(const Dataset& ds) {
  std::ostringstream out;
  out.precision(17);
  for (int i = 0; i < ds.n; ++i) {
    out << ds.labels[i];
    const SparseRow& r = ds.rows[i];
    for (std::size_t k = 0; k < r.idx.size(); ++k)
      out << ' ' << (r.idx[k] + 1) << ':' << r.val[k];
    out << '\n';
  }
  return out.str();
}

std::vector<double> binarize_labels(const Dataset& ds) {
  std::set<double> distinct(ds.labels.begin(), ds.labels.end());
  if (distinct.size() > 2) throw std::runtime_error("not a binary problem");
  std::vector<double> out(ds.labels.size());
  if (distinct.size() <= 1) {
    // Degenerate single-class data: map everything to +1.
    for (auto& v : out) v = 1.0;
    return out;
  }
  const double lo = *distinct.begin();
  const double hi = *distinct.rbegin();
  if (lo == -1.0 && hi == 1.0) return ds.labels;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = ds.labels[i] == lo ? -1.0 : 1.0;
  return out;
}

}  // namespace bsgd
