#include "occlab/path_grid.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "occlab/error.hpp"
#include "occlab/format.hpp"

namespace occlab {

PathGrid::PathGrid(std::vector<double> times, std::vector<double> values,
                   std::size_t dim)
    : times_(std::move(times)), values_(std::move(values)), dim_(dim) {
  if (dim_ == 0) throw ParameterError("path dimension must be positive");
  if (times_.empty()) throw ParameterError("path must contain at least one point");
  if (values_.size() != times_.size() * dim_) {
    throw ParameterError("path values do not match times x dim");
  }
  if (times_.front() != 0.0) throw ParameterError("path must start at time 0");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) {
      throw ParameterError("path times must be strictly increasing (index " +
                           std::to_string(i) + ")");
    }
  }
}

PathGrid PathGrid::equispaced(double horizon, std::size_t n,
                              std::vector<double> values, std::size_t dim) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ParameterError("horizon must be positive and finite");
  }
  if (n == 0) throw ParameterError("grid needs at least one interval");
  std::vector<double> t(n + 1);
  // Computing k*T/n (not cumulative sums) keeps every node exact to rounding,
  // so a subsampled grid reproduces the coarse grid bit for bit.
  for (std::size_t k = 0; k <= n; ++k) {
    t[k] = horizon * static_cast<double>(k) / static_cast<double>(n);
  }
  return PathGrid(std::move(t), std::move(values), dim);
}

bool PathGrid::is_equispaced(double rel_tol) const {
  if (times_.size() < 2) return false;
  const double h = times_.back() / static_cast<double>(times_.size() - 1);
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (std::abs(times_[i] - times_[i - 1] - h) > rel_tol * h) return false;
  }
  return true;
}

double PathGrid::spacing() const {
  if (!is_equispaced()) throw ParameterError("path grid is not equispaced");
  return times_.back() / static_cast<double>(times_.size() - 1);
}

void PathGrid::write_csv(std::ostream& out) const {
  out << "time";
  for (std::size_t j = 0; j < dim_; ++j) out << ",x" << (j + 1);
  out << '\n';
  for (std::size_t i = 0; i < times_.size(); ++i) {
    out << format_double(times_[i]);
    for (std::size_t j = 0; j < dim_; ++j) out << ',' << format_double(value(i, j));
    out << '\n';
  }
}

PathGrid PathGrid::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty path CSV");
  std::size_t dim = 0;
  for (char c : line) dim += (c == ',');
  if (dim == 0) throw IoError("path CSV header needs time and at least one coordinate");
  std::vector<double> t, v;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(row, cell, ',')) {
      const double x = std::stod(cell);
      if (col == 0) t.push_back(x); else v.push_back(x);
      ++col;
    }
    if (col != dim + 1) throw IoError("path CSV row has wrong column count");
  }
  return PathGrid(std::move(t), std::move(v), dim);
}

}  // namespace occlab
