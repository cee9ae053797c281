#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace occlab {

/// A sampled trajectory: strictly increasing times starting at 0 and a
/// row-major (n_points x dim) value matrix. Immutable once built.
class PathGrid {
 public:
  PathGrid() = default;
  PathGrid(std::vector<double> times, std::vector<double> values,
           std::size_t dim);

  /// Grid with times k*T/n for k = 0..n.
  static PathGrid equispaced(double horizon, std::size_t n,
                             std::vector<double> values, std::size_t dim);

  std::size_t size() const noexcept { return times_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t intervals() const noexcept {
    return times_.empty() ? 0 : times_.size() - 1;
  }
  double horizon() const noexcept { return times_.empty() ? 0.0 : times_.back(); }

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& values() const noexcept { return values_; }

  std::span<const double> point(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  double value(std::size_t i, std::size_t coord = 0) const {
    return values_[i * dim_ + coord];
  }

  bool is_equispaced(double rel_tol = 1e-12) const;
  /// Common spacing of an equispaced grid; parameter error otherwise.
  double spacing() const;

  void write_csv(std::ostream& out) const;
  static PathGrid read_csv(std::istream& in);

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  std::size_t dim_ = 0;
};

}  // namespace occlab
