#ifndef FUNCEVT_PATH_MODEL_HPP
#define FUNCEVT_PATH_MODEL_HPP

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace funcevt {

/// Strictly increasing evaluation times in [0, 1].
class TimeGrid {
 public:
  /// t_j = j / (m - 1); m = 1 gives {0}.
  static TimeGrid uniform(std::size_t m);
  /// Throws std::invalid_argument unless the points are strictly
  /// increasing and lie in [0, 1].
  static TimeGrid from_points(std::vector<double> points);

  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t j) const { return points_[j]; }
  std::span<const double> points() const { return points_; }

  /// Index of the grid point closest to t.
  std::size_t nearest(double t) const;

  bool operator==(const TimeGrid&) const = default;

 private:
  explicit TimeGrid(std::vector<double> points) : points_(std::move(points)) {}
  std::vector<double> points_;
};

TimeGrid make_grid(std::size_t m);
TimeGrid make_grid(std::vector<double> points);

/// Dense rows x cols matrix, column-major: a column (one grid time
/// across all paths) is contiguous.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

  std::span<const double> column(std::size_t j) const {
    return {data_.data() + j * rows_, rows_};
  }
  std::span<double> column(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::vector<double> row(std::size_t i) const;

  std::span<const double> data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class Family { moving_max, pareto_gbm };

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

/// Paths (rows) evaluated on a shared grid (columns).
class GridTable {
 public:
  GridTable(TimeGrid grid, Matrix values);

  const TimeGrid& grid() const { return grid_; }
  const Matrix& values() const { return values_; }
  std::size_t paths() const { return values_.rows(); }
  std::span<const double> column(std::size_t j) const { return values_.column(j); }

  bool operator==(const GridTable&) const = default;

 private:
  TimeGrid grid_;
  Matrix values_;
};

/// n simulated paths xi_i(t_j); every value is strictly positive.
class PathSample : public GridTable {
 public:
  PathSample(TimeGrid grid, Matrix values, Family family);
  Family family() const { return family_; }

 private:
  Family family_;
};

/// zeta_i(t_j) = 1 / (1 - F_t(xi_i(t_j))); every value is >= 1.
class ParetoPaths : public GridTable {
 public:
  ParetoPaths(TimeGrid grid, Matrix values, std::size_t clamped = 0);
  /// Entries whose tail probability underflowed and was floored.
  std::size_t clamped() const { return clamped_; }

 private:
  std::size_t clamped_;
};

/// How expectations over the geometric Brownian profile are evaluated.
enum class ExpectationMethod { closed_form, gauss_hermite, monte_carlo };

/// Per-family marginal distribution F_t.
struct MarginalModel {
  Family family = Family::moving_max;
  ExpectationMethod method = ExpectationMethod::closed_form;
  std::size_t hermite_nodes = 64;
  /// Exponent of the (1 - u^-(M+2)) bracket on the Pareto-GBM tail.
  double bound_exponent = 1.5;

  /// P{xi(t) > x}.
  double tail(double t, double x) const;
  /// P{xi(t) <= x}.
  double cdf(double t, double x) const { return 1.0 - tail(t, x); }
};

double marginal_cdf(const MarginalModel& model, double t, double x);

/// Smallest positive tail used when 1 - F_t evaluates to zero.
inline constexpr double kTailFloor = 0x1p-970;

ParetoPaths pareto_transform(const PathSample& sample, const MarginalModel& model);

/// CSV: first row holds the grid points, then one row per path.
void write_csv(std::ostream& out, const GridTable& table);
GridTable read_csv(std::istream& in);
void write_csv_file(const std::string& path, const GridTable& table);
GridTable read_csv_file(const std::string& path);

/// Formats with 17 significant digits.
std::string format_double(double value);

}  // namespace funcevt

#endif  // FUNCEVT_PATH_MODEL_HPP
