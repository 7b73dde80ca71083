#include "funcevt/path_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "funcevt/numerics.hpp"

namespace funcevt {

TimeGrid TimeGrid::uniform(std::size_t m) {
  if (m == 0) throw std::invalid_argument("make_grid: m must be at least 1");
  std::vector<double> pts(m, 0.0);
  for (std::size_t j = 1; j < m; ++j) {
    pts[j] = static_cast<double>(j) / static_cast<double>(m - 1);
  }
  return TimeGrid(std::move(pts));
}

TimeGrid TimeGrid::from_points(std::vector<double> points) {
  if (points.empty()) throw std::invalid_argument("make_grid: empty point set");
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (!(points[j] >= 0.0 && points[j] <= 1.0)) {
      throw std::invalid_argument("make_grid: point " + format_double(points[j]) +
                                  " outside [0,1]");
    }
    if (j > 0 && !(points[j] > points[j - 1])) {
      throw std::invalid_argument("make_grid: points not strictly increasing at index " +
                                  std::to_string(j));
    }
  }
  return TimeGrid(std::move(points));
}

std::size_t TimeGrid::nearest(double t) const {
  const auto it = std::lower_bound(points_.begin(), points_.end(), t);
  if (it == points_.begin()) return 0;
  if (it == points_.end()) return points_.size() - 1;
  const auto hi = static_cast<std::size_t>(it - points_.begin());
  return (t - points_[hi - 1] <= points_[hi] - t) ? hi - 1 : hi;
}

TimeGrid make_grid(std::size_t m) { return TimeGrid::uniform(m); }

TimeGrid make_grid(std::vector<double> points) {
  return TimeGrid::from_points(std::move(points));
}

std::vector<double> Matrix::row(std::size_t i) const {
  std::vector<double> out(cols_);
  for (std::size_t j = 0; j < cols_; ++j) out[j] = (*this)(i, j);
  return out;
}

std::string_view to_string(Family family) {
  switch (family) {
    case Family::moving_max: return "moving-max";
    case Family::pareto_gbm: return "pareto-gbm";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "moving-max") return Family::moving_max;
  if (name == "pareto-gbm") return Family::pareto_gbm;
  throw std::invalid_argument("unknown process family '" + std::string(name) + "'");
}

GridTable::GridTable(TimeGrid grid, Matrix values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.cols() != grid_.size()) {
    throw std::invalid_argument("GridTable: column count " + std::to_string(values_.cols()) +
                                " does not match grid size " + std::to_string(grid_.size()));
  }
}

PathSample::PathSample(TimeGrid grid, Matrix values, Family family)
    : GridTable(std::move(grid), std::move(values)), family_(family) {
  for (double v : this->values().data()) {
    if (!(v > 0.0)) throw std::invalid_argument("PathSample: values must be positive");
  }
}

ParetoPaths::ParetoPaths(TimeGrid grid, Matrix values, std::size_t clamped)
    : GridTable(std::move(grid), std::move(values)), clamped_(clamped) {
  for (double v : this->values().data()) {
    if (!(v >= 1.0)) throw std::invalid_argument("ParetoPaths: values must be >= 1");
  }
}

double MarginalModel::tail(double t, double x) const {
  if (!(x > 0.0)) throw std::invalid_argument("marginal: x must be positive");
  if (family == Family::moving_max) return -std::expm1(-1.0 / x);

  // xi(t) = Y B(t), B(t) = exp(sigma Z - sigma^2/2), sigma = sqrt(t):
  // P{xi(t) > x} = E min(B(t)/x, 1).
  const double sigma = std::sqrt(t);
  if (sigma == 0.0) return std::min(1.0 / x, 1.0);
  switch (method) {
    case ExpectationMethod::closed_form: {
      const double d1 = (-std::log(x) + 0.5 * sigma * sigma) / sigma;
      const double d2 = d1 - sigma;
      return normal_cdf(-d1) / x + normal_cdf(d2);
    }
    case ExpectationMethod::gauss_hermite: {
      const QuadratureRule rule = gauss_hermite_rule(hermite_nodes);
      double acc = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double b = std::exp(sigma * rule.nodes[i] - 0.5 * sigma * sigma);
        acc += rule.weights[i] * std::min(b / x, 1.0);
      }
      return acc;
    }
    case ExpectationMethod::monte_carlo: break;
  }
  throw std::invalid_argument("marginal: Monte Carlo is not a marginal evaluation method");
}

double marginal_cdf(const MarginalModel& model, double t, double x) { return model.cdf(t, x); }

ParetoPaths pareto_transform(const PathSample& sample, const MarginalModel& model) {
  if (sample.family() != model.family) {
    throw std::invalid_argument("pareto_transform: sample family " +
                                std::string(to_string(sample.family())) +
                                " does not match model family " +
                                std::string(to_string(model.family)));
  }
  // Gauss-Hermite rule built once for all entries.
  QuadratureRule rule;
  if (model.family == Family::pareto_gbm && model.method == ExpectationMethod::gauss_hermite) {
    rule = gauss_hermite_rule(model.hermite_nodes);
  }
  const TimeGrid& grid = sample.grid();
  Matrix out(sample.paths(), grid.size());
  std::size_t clamped = 0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double t = grid[j];
    const double sigma = std::sqrt(t);
    const auto col = sample.column(j);
    for (std::size_t i = 0; i < col.size(); ++i) {
      double tail = 0.0;
      if (rule.nodes.empty() || sigma == 0.0) {
        tail = model.tail(t, col[i]);
      } else {
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
          const double b = std::exp(sigma * rule.nodes[q] - 0.5 * sigma * sigma);
          tail += rule.weights[q] * std::min(b / col[i], 1.0);
        }
      }
      if (!(tail > 0.0)) {
        tail = kTailFloor;
        ++clamped;
      }
      out(i, j) = std::max(1.0 / tail, 1.0);
    }
  }
  return ParetoPaths(grid, std::move(out), clamped);
}

std::string format_double(double value) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", value);
  return std::string(buf, static_cast<std::size_t>(len));
}

void write_csv(std::ostream& out, const GridTable& table) {
  const auto pts = table.grid().points();
  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (j) out << ',';
    out << format_double(pts[j]);
  }
  out << '\n';
  const Matrix& v = table.values();
  for (std::size_t i = 0; i < v.rows(); ++i) {
    for (std::size_t j = 0; j < v.cols(); ++j) {
      if (j) out << ',';
      out << format_double(v(i, j));
    }
    out << '\n';
  }
}

namespace {

std::vector<double> parse_row(const std::string& line, std::size_t line_no) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    if (first == std::string::npos) {
      throw std::runtime_error("csv line " + std::to_string(line_no) + ": empty cell");
    }
    const std::string trimmed = cell.substr(first, last - first + 1);
    char* end = nullptr;
    const double v = std::strtod(trimmed.c_str(), &end);
    if (end != trimmed.c_str() + trimmed.size()) {
      throw std::runtime_error("csv line " + std::to_string(line_no) + ": cannot parse '" +
                               trimmed + "'");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

GridTable read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) header = parse_row(line, line_no);
  }
  if (header.empty()) throw std::runtime_error("csv: missing grid header row");
  TimeGrid grid = make_grid(header);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto row = parse_row(line, line_no);
    if (row.size() != grid.size()) {
      throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected " +
                               std::to_string(grid.size()) + " values, got " +
                               std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  Matrix values(rows.size(), grid.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) values(i, j) = rows[i][j];
  }
  return GridTable(std::move(grid), std::move(values));
}

void write_csv_file(const std::string& path, const GridTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(out, table);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

GridTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  try {
    return read_csv(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace funcevt
