#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "spinmarket/skeleton.hpp"
#include "spinmarket/spectral.hpp"
#include "spinmarket/types.hpp"

namespace spinmarket {

/// Column-oriented export shared by the CSV and JSON writers.
struct Table {
  using Cell = std::variant<long long, double, std::string>;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

/// 17 significant digits, shortest of fixed/exponent notation.
std::string format_double(double v);

void write_csv(std::ostream& out, const Table& t);
/// Array of row objects keyed by column name.
void write_json(std::ostream& out, const Table& t);

Table kernel_table(const ModelParams& params);
Table matrix_table(const TransitionMatrix& m);
Table measure_table(const MeasureGrid& g);
Table spectrum_table(const std::vector<std::complex<double>>& values);
Table drift_table(const DriftField& field);
Table basin_table(const AttractorReport& report, int n);
/// Step 0 is the first element (typically the start state).
Table path_table(const std::vector<MacroState>& path);

/// Attractors with their classes and escape notes as a JSON document.
std::string attractor_json(const AttractorReport& report);

}  // namespace spinmarket
