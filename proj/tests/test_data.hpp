#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinmarket::test_data {

inline std::string data_path(const std::string& name) {
  return std::string(SPINMARKET_TEST_DATA_DIR) + "/" + name;
}

inline std::vector<std::vector<std::string>> read_tokens(const std::string& name, char sep = ' ') {
  std::ifstream in(data_path(name));
  if (!in) throw std::runtime_error("missing test data " + name);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, sep))
      if (!tok.empty()) row.push_back(tok);
    rows.push_back(row);
  }
  return rows;
}

struct DriftRow {
  int i, j;
  double f, g;
};

inline std::vector<DriftRow> read_drift_rows() {
  auto rows = read_tokens("n10_a3_drift.csv", ',');
  std::vector<DriftRow> out;
  for (std::size_t k = 1; k < rows.size(); ++k)
    out.push_back({std::stoi(rows[k][0]), std::stoi(rows[k][1]), std::stod(rows[k][2]),
                   std::stod(rows[k][3])});
  return out;
}

}  // namespace spinmarket::test_data
