#include <gtest/gtest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "spinmarket/table.hpp"

using namespace spinmarket;

TEST(Table, CsvQuotingAndDigits) {
  Table t{{"a", "b", "c"}, {}};
  t.add({1LL, 0.1, std::string("x,y")});
  std::ostringstream out;
  write_csv(out, t);
  EXPECT_EQ(out.str(), "a,b,c\n1,0.10000000000000001,\"x,y\"\n");
  EXPECT_THROW(t.add({1LL}), DomainError);
  EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Table, JsonRows) {
  Table t{{"i", "v"}, {}};
  t.add({2LL, 0.25});
  std::ostringstream out;
  write_json(out, t);
  const auto doc = nlohmann::json::parse(out.str());
  ASSERT_EQ(doc.size(), 1u);
  EXPECT_EQ(doc[0]["i"], 2);
  EXPECT_EQ(doc[0]["v"], 0.25);
}

TEST(Table, KernelTableColumnsAndRows) {
  const Table t = kernel_table(ModelParams::frozen(3, 6));
  EXPECT_EQ(t.columns, (std::vector<std::string>{"i", "j", "p_up_site", "p_down_site", "p_up_arc",
                                                 "p_down_arc", "p_hold"}));
  EXPECT_EQ(t.rows.size(), 16u);
  EXPECT_EQ(std::get<double>(t.rows[0][2]), 0.5);
}

TEST(Table, MatrixAndSpectrumTables) {
  const TransitionMatrix m = assemble_matrix(ModelParams::frozen(3, 6));
  const Table mt = matrix_table(m);
  EXPECT_EQ(mt.columns, (std::vector<std::string>{"row", "col", "value"}));
  EXPECT_EQ(mt.rows.size(), static_cast<std::size_t>(m.sparse().nonZeros()));
  const Table st = spectrum_table(eigenvalues(m, 3));
  EXPECT_EQ(st.rows.size(), 3u);
  EXPECT_EQ(std::get<long long>(st.rows[0][0]), 1);
}

TEST(Table, AttractorJson) {
  const DriftField field = drift_field(ModelParams::frozen(10, 3));
  const AttractorReport rep = attractor_report(field);
  const auto doc = nlohmann::json::parse(attractor_json(rep));
  ASSERT_EQ(doc["attractors"].size(), rep.attractors.size());
  EXPECT_EQ(doc["attractors"][0]["class"], "stable");
  EXPECT_EQ(doc["attractors"][0]["states"][0][0], 10);
  EXPECT_EQ(basin_table(rep, 10).rows.size(), 506u);
  EXPECT_EQ(drift_table(field).columns.size(), 6u);
}

TEST(Table, PathTable) {
  const Table t = path_table({{1, 2}, {2, 2}});
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(std::get<long long>(t.rows[1][0]), 1);
  EXPECT_EQ(std::get<long long>(t.rows[1][1]), 2);
}
