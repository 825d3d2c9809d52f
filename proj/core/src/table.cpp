#include "spinmarket/table.hpp"

#include <cstdio>
#include <ostream>

#include <nlohmann/json.hpp>

#include "spinmarket/kernel.hpp"

namespace spinmarket {

namespace {

std::string cell_text(const Table::Cell& c) {
  if (const auto* v = std::get_if<long long>(&c)) return std::to_string(*v);
  if (const auto* v = std::get_if<double>(&c)) return format_double(*v);
  return std::get<std::string>(c);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

long long ll(int v) { return v; }

}  // namespace

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw DomainError("row width does not match header");
  rows.push_back(std::move(row));
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& out, const Table& t) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_escape(cell_text(row[c]));
    out << '\n';
  }
}

void write_json(std::ostream& out, const Table& t) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj;
    for (std::size_t c = 0; c < row.size(); ++c)
      std::visit([&](const auto& v) { obj[t.columns[c]] = v; }, row[c]);
    arr.push_back(std::move(obj));
  }
  out << arr.dump(2) << '\n';
}

Table kernel_table(const ModelParams& params) {
  Table t{{"i", "j", "p_up_site", "p_down_site", "p_up_arc", "p_down_arc", "p_hold"}, {}};
  for (int k = 0; k < state_count(params.n); ++k) {
    const MacroState s = index_state(k, params.n);
    const StepDistribution d = macro_step_distribution(s, params);
    t.add({ll(s.i), ll(s.j), d.up_site, d.down_site, d.up_arc, d.down_arc, d.hold});
  }
  return t;
}

Table matrix_table(const TransitionMatrix& m) {
  Table t{{"row", "col", "value"}, {}};
  const auto& sp = m.sparse();
  for (int r = 0; r < m.dim(); ++r)
    for (TransitionMatrix::Sparse::InnerIterator it(sp, r); it; ++it)
      t.add({ll(r), static_cast<long long>(it.col()), it.value()});
  return t;
}

Table measure_table(const MeasureGrid& g) {
  Table t{{"i", "j", "value"}, {}};
  for (std::size_t k = 0; k < g.values.size(); ++k) {
    const MacroState s = index_state(static_cast<int>(k), g.n);
    t.add({ll(s.i), ll(s.j), g.values[k]});
  }
  return t;
}

Table spectrum_table(const std::vector<std::complex<double>>& values) {
  Table t{{"rank", "modulus", "real", "imag"}, {}};
  for (std::size_t k = 0; k < values.size(); ++k)
    t.add({static_cast<long long>(k + 1), std::abs(values[k]), values[k].real(), values[k].imag()});
  return t;
}

Table drift_table(const DriftField& field) {
  Table t{{"i", "j", "f", "g", "sign_f", "sign_g"}, {}};
  for (std::size_t k = 0; k < field.f.size(); ++k) {
    const MacroState s = index_state(static_cast<int>(k), field.n);
    t.add({ll(s.i), ll(s.j), field.f[k], field.g[k], ll(field.sign_f[k]), ll(field.sign_g[k])});
  }
  return t;
}

Table basin_table(const AttractorReport& report, int n) {
  Table t{{"i", "j", "attractor"}, {}};
  for (std::size_t k = 0; k < report.basin.size(); ++k) {
    const MacroState s = index_state(static_cast<int>(k), n);
    t.add({ll(s.i), ll(s.j), ll(report.basin[k])});
  }
  return t;
}

Table path_table(const std::vector<MacroState>& path) {
  Table t{{"step", "i", "j"}, {}};
  for (std::size_t k = 0; k < path.size(); ++k)
    t.add({static_cast<long long>(k), ll(path[k].i), ll(path[k].j)});
  return t;
}

std::string attractor_json(const AttractorReport& report) {
  nlohmann::ordered_json doc;
  doc["attractors"] = nlohmann::ordered_json::array();
  for (std::size_t a = 0; a < report.attractors.size(); ++a) {
    const auto& e = report.attractors[a];
    nlohmann::ordered_json item;
    item["id"] = a;
    item["period"] = e.cycle.period();
    item["beyond_scope"] = e.cycle.beyond_scope();
    auto& states = item["states"] = nlohmann::ordered_json::array();
    for (const MacroState& s : e.cycle.states) states.push_back({s.i, s.j});
    item["class"] = to_string(e.verdict.cls);
    item["escape_notes"] = e.verdict.escape_notes;
    auto& esc = item["escaping"] = nlohmann::ordered_json::array();
    for (const MacroState& s : e.verdict.escaping) esc.push_back({s.i, s.j});
    doc["attractors"].push_back(std::move(item));
  }
  return doc.dump(2) + "\n";
}

}  // namespace spinmarket
