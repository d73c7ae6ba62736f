#include "tickbench/result_table.hpp"

#include <charconv>

#include "tickbench/digest.hpp"
#include "tickbench/error.hpp"

namespace tickbench {

ColumnClass class_of(const Cell& cell) noexcept { return static_cast<ColumnClass>(cell.index()); }

std::string_view to_string(ColumnClass kind) noexcept {
  switch (kind) {
    case ColumnClass::Timestamp: return "timestamp";
    case ColumnClass::String: return "string";
    case ColumnClass::Decimal: return "decimal";
    case ColumnClass::Float: return "float";
  }
  return "?";
}

void ResultTable::append(Row row) {
  if (row.size() != columns.size()) {
    fail(Errc::schema_mismatch, "row arity " + std::to_string(row.size()) + " != column count " +
                                    std::to_string(columns.size()));
  }
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (class_of(row[c]) != columns[c].kind) {
      fail(Errc::schema_mismatch, "column '" + columns[c].name + "' expects " +
                                      std::string(to_string(columns[c].kind)) + " cells");
    }
  }
  rows.push_back(std::move(row));
}

std::size_t ResultTable::footprint_bytes() const {
  std::size_t bytes = rows.capacity() * sizeof(Row);
  for (const Row& r : rows) bytes += r.capacity() * sizeof(Cell);
  return bytes;
}

void append_cell(std::string& out, const Cell& cell) {
  char buf[32];
  switch (class_of(cell)) {
    case ColumnClass::Timestamp: {
      auto res = std::to_chars(buf, buf + sizeof buf, std::get<Timestamp>(cell).time_since_epoch().count());
      out.append(buf, res.ptr);
      break;
    }
    case ColumnClass::String:
      out += std::get<std::string>(cell);
      break;
    case ColumnClass::Decimal:
      std::get<Decimal>(cell).append_to(out);
      break;
    case ColumnClass::Float: {
      // Shortest representation that round-trips exactly.
      auto res = std::to_chars(buf, buf + sizeof buf, std::get<double>(cell));
      out.append(buf, res.ptr);
      break;
    }
  }
}

std::string format_cell(const Cell& cell) {
  std::string s;
  append_cell(s, cell);
  return s;
}

std::string canonical_text(const ResultTable& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out.push_back('\t');
    out += table.columns[c].name;
    out.push_back(':');
    out += to_string(table.columns[c].kind);
  }
  out.push_back('\n');
  for (const Row& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out.push_back('\t');
      append_cell(out, row[c]);
    }
    out.push_back('\n');
  }
  return out;
}

std::string table_digest(const ResultTable& table) { return sha256_hex(canonical_text(table)); }

}  // namespace tickbench
