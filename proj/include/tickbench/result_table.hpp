#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tickbench/model.hpp"

namespace tickbench {

enum class ColumnClass : std::uint8_t { Timestamp, String, Decimal, Float };

struct ColumnSpec {
  std::string name;
  ColumnClass kind = ColumnClass::Float;

  friend bool operator==(const ColumnSpec&, const ColumnSpec&) = default;
};

using Cell = std::variant<Timestamp, std::string, Decimal, double>;
using Row = std::vector<Cell>;

ColumnClass class_of(const Cell& cell) noexcept;
std::string_view to_string(ColumnClass kind) noexcept;

/// Tabular query result compared across backends.
struct ResultTable {
  std::vector<ColumnSpec> columns;
  std::vector<Row> rows;

  ResultTable() = default;
  explicit ResultTable(std::vector<ColumnSpec> cols) : columns(std::move(cols)) {}

  std::size_t width() const { return columns.size(); }
  bool empty() const { return rows.empty(); }
  /// Throws schema_mismatch when the row arity or cell classes disagree
  /// with the columns.
  void append(Row row);
  /// Approximate heap footprint, used for query scratch accounting.
  std::size_t footprint_bytes() const;

  friend bool operator==(const ResultTable&, const ResultTable&) = default;
};

/// Canonical text of one cell: timestamps as integer ns, decimals in their
/// shortest exact form, floats with 17 significant digits.
std::string format_cell(const Cell& cell);
void append_cell(std::string& out, const Cell& cell);

/// Tab-separated header plus rows, `\n` terminated.
std::string canonical_text(const ResultTable& table);
/// SHA-256 hex of canonical_text.
std::string table_digest(const ResultTable& table);

}  // namespace tickbench
