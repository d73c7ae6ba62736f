#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "tickbench/backends.hpp"
#include "tickbench/model.hpp"

namespace tickbench::backends {

/// ClickHouse or InfluxDB adapter for the descriptor, or null when its type
/// has no HTTP client (or the HTTP adapters are not built).
std::unique_ptr<Backend> make_http_backend(const BackendDescriptor& descriptor);

/// ClickHouse TabSeparatedWithNames body.
RawResult parse_tab_separated(std::string_view body);
/// InfluxDB annotated CSV; columns from all tables are merged by name.
RawResult parse_annotated_csv(std::string_view body);

/// InfluxDB line protocol for one row.
void append_line_protocol(std::string& out, const Trade& trade);
void append_line_protocol(std::string& out, const BookSnapshot& book);

}  // namespace tickbench::backends
