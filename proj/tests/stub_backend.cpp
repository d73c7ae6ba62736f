#include "stub_backend.hpp"

#include "tickbench/analytics.hpp"
#include "tickbench/error.hpp"

namespace fixtures {

namespace {

backends::BackendDescriptor describe(std::string id, const StubBackend::Options& o) {
  backends::BackendDescriptor d;
  d.id = std::move(id);
  d.type = "embedded";
  d.asset_dir = backends::default_asset_root() / "embedded";
  d.capabilities = {o.server_latency, o.query_storage, false};
  return d;
}

void scale_first_float(ResultTable& t, double scale) {
  for (auto& row : t.rows) {
    for (auto& cell : row) {
      if (auto* d = std::get_if<double>(&cell)) {
        *d = *d == 0.0 ? scale : *d * scale;
        return;
      }
    }
  }
}

}  // namespace

StubBackend::StubBackend(std::string id, Dataset data, Options options)
    : Backend(describe(std::move(id), options)), data_(std::move(data)), options_(options) {}

backends::IngestOutcome StubBackend::ingest(const std::vector<std::filesystem::path>& csv_paths) {
  ++ingests;
  backends::IngestOutcome out;
  for (const auto& p : csv_paths) out.source_file_bytes += std::filesystem::file_size(p);
  out.elapsed = Duration{1'000'000};
  return out;
}

backends::RawResult StubBackend::execute(const std::string& query) {
  const auto q = backends::parse_embedded_query(query);
  ++executes;
  ++executes_by_id[q.spec.id];
  if (options_.fail_on == q.spec.id) fail(Errc::query, "stub: refused " + std::string(to_string(q.spec.id)));
  ResultTable t = analytics::run_benchmark(q.spec, data_.trades, data_.books, q.options);
  double scale = options_.perturb;
  if (options_.unstable && executes % 2 == 0) scale *= 2.0;
  if (scale != 1.0) scale_first_float(t, scale);
  backends::RawResult raw = backends::to_raw(t);
  if (options_.server_latency) {
    // Irregular values so the mean is not trivially exact.
    raw.server_elapsed = Duration{1'000'003 + static_cast<std::int64_t>(executes * executes * 7919 % 1'000'037)};
    reported.push_back(*raw.server_elapsed);
  }
  if (options_.query_storage) raw.query_bytes = 1000 * executes;
  return raw;
}

}  // namespace fixtures
