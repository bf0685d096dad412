#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "citywall/core/structure.hpp"

namespace citywall::city {

// Structure file:
//   {"applications": [{"name": s, "language": s,
//     "packages": [{"name": s, "subPackages": [...],
//                   "classes": [{"name": s, "methodCount": n}]}]}]}
//
// A package object may carry an "id"; a {"ref": id} entry in a "packages" or
// "subPackages" list reuses that package instead of defining a new one. The
// result is validated, so references that create sharing or cycles are
// rejected.
//
// Errors: ParseError for malformed JSON or wrong field types,
// ValidationError (details = violations) otherwise.
StructureModel ingest_structure(std::string_view json_text);

// One recorded span.
struct TraceRecord {
  std::string trace_id;
  std::string span_id;
  std::optional<std::string> parent_span_id;
  std::string method_fqn;  // application.package.path.Class.method
  std::uint64_t start_nanos = 0;
  std::uint64_t end_nanos = 0;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

// Record-set invariants: end >= start, span ids unique per trace, parents
// present in the same trace.
std::vector<std::string> validate_traces(const std::vector<TraceRecord>& records);

// JSON lines, one record per non-blank line with fields traceId, spanId,
// parentSpanId (nullable), methodFqn, startNanos, endNanos.
// Errors: ParseError (with line number), ValidationError.
std::vector<TraceRecord> ingest_traces(std::string_view jsonl_text);

std::string dump_traces(const std::vector<TraceRecord>& records);

}  // namespace citywall::city
