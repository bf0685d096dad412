#include <map>
#include <utility>

#include "citywall/city/layout.hpp"

namespace citywall::city {

TraceAggregation aggregate_traces(const std::vector<TraceRecord>& records,
                                  const StructureModel& model) {
  const StructureIndex index(model);
  TraceAggregation out;

  std::map<std::pair<std::string, std::string>, std::size_t> by_span;
  std::vector<std::optional<std::string>> owner(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    by_span.emplace(std::pair{records[i].trace_id, records[i].span_id}, i);
    owner[i] = index.class_of_method(records[i].method_fqn);
    if (!owner[i]) ++out.dropped_spans;
  }

  std::map<std::pair<std::string, std::string>, std::uint64_t> counts;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& child = records[i];
    if (!child.parent_span_id) continue;
    auto parent = by_span.find({child.trace_id, *child.parent_span_id});
    if (parent == by_span.end()) {
      ++out.orphan_spans;
      continue;
    }
    const auto& source = owner[parent->second];
    const auto& target = owner[i];
    if (!source || !target) continue;
    if (*source == *target) {
      ++out.self_calls;
      continue;
    }
    ++counts[{*source, *target}];
  }

  out.links.reserve(counts.size());
  for (const auto& [pair, n] : counts) {
    out.links.push_back({pair.first, pair.second, n});
  }
  return out;
}

}  // namespace citywall::city
