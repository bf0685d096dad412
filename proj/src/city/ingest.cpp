#include "citywall/city/ingest.hpp"

#include <limits>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "citywall/core/error.hpp"

namespace citywall::city {

using nlohmann::json;

namespace {

constexpr std::size_t kUnresolved = std::numeric_limits<std::size_t>::max();

class StructureReader {
 public:
  StructureModel read(const json& root) {
    if (!root.is_object() || !root.contains("applications") ||
        !root["applications"].is_array()) {
      throw Error(ErrorCode::ParseError,
                  "structure file needs an \"applications\" array");
    }
    for (const auto& app : root["applications"]) {
      if (!app.is_object()) {
        throw Error(ErrorCode::ParseError, "application entries must be objects");
      }
      const auto index = model_.add_application(
          app.at("name").get<std::string>(), app.value("language", std::string{}));
      if (app.contains("packages")) {
        read_children(app["packages"], Owner{true, index});
      }
    }
    resolve_refs();
    return std::move(model_);
  }

 private:
  struct Owner {
    bool is_application;
    std::size_t index;
  };
  struct PendingRef {
    Owner owner;
    std::size_t slot;
    std::string id;
  };

  std::vector<std::size_t>& child_list(const Owner& owner) {
    return owner.is_application
               ? model_.applications[owner.index].root_packages
               : model_.packages[owner.index].sub_packages;
  }

  void read_children(const json& list, Owner owner) {
    if (!list.is_array()) {
      throw Error(ErrorCode::ParseError, "package lists must be arrays");
    }
    for (const auto& entry : list) {
      if (!entry.is_object()) {
        throw Error(ErrorCode::ParseError, "package entries must be objects");
      }
      auto& children = child_list(owner);
      if (entry.contains("ref")) {
        children.push_back(kUnresolved);
        refs_.push_back({owner, children.size() - 1, entry["ref"].get<std::string>()});
        continue;
      }
      model_.packages.push_back({entry.at("name").get<std::string>(), {}, {}});
      const std::size_t index = model_.packages.size() - 1;
      child_list(owner).push_back(index);

      if (entry.contains("id")) {
        const auto id = entry["id"].get<std::string>();
        if (!ids_.emplace(id, index).second) {
          problems_.push_back("package id '" + id + "' is defined twice");
        }
      }
      if (entry.contains("classes")) {
        const auto& classes = entry["classes"];
        if (!classes.is_array()) {
          throw Error(ErrorCode::ParseError, "classes must be an array");
        }
        for (const auto& cls : classes) {
          const auto& count = cls.at("methodCount");
          if (!count.is_number_integer()) {
            throw Error(ErrorCode::ParseError, "methodCount must be an integer");
          }
          model_.add_class(index, cls.at("name").get<std::string>(),
                           count.get<std::int64_t>());
        }
      }
      if (entry.contains("subPackages")) {
        read_children(entry["subPackages"], Owner{false, index});
      }
    }
  }

  void resolve_refs() {
    for (const auto& ref : refs_) {
      auto it = ids_.find(ref.id);
      if (it == ids_.end()) {
        problems_.push_back("package reference '" + ref.id + "' is undefined");
        continue;
      }
      child_list(ref.owner)[ref.slot] = it->second;
    }
    // Drop unresolved slots so validation sees a well-indexed model.
    for (auto& app : model_.applications) std::erase(app.root_packages, kUnresolved);
    for (auto& pkg : model_.packages) std::erase(pkg.sub_packages, kUnresolved);
  }

 public:
  std::vector<std::string> problems_;

 private:
  StructureModel model_;
  std::map<std::string, std::size_t> ids_;
  std::vector<PendingRef> refs_;
};

}  // namespace

StructureModel ingest_structure(std::string_view json_text) {
  StructureReader reader;
  StructureModel model;
  try {
    model = reader.read(json::parse(json_text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("structure file: ") + e.what());
  }
  auto problems = std::move(reader.problems_);
  for (const auto& v : validate_structure(model)) {
    problems.push_back(v.kind + " at " + v.path + ": " + v.message);
  }
  if (!problems.empty()) {
    throw Error(ErrorCode::ValidationError, "structure model is invalid",
                std::move(problems));
  }
  return model;
}

std::vector<std::string> validate_traces(const std::vector<TraceRecord>& records) {
  std::vector<std::string> out;
  std::set<std::pair<std::string, std::string>> spans;
  for (const auto& r : records) {
    if (r.end_nanos < r.start_nanos) {
      out.push_back("span " + r.span_id + " ends before it starts");
    }
    if (!spans.emplace(r.trace_id, r.span_id).second) {
      out.push_back("span " + r.span_id + " repeats in trace " + r.trace_id);
    }
  }
  for (const auto& r : records) {
    if (r.parent_span_id && !spans.count({r.trace_id, *r.parent_span_id})) {
      out.push_back("span " + r.span_id + " references missing parent " +
                    *r.parent_span_id + " in trace " + r.trace_id);
    }
  }
  return out;
}

std::vector<TraceRecord> ingest_traces(std::string_view jsonl_text) {
  std::vector<TraceRecord> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= jsonl_text.size()) {
    auto end = jsonl_text.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl_text.size();
    const auto line = jsonl_text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    try {
      const auto j = json::parse(line);
      TraceRecord r;
      r.trace_id = j.at("traceId").get<std::string>();
      r.span_id = j.at("spanId").get<std::string>();
      if (j.contains("parentSpanId") && !j["parentSpanId"].is_null()) {
        r.parent_span_id = j["parentSpanId"].get<std::string>();
      }
      r.method_fqn = j.at("methodFqn").get<std::string>();
      const auto& start = j.at("startNanos");
      const auto& stop = j.at("endNanos");
      if (!start.is_number_unsigned() || !stop.is_number_unsigned()) {
        throw Error(ErrorCode::ParseError,
                    "trace line " + std::to_string(line_no) +
                        ": startNanos/endNanos must be unsigned integers");
      }
      r.start_nanos = start.get<std::uint64_t>();
      r.end_nanos = stop.get<std::uint64_t>();
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError,
                  "trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  auto problems = validate_traces(records);
  if (!problems.empty()) {
    throw Error(ErrorCode::ValidationError, "trace records are invalid",
                std::move(problems));
  }
  return records;
}

std::string dump_traces(const std::vector<TraceRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    json j = {{"traceId", r.trace_id},
              {"spanId", r.span_id},
              {"parentSpanId", r.parent_span_id ? json(*r.parent_span_id) : json(nullptr)},
              {"methodFqn", r.method_fqn},
              {"startNanos", r.start_nanos},
              {"endNanos", r.end_nanos}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace citywall::city
