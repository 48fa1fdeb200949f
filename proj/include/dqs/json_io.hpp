#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dqs/algorithms.hpp"
#include "dqs/circuit.hpp"
#include "dqs/engine.hpp"
#include "dqs/merge.hpp"
#include "dqs/metrics.hpp"
#include "dqs/scheduler.hpp"
#include "dqs/topology.hpp"
#include "dqs/trace.hpp"

// On-disk formats. Parse failures throw Error with an "invalid json" /
// "invalid csv" tag plus the offending field.

namespace dqs {

using Json = nlohmann::json;

Json qubit_to_json(const QubitRef& q);
QubitRef qubit_from_json(const Json& j);

Json gate_to_json(const Gate& g);
Gate gate_from_json(const Json& j);

Json circuit_to_json(const Circuit& c);
Circuit circuit_from_json(const Json& j);

Json topology_to_json(const Topology& t);
Topology topology_from_json(const Json& j);

std::vector<HamiltonianTerm> terms_from_json(const Json& j);
AccountingProfile profile_from_json(const Json& j);

Json report_to_json(const ResourceReport& r);
Json outcome_to_json(const Outcome& oc);
Json merged_to_json(const MergedValue& mv);
Json round_to_json(const RoundReport& rr);
// Full result of a batch: merged value, per-program outcomes, per-round
// reports, totals and warnings.
Json run_result_to_json(const ParallelRunResult& rr);

Json schedule_to_json(const Schedule& s);  // 1-based program ids

Json trace_event_to_json(const TraceEvent& e);
std::string trace_to_jsonl(const Trace& trace);

// Comma-separated rows of numbers, one feature vector per line; a single
// non-numeric first row is treated as a header.
std::vector<FeatureVector> vectors_from_csv(const std::string& text);

Json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace dqs
