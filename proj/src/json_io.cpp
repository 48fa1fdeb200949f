#include "dqs/json_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "dqs/error.hpp"

namespace dqs {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error("invalid json: " + what); }

const Json& field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) bad(std::string("missing field '") + key + "'");
  return *it;
}

std::string str_field(const Json& j, const char* key) {
  const Json& f = field(j, key);
  if (!f.is_string()) bad(std::string("field '") + key + "' must be a string");
  return f.get<std::string>();
}

double num_field(const Json& j, const char* key) {
  const Json& f = field(j, key);
  if (!f.is_number()) bad(std::string("field '") + key + "' must be a number");
  return f.get<double>();
}

long int_field(const Json& j, const char* key) {
  const Json& f = field(j, key);
  if (!f.is_number_integer()) bad(std::string("field '") + key + "' must be an integer");
  return f.get<long>();
}

}  // namespace

Json qubit_to_json(const QubitRef& q) {
  Json j = Json::object();
  if (!q.is_abstract()) j["node"] = q.node;
  j["index"] = q.index;
  return j;
}

QubitRef qubit_from_json(const Json& j) {
  if (!j.is_object()) bad("qubit must be an object");
  QubitRef q;
  if (j.contains("node") && !j["node"].is_null()) {
    if (!j["node"].is_string()) bad("qubit 'node' must be a string");
    q.node = j["node"].get<std::string>();
  }
  q.index = static_cast<int>(int_field(j, "index"));
  if (q.index < 0) bad("qubit 'index' must be non-negative");
  return q;
}

Json gate_to_json(const Gate& g) {
  Json j;
  j["kind"] = kind_name(g.kind);
  Json ops = Json::array();
  for (const QubitRef& q : g.operands) ops.push_back(qubit_to_json(q));
  j["operands"] = std::move(ops);
  switch (g.kind) {
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
    case GateKind::PHASE:
    case GateKind::CPHASE:
      j["angle"] = g.angle;
      break;
    case GateKind::CUSTOM_SINGLE:
    case GateKind::CUSTOM_CONTROLLED: {
      Json m = Json::array();
      for (const cplx& v : g.matrix) m.push_back(Json::array({v.real(), v.imag()}));
      j["matrix"] = std::move(m);
      break;
    }
    case GateKind::MEASURE:
    case GateKind::COND_X:
    case GateKind::COND_Z:
      j["bit"] = g.bit;
      break;
    case GateKind::PREPARE:
      if (g.basis != 0) j["basis"] = g.basis;
      break;
    default:
      break;
  }
  return j;
}

Gate gate_from_json(const Json& j) {
  if (!j.is_object()) bad("gate must be an object");
  Gate g;
  std::string kn = str_field(j, "kind");
  if (!kind_from_name(kn, &g.kind)) bad("unknown gate kind '" + kn + "'");
  const Json& ops = field(j, "operands");
  if (!ops.is_array()) bad("gate 'operands' must be an array");
  for (const Json& o : ops) g.operands.push_back(qubit_from_json(o));
  if (j.contains("angle")) {
    if (!j["angle"].is_number()) bad("gate 'angle' must be a number");
    g.angle = j["angle"].get<double>();
  }
  if (j.contains("matrix")) {
    const Json& m = j["matrix"];
    if (!m.is_array() || m.size() != 4) bad("gate 'matrix' must list four entries");
    for (size_t i = 0; i < 4; ++i) {
      const Json& e = m[i];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        bad("matrix entries must be [re, im] pairs");
      g.matrix[i] = cplx(e[0].get<double>(), e[1].get<double>());
    }
  }
  if (j.contains("bit")) {
    if (!j["bit"].is_string()) bad("gate 'bit' must be a string");
    g.bit = j["bit"].get<std::string>();
  }
  if (j.contains("basis")) g.basis = static_cast<int>(int_field(j, "basis"));
  return g;
}

Json circuit_to_json(const Circuit& c) {
  Json j;
  Json qs = Json::array();
  for (const QubitRef& q : c.qubits) qs.push_back(qubit_to_json(q));
  j["qubits"] = std::move(qs);
  Json gs = Json::array();
  for (const Gate& g : c.gates) gs.push_back(gate_to_json(g));
  j["gates"] = std::move(gs);
  return j;
}

Circuit circuit_from_json(const Json& j) {
  if (!j.is_object()) bad("circuit must be an object");
  Circuit c;
  if (j.contains("qubits")) {
    const Json& qs = j["qubits"];
    if (!qs.is_array()) bad("circuit 'qubits' must be an array");
    for (const Json& q : qs) c.add_qubit(qubit_from_json(q));
  }
  const Json& gs = field(j, "gates");
  if (!gs.is_array()) bad("circuit 'gates' must be an array");
  for (const Json& g : gs) c.append(gate_from_json(g));
  return c;
}

Json topology_to_json(const Topology& t) {
  Json arr = Json::array();
  for (const QpuSpec& q : t.qpus) {
    Json e;
    e["id"] = q.id;
    e["qubits"] = q.num_qubits;
    if (!q.gate_times.empty()) e["gate_times"] = q.gate_times;
    arr.push_back(std::move(e));
  }
  return Json{{"qpus", std::move(arr)}};
}

Topology topology_from_json(const Json& j) {
  if (!j.is_object()) bad("topology must be an object");
  const Json& qs = field(j, "qpus");
  if (!qs.is_array() || qs.empty()) bad("topology 'qpus' must be a non-empty array");
  Topology t;
  for (const Json& q : qs) {
    QpuSpec spec;
    spec.id = str_field(q, "id");
    spec.num_qubits = static_cast<int>(int_field(q, "qubits"));
    if (spec.num_qubits < 1) bad("QPU '" + spec.id + "' must have at least one qubit");
    if (t.index_of(spec.id) >= 0) bad("duplicate QPU id '" + spec.id + "'");
    if (q.contains("gate_times")) {
      const Json& gt = q["gate_times"];
      if (!gt.is_object()) bad("'gate_times' must map gate kinds to ticks");
      for (auto it = gt.begin(); it != gt.end(); ++it) {
        if (!it.value().is_number_integer()) bad("gate time for '" + it.key() + "' must be an integer");
        spec.gate_times[it.key()] = it.value().get<int>();
      }
    }
    t.qpus.push_back(std::move(spec));
  }
  return t;
}

std::vector<HamiltonianTerm> terms_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) bad("Hamiltonian must be a non-empty array of terms");
  std::vector<HamiltonianTerm> terms;
  for (const Json& e : j) {
    HamiltonianTerm t;
    t.coefficient = num_field(e, "coefficient");
    t.pauli = str_field(e, "pauli");
    for (char ch : t.pauli)
      if (ch != 'I' && ch != 'X' && ch != 'Y' && ch != 'Z')
        bad("Pauli label '" + t.pauli + "' may only contain I, X, Y, Z");
    terms.push_back(std::move(t));
  }
  return terms;
}

AccountingProfile profile_from_json(const Json& j) {
  if (!j.is_object()) bad("accounting profile must be an object");
  AccountingProfile p;
  auto set = [&](const char* key, double* slot) {
    if (j.contains(key)) {
      if (!j[key].is_number()) bad(std::string("profile field '") + key + "' must be a number");
      *slot = j[key].get<double>();
    }
  };
  set("prep", &p.prep);
  set("gate", &p.gate);
  set("measure", &p.measure);
  set("epr_generation", &p.epr_generation);
  set("epr_transmission", &p.epr_transmission);
  set("entangle_cnot", &p.entangle_cnot);
  set("entangle_measure", &p.entangle_measure);
  set("entangle_send", &p.entangle_send);
  set("entangle_recv", &p.entangle_recv);
  set("entangle_correction", &p.entangle_correction);
  set("disentangle_h", &p.disentangle_h);
  set("disentangle_measure", &p.disentangle_measure);
  set("disentangle_send", &p.disentangle_send);
  set("disentangle_recv", &p.disentangle_recv);
  set("disentangle_correction", &p.disentangle_correction);
  set("ancilla_reset", &p.ancilla_reset);
  static const char* known[] = {"prep", "gate", "measure", "epr_generation", "epr_transmission",
                                "entangle_cnot", "entangle_measure", "entangle_send",
                                "entangle_recv", "entangle_correction", "disentangle_h",
                                "disentangle_measure", "disentangle_send", "disentangle_recv",
                                "disentangle_correction", "ancilla_reset"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) bad("unknown profile field '" + it.key() + "'");
  }
  return p;
}

Json report_to_json(const ResourceReport& r) {
  return Json{{"prep_count", r.prep_count},
              {"gate_count", r.gate_count},
              {"measure_count", r.measure_count},
              {"epr_pairs", r.epr_pairs},
              {"classical_messages", r.classical_messages},
              {"correction_count", r.correction_count},
              {"reset_count", r.reset_count},
              {"total_ops", r.total_ops},
              {"ticks_elapsed", r.ticks_elapsed}};
}

Json outcome_to_json(const Outcome& oc) {
  Json j;
  j["program"] = oc.program_index;
  j["repetitions"] = oc.repetitions;
  if (!oc.label.empty()) j["label"] = oc.label;
  if (!oc.counts.empty()) {
    Json counts = Json::object();
    for (const auto& [bs, n] : oc.counts) counts[bs] = n;
    j["counts"] = std::move(counts);
    j["bit_names"] = oc.bit_names;
  }
  if (oc.value) j["value"] = *oc.value;
  return j;
}

Json merged_to_json(const MergedValue& mv) {
  struct Visitor {
    Json operator()(double v) const { return v; }
    Json operator()(const std::vector<double>& v) const { return v; }
    Json operator()(const std::vector<int>& v) const { return v; }
  };
  return std::visit(Visitor{}, mv);
}

Json round_to_json(const RoundReport& rr) {
  Json j;
  j["round"] = rr.round + 1;  // reports are 1-based
  j["qpu_programs"] = rr.qpu_programs;
  j["ticks_elapsed"] = rr.ticks_elapsed;
  j["resources"] = report_to_json(rr.resources);
  return j;
}

Json run_result_to_json(const ParallelRunResult& rr) {
  Json j;
  j["value"] = merged_to_json(rr.merged);
  Json per = Json::array();
  for (const Outcome& oc : rr.outcomes) per.push_back(outcome_to_json(oc));
  j["per_program"] = std::move(per);
  Json rounds = Json::array();
  for (const RoundReport& r : rr.rounds) rounds.push_back(round_to_json(r));
  j["reports"] = std::move(rounds);
  j["totals"] = report_to_json(rr.totals);
  j["warnings"] = rr.warnings;
  return j;
}

Json schedule_to_json(const Schedule& s) {
  Json rounds = Json::array();
  for (const auto& round : s.rounds) {
    Json per_qpu = Json::array();
    for (const std::set<int>& ids : round) {
      Json arr = Json::array();
      for (int i : ids) arr.push_back(i + 1);
      per_qpu.push_back(std::move(arr));
    }
    rounds.push_back(std::move(per_qpu));
  }
  return Json{{"rounds", std::move(rounds)}};
}

Json trace_event_to_json(const TraceEvent& e) {
  Json j;
  j["tick"] = e.tick;
  j["node"] = e.node;
  j["seq"] = e.seq;
  j["kind"] = instr_kind_name(e.kind);
  if (e.kind != InstrKind::REPORT) {
    j["gate"] = kind_name(e.gate_kind);
    Json qs = Json::array();
    for (const QubitRef& q : e.qubits) qs.push_back(qubit_to_json(q));
    j["qubits"] = std::move(qs);
  }
  if (!e.bit.empty()) j["bit"] = e.bit;
  if (!e.peer.empty()) j["peer"] = e.peer;
  j["program"] = e.program;
  j["role"] = role_name(e.role);
  if (e.block >= 0) j["block"] = e.block;
  if (e.value >= 0) j["value"] = e.value;
  return j;
}

std::string trace_to_jsonl(const Trace& trace) {
  std::string out;
  for (const TraceEvent& e : trace) {
    out += trace_event_to_json(e).dump();
    out += '\n';
  }
  return out;
}

std::vector<FeatureVector> vectors_from_csv(const std::string& text) {
  std::vector<FeatureVector> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed;
    for (char ch : line)
      if (!std::isspace(static_cast<unsigned char>(ch))) trimmed += ch;
    if (trimmed.empty()) continue;
    std::vector<double> vals;
    std::istringstream ls(trimmed);
    std::string cell;
    bool numeric = true;
    while (std::getline(ls, cell, ',')) {
      try {
        size_t used = 0;
        double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        vals.push_back(v);
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (out.empty() && lineno == 1) continue;  // header row
      throw Error("invalid csv: non-numeric cell on line " + std::to_string(lineno));
    }
    if (!vals.empty()) out.push_back(FeatureVector::from_values(std::move(vals)));
  }
  if (out.empty()) throw Error("invalid csv: no data rows");
  return out;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw Error("invalid json: " + path + ": " + e.what());
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << text;
  if (!out) throw Error("cannot write file: " + path);
}

}  // namespace dqs
