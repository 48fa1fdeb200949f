// dqsim: schedule, remap and execute quantum programs on a simulated QPU
// cluster. Exit codes: 0 success, 2 input/validation failure, 1 runtime
// failure inside the engine.

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dqs/algorithms.hpp"
#include "dqs/engine.hpp"
#include "dqs/error.hpp"
#include "dqs/json_io.hpp"

using namespace dqs;

namespace {

struct CommonOpts {
  bool json = false;
  bool serial = false;
  bool strict = false;
  int latency = 1;
  std::string profile_path;
  std::string trace_path;
  std::string report_path;
  uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& co) {
  cmd->add_flag("--json", co.json, "emit one JSON object on stdout");
  cmd->add_flag("--serial", co.serial, "use the serial reference kernels");
  cmd->add_flag("--strict-ancilla", co.strict, "fail instead of overflowing ancilla capacity");
  cmd->add_option("--latency", co.latency, "classical message latency in ticks")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--profile", co.profile_path, "accounting profile JSON file");
  cmd->add_option("--trace", co.trace_path, "write the shot-0 trace as JSONL");
  cmd->add_option("--report", co.report_path, "write the full run result as JSON");
  cmd->add_option("--seed", co.seed, "sampling seed (required when sampling)")
      ->each([&co](const std::string&) { co.seed_set = true; });
}

EngineOptions engine_options(const CommonOpts& co) {
  EngineOptions opt;
  opt.kernels = co.serial ? KernelMode::Serial : KernelMode::Parallel;
  opt.strict_ancilla = co.strict;
  opt.message_latency = co.latency;
  if (!co.profile_path.empty())
    opt.accounting = profile_from_json(load_json_file(co.profile_path));
  return opt;
}

void require_seed(const CommonOpts& co) {
  if (!co.seed_set) throw Error("invalid arguments: sampling runs need --seed");
}

std::string human_report(const ParallelRunResult& rr) {
  std::ostringstream os;
  for (const RoundReport& r : rr.rounds) {
    os << "round " << (r.round + 1) << ":";
    for (size_t k = 0; k < r.qpu_programs.size(); ++k) {
      os << " qpu" << k << "={";
      bool first = true;
      for (int id : r.qpu_programs[k]) {
        if (!first) os << ",";
        os << id;
        first = false;
      }
      os << "}";
    }
    os << " ticks=" << r.ticks_elapsed << "\n";
  }
  const ResourceReport& t = rr.totals;
  os << "totals: ops=" << t.total_ops << " epr_pairs=" << t.epr_pairs
     << " messages=" << t.classical_messages << " preps=" << t.prep_count
     << " gates=" << t.gate_count << " measures=" << t.measure_count
     << " corrections=" << t.correction_count << " resets=" << t.reset_count << "\n";
  for (const std::string& w : rr.warnings) os << "warning: " << w << "\n";
  return os.str();
}

void emit(const CommonOpts& co, const ParallelRunResult& rr, const std::string& human,
          const Json& extra = Json::object()) {
  if (!co.trace_path.empty()) {
    std::string all;
    for (const Trace& tr : rr.traces) all += trace_to_jsonl(tr);
    write_text_file(co.trace_path, all);
  }
  Json full = run_result_to_json(rr);
  for (auto it = extra.begin(); it != extra.end(); ++it) full[it.key()] = it.value();
  if (!co.report_path.empty()) write_text_file(co.report_path, full.dump(2) + "\n");
  if (co.json)
    std::cout << full.dump(2) << "\n";
  else
    std::cout << human;
}

double parse_phase(const std::string& s) {
  size_t slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      double num = std::stod(s.substr(0, slash));
      double den = std::stod(s.substr(slash + 1));
      if (den == 0.0) throw Error("invalid arguments: zero denominator in --phase");
      return num / den;
    }
    return std::stod(s);
  } catch (const std::exception&) {
    throw Error("invalid arguments: cannot parse --phase value '" + s + "'");
  }
}

// Two-phase dispatch so input problems exit 2 and engine faults exit 1.
int guarded(const std::function<std::function<void()>()>& build) {
  std::function<void()> run;
  try {
    run = build();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  try {
    run();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

int cmd_run(const CommonOpts& co, const std::string& circuit_path,
            const std::string& topology_path, long shots, bool parity) {
  return guarded([&]() -> std::function<void()> {
    Circuit c = circuit_from_json(load_json_file(circuit_path));
    Topology topo = topology_from_json(load_json_file(topology_path));
    ValidationReport vr = validate(c, topo);
    if (!vr.ok()) {
      std::string msg = "invalid circuit:";
      for (const std::string& v : vr.violations) msg += "\n  " + v;
      throw Error(msg);
    }
    require_seed(co);
    if (shots < 1) throw Error("invalid arguments: --shots must be at least 1");

    Program pr;
    pr.circuit = std::move(c);
    pr.repetitions = shots;
    pr.output.mode = parity ? OutputSpec::Mode::Parity : OutputSpec::Mode::Bits;
    for (const Gate& g : pr.circuit.gates)
      if (g.kind == GateKind::MEASURE) pr.output.bits.push_back(g.bit);
    if (pr.output.bits.empty())
      throw Error("invalid circuit: nothing to sample, the circuit never measures");

    EngineOptions opt = engine_options(co);
    ParallelProgram pp =
        build_parallel_program(topo, {std::move(pr)}, greedy_allocator(), IdentityMerge{});
    return [&co, opt, pp = std::move(pp), topo = std::move(topo)]() {
      ParallelRunResult rr = run_parallel(pp, topo, co.seed, opt);
      std::ostringstream os;
      const Outcome& oc = rr.outcomes[0];
      os << "bits: ";
      for (size_t i = 0; i < oc.bit_names.size(); ++i)
        os << (i ? " " : "") << oc.bit_names[i];
      os << "\n";
      for (const auto& [bs, n] : oc.counts) os << bs << "  " << n << "\n";
      if (oc.value) os << "parity estimate: " << *oc.value << "\n";
      os << human_report(rr);
      emit(co, rr, os.str());
    };
  });
}

int cmd_qpe(const CommonOpts& co, int n, const std::string& phase_str, long shots,
            const std::string& topology_path, bool local) {
  return guarded([&]() -> std::function<void()> {
    require_seed(co);
    double phi = parse_phase(phase_str);
    QpeProgram qp = qpe_program(n, phase_unitary(phi));
    Program pr;
    pr.circuit = qp.circuit;
    pr.repetitions = shots;
    pr.output = qp.output;
    EngineOptions opt = engine_options(co);

    ParallelProgram pp;
    Topology topo;
    if (!local) {
      topo = topology_path.empty() ? qpe_two_qpu_topology(n)
                                   : topology_from_json(load_json_file(topology_path));
      Allocation alloc = qpe_split_allocation(topo, n);
      pp.programs = {pr};
      pp.allocations = {alloc};
      std::vector<std::set<int>> round;
      for (const QpuSpec& q : topo.qpus) {
        std::set<int> ids;
        for (const QubitRef& s : alloc.slots)
          if (s.node == q.id) ids.insert(0);
        round.push_back(std::move(ids));
      }
      pp.schedule.rounds = {std::move(round)};
      pp.merge_spec = qp.merge;
    }

    return [&co, opt, n, local, pr = std::move(pr), qp = std::move(qp), pp = std::move(pp),
            topo = std::move(topo)]() {
      ParallelRunResult rr = local ? run_sequential({pr}, qp.merge, co.seed, opt)
                                   : run_parallel(pp, topo, co.seed, opt);
      double est = std::get<double>(rr.merged);
      const Outcome& oc = rr.outcomes[0];
      std::string modal = oc.modal_bits();
      std::ostringstream os;
      os << "estimated phase " << est << "\n";
      os << "modal bits:";
      for (size_t i = 0; i < modal.size(); ++i) os << " " << oc.bit_names[i] << "=" << modal[i];
      os << "\nmodal frequency: "
         << static_cast<double>(oc.counts.at(modal)) / static_cast<double>(oc.repetitions)
         << "\n";
      os << human_report(rr);
      Json extra;
      extra["estimated_phase"] = est;
      extra["counting_qubits"] = n;
      emit(co, rr, os.str(), extra);
    };
  });
}

int cmd_vqe(const CommonOpts& co, const std::string& hamiltonian_path,
            const std::string& ansatz_path, const std::string& topology_path, long shots,
            bool shots_set) {
  return guarded([&]() -> std::function<void()> {
    std::vector<HamiltonianTerm> terms = terms_from_json(load_json_file(hamiltonian_path));
    Circuit ansatz = circuit_from_json(load_json_file(ansatz_path));
    Topology topo = topology_from_json(load_json_file(topology_path));
    VqeOptions vo;
    vo.exact = !shots_set;
    vo.shots = shots;
    if (!vo.exact) require_seed(co);
    ProgramSet ps = vqe_programs(terms, ansatz, vo);
    EngineOptions opt = engine_options(co);
    ParallelProgram pp = build_parallel_program(topo, ps.programs, greedy_allocator(), ps.merge);
    return [&co, opt, pp = std::move(pp), topo = std::move(topo)]() {
      ParallelRunResult rr = run_parallel(pp, topo, co.seed, opt);
      std::ostringstream os;
      os << "energy: " << std::get<double>(rr.merged) << "\n";
      for (const Outcome& oc : rr.outcomes)
        os << "term " << (oc.label.empty() ? "I" : oc.label) << ": " << oc.scalar() << "\n";
      os << human_report(rr);
      Json extra;
      extra["energy"] = std::get<double>(rr.merged);
      emit(co, rr, os.str(), extra);
    };
  });
}

int cmd_plae(const CommonOpts& co, double amplitude, bool amplitude_set,
             const std::string& oracle_path, const std::string& iterate_path,
             const std::string& topology_path, const PlaeConfig& cfg_in) {
  return guarded([&]() -> std::function<void()> {
    require_seed(co);
    PlaeConfig cfg = cfg_in;
    Circuit oracle;
    Circuit iterate;
    if (!oracle_path.empty() || !iterate_path.empty()) {
      if (oracle_path.empty() || iterate_path.empty())
        throw Error("invalid arguments: --oracle and --iterate go together");
      oracle = circuit_from_json(load_json_file(oracle_path));
      iterate = circuit_from_json(load_json_file(iterate_path));
    } else if (amplitude_set) {
      oracle = plae_rotation_oracle(amplitude);
      iterate = plae_rotation_iterate(amplitude);
    } else {
      throw Error("invalid arguments: pass --amplitude or --oracle/--iterate");
    }
    ProgramSet ps = plae_programs(oracle, iterate, cfg);
    Topology topo;
    if (!topology_path.empty()) {
      topo = topology_from_json(load_json_file(topology_path));
    } else {
      topo.qpus.push_back({"QPU_0", std::max(1, oracle.width()), {}});
    }
    EngineOptions opt = engine_options(co);
    ParallelProgram pp = build_parallel_program(topo, ps.programs, greedy_allocator(), ps.merge);
    return [&co, opt, amplitude, amplitude_set, pp = std::move(pp), topo = std::move(topo)]() {
      ParallelRunResult rr = run_parallel(pp, topo, co.seed, opt);
      double est = std::get<double>(rr.merged);
      std::ostringstream os;
      os << "estimated amplitude " << est << "\n";
      if (amplitude_set) os << "target amplitude " << amplitude << "\n";
      os << human_report(rr);
      Json extra;
      extra["estimated_amplitude"] = est;
      emit(co, rr, os.str(), extra);
    };
  });
}

int cmd_kmeans(const CommonOpts& co, const std::string& data_path,
               const std::string& topology_path, int clusters, int iterations, long shots,
               bool exact) {
  return guarded([&]() -> std::function<void()> {
    std::ifstream in(data_path);
    if (!in) throw Error("cannot read file: " + data_path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::vector<FeatureVector> points = vectors_from_csv(buf.str());
    SwapTestOptions sopt;
    sopt.exact = exact;
    sopt.shots = shots;
    if (!exact) require_seed(co);

    Topology topo;
    if (!topology_path.empty()) {
      topo = topology_from_json(load_json_file(topology_path));
    } else {
      int nq = 0;
      for (const FeatureVector& p : points) nq = std::max(nq, p.qubit_count());
      topo.qpus.push_back({"QPU_0", 1 + 2 * nq, {}});
    }
    return [&co, points = std::move(points), topo = std::move(topo), clusters, iterations,
            sopt]() {
      KmeansResult kr = kmeans_cluster(points, clusters, iterations, topo, co.seed, sopt);
      if (co.json) {
        Json j;
        j["assignments"] = kr.assignments;
        Json cents = Json::array();
        for (const FeatureVector& c : kr.centroids) cents.push_back(c.values);
        j["centroids"] = std::move(cents);
        j["iterations"] = kr.iterations_run;
        std::cout << j.dump(2) << "\n";
        if (!co.report_path.empty()) write_text_file(co.report_path, j.dump(2) + "\n");
        return;
      }
      std::ostringstream os;
      os << "assignments:";
      for (int a : kr.assignments) os << " " << a;
      os << "\niterations: " << kr.iterations_run << "\n";
      for (size_t j = 0; j < kr.centroids.size(); ++j) {
        os << "centroid " << j << ":";
        for (double v : kr.centroids[j].values) os << " " << v;
        os << "\n";
      }
      std::cout << os.str();
    };
  });
}

int cmd_sweep(const CommonOpts& co, int from, int to, const std::string& out_path) {
  return guarded([&]() -> std::function<void()> {
    AccountingProfile profile;
    if (!co.profile_path.empty()) profile = profile_from_json(load_json_file(co.profile_path));
    if (from < 1 || to < from) throw Error("invalid arguments: bad --from/--to range");
    return [&co, profile, from, to, out_path]() {
      std::vector<QpeSweepRow> rows = sweep_qpe(from, to, profile);
      if (co.json) {
        Json arr = Json::array();
        for (const QpeSweepRow& r : rows)
          arr.push_back(Json{{"n", r.n}, {"monolithic", r.monolithic},
                             {"distributed", r.distributed}});
        std::cout << arr.dump(2) << "\n";
        if (!out_path.empty()) write_text_file(out_path, arr.dump(2) + "\n");
        return;
      }
      std::string csv = sweep_csv(rows);
      if (!out_path.empty()) {
        write_text_file(out_path, csv);
        std::cout << "wrote " << out_path << "\n";
      } else {
        std::cout << csv;
      }
    };
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"schedule, remap and execute quantum programs on simulated QPU clusters"};
  app.require_subcommand(1);

  CommonOpts co_run, co_qpe, co_vqe, co_plae, co_kmeans, co_sweep;

  auto* run = app.add_subcommand("run", "execute one circuit on a cluster");
  std::string run_circuit, run_topology;
  long run_shots = 1024;
  bool run_parity = false;
  run->add_option("--circuit", run_circuit, "circuit JSON file")->required();
  run->add_option("--topology", run_topology, "topology JSON file")->required();
  run->add_option("--shots", run_shots, "repetitions");
  run->add_flag("--parity", run_parity, "report the parity estimate over all measured bits");
  add_common(run, co_run);

  auto* qpe = app.add_subcommand("qpe", "phase estimation split across two QPUs");
  int qpe_n = 3;
  std::string qpe_phase, qpe_topology;
  long qpe_shots = 1024;
  bool qpe_local = false;
  qpe->add_option("--n", qpe_n, "counting qubits")->check(CLI::Range(1, 20));
  qpe->add_option("--phase", qpe_phase, "target phase, e.g. 0.25 or 1/3")->required();
  qpe->add_option("--shots", qpe_shots, "repetitions");
  qpe->add_option("--topology", qpe_topology, "topology JSON file (default: two QPUs)");
  qpe->add_flag("--local", qpe_local, "run monolithically on one QPU instead");
  add_common(qpe, co_qpe);

  auto* vqe = app.add_subcommand("vqe", "expectation of a term-split Hamiltonian");
  std::string vqe_h, vqe_ansatz, vqe_topology;
  long vqe_shots = 1024;
  vqe->add_option("--hamiltonian", vqe_h, "terms JSON file")->required();
  vqe->add_option("--ansatz", vqe_ansatz, "ansatz circuit JSON file")->required();
  vqe->add_option("--topology", vqe_topology, "topology JSON file")->required();
  auto* vqe_shots_opt =
      vqe->add_option("--shots", vqe_shots, "sample instead of exact expectations");
  add_common(vqe, co_vqe);

  auto* plae = app.add_subcommand("plae", "power-law schedule amplitude estimation");
  double plae_amplitude = 0.0;
  std::string plae_oracle, plae_iterate, plae_topology;
  PlaeConfig plae_cfg;
  auto* plae_amp_opt = plae->add_option("--amplitude", plae_amplitude,
                                        "target amplitude for the built-in rotation oracle");
  plae->add_option("--oracle", plae_oracle, "state-preparation circuit JSON");
  plae->add_option("--iterate", plae_iterate, "Grover iterate circuit JSON");
  plae->add_option("--beta", plae_cfg.beta, "schedule exponent in (0, 1]");
  plae->add_option("--terms", plae_cfg.terms, "number of query counts K");
  plae->add_option("--shots", plae_cfg.shots, "shots per query count");
  plae->add_option("--duplicates", plae_cfg.duplicates, "program copies per query count");
  plae->add_option("--grid", plae_cfg.grid_resolution, "MLE grid resolution");
  plae->add_option("--topology", plae_topology, "topology JSON file");
  add_common(plae, co_plae);

  auto* kmeans = app.add_subcommand("kmeans", "swap-test nearest-centroid clustering");
  std::string km_data, km_topology;
  int km_k = 2;
  int km_iter = 5;
  long km_shots = 256;
  bool km_exact = false;
  kmeans->add_option("--data", km_data, "CSV of feature vectors, one per row")->required();
  kmeans->add_option("--clusters", km_k, "cluster count")->check(CLI::PositiveNumber);
  kmeans->add_option("--iterations", km_iter, "maximum Lloyd iterations")
      ->check(CLI::PositiveNumber);
  kmeans->add_option("--shots", km_shots, "shots per swap test");
  kmeans->add_flag("--exact", km_exact, "use exact overlaps instead of sampling");
  kmeans->add_option("--topology", km_topology, "topology JSON file");
  add_common(kmeans, co_kmeans);

  auto* sweep = app.add_subcommand("sweep-qpe", "operation census, monolithic vs distributed");
  int sweep_from = 1;
  int sweep_to = 11;
  std::string sweep_out;
  sweep->add_option("--from", sweep_from, "smallest counting register");
  sweep->add_option("--to", sweep_to, "largest counting register");
  sweep->add_option("--out", sweep_out, "write CSV here instead of stdout");
  add_common(sweep, co_sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) return cmd_run(co_run, run_circuit, run_topology, run_shots, run_parity);
  if (qpe->parsed())
    return cmd_qpe(co_qpe, qpe_n, qpe_phase, qpe_shots, qpe_topology, qpe_local);
  if (vqe->parsed())
    return cmd_vqe(co_vqe, vqe_h, vqe_ansatz, vqe_topology, vqe_shots,
                   vqe_shots_opt->count() > 0);
  if (plae->parsed())
    return cmd_plae(co_plae, plae_amplitude, plae_amp_opt->count() > 0, plae_oracle,
                    plae_iterate, plae_topology, plae_cfg);
  if (kmeans->parsed())
    return cmd_kmeans(co_kmeans, km_data, km_topology, km_k, km_iter, km_shots, km_exact);
  if (sweep->parsed()) return cmd_sweep(co_sweep, sweep_from, sweep_to, sweep_out);
  return 2;
}
