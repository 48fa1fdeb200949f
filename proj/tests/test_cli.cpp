#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dqs/algorithms.hpp"
#include "dqs/engine.hpp"
#include "dqs/json_io.hpp"
#include "dqs/scheduler.hpp"

using namespace dqs;

namespace {

QubitRef q(int i) { return QubitRef::abstract(i); }

// Exit status plus the merged stdout/stderr text of one dqsim invocation.
struct CliRun {
  int status = -1;
  std::string out;
};

CliRun invoke(const std::string& args) {
  const std::string cmd = std::string(DQSIM_BIN) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliRun r;
  char buf[4096];
  size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int rc = pclose(pipe);
  if (WIFEXITED(rc)) r.status = WEXITSTATUS(rc);
  return r;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Circuit bell_circuit() {
  Circuit c;
  c.append(Gate::prepare(q(0)));
  c.append(Gate::prepare(q(1)));
  c.append(Gate::single(GateKind::H, q(0)));
  c.append(Gate::cnot(q(0), q(1)));
  c.append(Gate::measure(q(0), "c0"));
  c.append(Gate::measure(q(1), "c1"));
  return c;
}

Topology one_qpu(int qubits) {
  Topology topo;
  topo.qpus.push_back({"QPU_0", qubits, {}});
  return topo;
}

void write_file(const std::string& path, const std::string& text) {
  write_text_file(path, text);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("qpe prints the worked example and repeats byte for byte") {
  const std::string args = "qpe --n 3 --phase 0.3333333 --shots 1000 --seed 7";
  CliRun a = invoke(args);
  REQUIRE(a.status == 0);
  CHECK(contains(a.out, "estimated phase 0.375"));
  CHECK(contains(a.out, "modal frequency"));
  CHECK(contains(a.out, "epr_pairs=3"));
  CHECK(contains(a.out, "messages=6"));

  CliRun b = invoke(args);
  CHECK(b.status == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("qpe json mode carries the full run result") {
  CliRun r = invoke("qpe --n 3 --phase 1/3 --shots 1000 --seed 7 --json");
  REQUIRE(r.status == 0);
  Json j = Json::parse(r.out);
  CHECK(j["estimated_phase"].get<double>() == 0.375);
  CHECK(j["counting_qubits"] == 3);
  CHECK(j["per_program"].size() == 1);
  CHECK(j["totals"]["epr_pairs"] == 3);
  CHECK(j["totals"]["classical_messages"] == 6);
  CHECK(j["warnings"].empty());
}

TEST_CASE("vqe json numbers survive a parse round trip") {
  // cos(0.6) needs far more than six digits; a bit-exact match after parsing
  // proves the dump did not truncate.
  Circuit ansatz;
  ansatz.append(Gate::prepare(q(0)));
  ansatz.append(Gate::rotation(GateKind::RY, q(0), 0.6));
  Topology topo = one_qpu(2);

  const std::string h_path = "/tmp/dqs_cli_h.json";
  const std::string a_path = "/tmp/dqs_cli_a.json";
  const std::string t_path = "/tmp/dqs_cli_t.json";
  write_file(h_path, "[{\"pauli\": \"Z\", \"coefficient\": 1.0}]\n");
  write_file(a_path, circuit_to_json(ansatz).dump(2) + "\n");
  write_file(t_path, topology_to_json(topo).dump(2) + "\n");

  HamiltonianTerm term;
  term.coefficient = 1.0;
  term.pauli = "Z";
  VqeOptions vo;
  vo.exact = true;
  ProgramSet ps = vqe_programs({term}, ansatz, vo);
  ParallelProgram pp = build_parallel_program(topo, ps.programs, greedy_allocator(), ps.merge);
  const double expected = std::get<double>(run_parallel(pp, topo, 0, EngineOptions{}).merged);
  CHECK(expected == doctest::Approx(std::cos(0.6)).epsilon(1e-12));

  CliRun r = invoke("vqe --hamiltonian " + h_path + " --ansatz " + a_path + " --topology " +
                    t_path + " --json");
  REQUIRE(r.status == 0);
  Json j = Json::parse(r.out);
  CHECK(j["energy"].get<double>() == expected);
  CHECK(contains(r.out, "0.825335614"));

  std::remove(h_path.c_str());
  std::remove(a_path.c_str());
  std::remove(t_path.c_str());
}

TEST_CASE("run samples a bell pair and reports resources") {
  const std::string c_path = "/tmp/dqs_cli_bell.json";
  const std::string t_path = "/tmp/dqs_cli_topo2.json";
  write_file(c_path, circuit_to_json(bell_circuit()).dump(2) + "\n");
  write_file(t_path, topology_to_json(one_qpu(2)).dump(2) + "\n");

  CliRun r = invoke("run --circuit " + c_path + " --topology " + t_path +
                    " --shots 200 --seed 11");
  REQUIRE(r.status == 0);
  CHECK(contains(r.out, "bits: c0 c1"));
  CHECK(contains(r.out, "epr_pairs=0"));

  // Count lines look like "00  103"; a bell pair only ever shows 00 and 11.
  long total = 0;
  std::istringstream lines(r.out);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.size() < 4 || line[2] != ' ') continue;
    const std::string key = line.substr(0, 2);
    if (key != "00" && key != "01" && key != "10" && key != "11") continue;
    CHECK((key == "00" || key == "11"));
    total += std::stol(line.substr(3));
  }
  CHECK(total == 200);

  std::remove(c_path.c_str());
  std::remove(t_path.c_str());
}

TEST_CASE("run rejects bad inputs with exit 2") {
  const std::string c_path = "/tmp/dqs_cli_badcirc.json";
  const std::string t_path = "/tmp/dqs_cli_topo.json";
  write_file(t_path, topology_to_json(one_qpu(2)).dump(2) + "\n");

  SUBCASE("unparseable circuit file") {
    write_file(c_path, "{ this is not json\n");
    CliRun r = invoke("run --circuit " + c_path + " --topology " + t_path + " --seed 1");
    CHECK(r.status == 2);
    CHECK(contains(r.out, "error:"));
    CHECK(contains(r.out, "invalid json"));
  }
  SUBCASE("validation failure lists the violations") {
    Json j;
    j["gates"] = Json::array({Json{{"kind", "CNOT"},
                                   {"operands", Json::array({Json{{"index", 0}},
                                                             Json{{"index", 0}}})}}});
    write_file(c_path, j.dump(2) + "\n");
    CliRun r = invoke("run --circuit " + c_path + " --topology " + t_path + " --seed 1");
    CHECK(r.status == 2);
    CHECK(contains(r.out, "invalid circuit:"));
    CHECK(contains(r.out, "duplicate operands"));
  }
  SUBCASE("sampling without a seed") {
    write_file(c_path, circuit_to_json(bell_circuit()).dump(2) + "\n");
    CliRun r = invoke("run --circuit " + c_path + " --topology " + t_path + " --shots 10");
    CHECK(r.status == 2);
    CHECK(contains(r.out, "--seed"));
  }
  SUBCASE("zero shots") {
    write_file(c_path, circuit_to_json(bell_circuit()).dump(2) + "\n");
    CliRun r = invoke("run --circuit " + c_path + " --topology " + t_path +
                      " --shots 0 --seed 1");
    CHECK(r.status == 2);
    CHECK(contains(r.out, "--shots"));
  }

  std::remove(c_path.c_str());
  std::remove(t_path.c_str());
}

TEST_CASE("engine faults after validation exit 1") {
  // Two one-qubit QPUs leave no room for the cat ancillas, so the remap
  // itself fails once --strict-ancilla is on. That happens inside the run
  // phase, well past flag validation.
  Topology topo;
  topo.qpus.push_back({"A", 1, {}});
  topo.qpus.push_back({"B", 1, {}});
  const std::string c_path = "/tmp/dqs_cli_bell1.json";
  const std::string t_path = "/tmp/dqs_cli_topo11.json";
  write_file(c_path, circuit_to_json(bell_circuit()).dump(2) + "\n");
  write_file(t_path, topology_to_json(topo).dump(2) + "\n");

  CliRun strict = invoke("run --circuit " + c_path + " --topology " + t_path +
                         " --shots 8 --seed 3 --strict-ancilla");
  CHECK(strict.status == 1);
  CHECK(contains(strict.out, "strict ancilla"));

  CliRun loose = invoke("run --circuit " + c_path + " --topology " + t_path +
                        " --shots 8 --seed 3");
  CHECK(loose.status == 0);
  CHECK(contains(loose.out, "warning: capacity exceeded"));

  std::remove(c_path.c_str());
  std::remove(t_path.c_str());
}

TEST_CASE("parse errors exit 2 and point at --help") {
  CliRun bogus = invoke("qpe --phase 0.25 --seed 1 --bogus");
  CHECK(bogus.status == 2);
  CHECK(contains(bogus.out, "--bogus"));
  CHECK(contains(bogus.out, "--help"));

  CliRun none = invoke("");
  CHECK(none.status == 2);

  CliRun help = invoke("--help");
  CHECK(help.status == 0);
  CHECK(contains(help.out, "sweep-qpe"));
}

TEST_CASE("kmeans clusters the toy csv") {
  const std::string d_path = "/tmp/dqs_cli_pts.csv";
  write_file(d_path, "x0,x1\n1,0\n0,1\n0.9,0.1\n0.1,0.9\n");

  CliRun human = invoke("kmeans --data " + d_path + " --clusters 2 --iterations 4 --exact");
  REQUIRE(human.status == 0);
  CHECK(contains(human.out, "assignments: 0 1 0 1"));
  CHECK(contains(human.out, "iterations: 2"));

  CliRun js = invoke("kmeans --data " + d_path +
                     " --clusters 2 --iterations 4 --exact --json");
  REQUIRE(js.status == 0);
  Json j = Json::parse(js.out);
  CHECK(j["assignments"] == Json::array({0, 1, 0, 1}));
  CHECK(j["iterations"] == 2);

  std::remove(d_path.c_str());
}

TEST_CASE("sweep-qpe writes the csv to a file") {
  const std::string out_path = "/tmp/dqs_cli_sweep.csv";
  CliRun r = invoke("sweep-qpe --from 1 --to 3 --out " + out_path);
  REQUIRE(r.status == 0);
  CHECK(contains(r.out, "wrote " + out_path));
  CHECK(slurp(out_path) == "n,monolithic,distributed\n1,7,19\n2,14,38\n3,24,60\n");

  CliRun bad = invoke("sweep-qpe --from 5 --to 2");
  CHECK(bad.status == 2);
  CHECK(contains(bad.out, "--from"));

  std::remove(out_path.c_str());
}

}  // TEST_SUITE
