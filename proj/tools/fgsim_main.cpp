#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "fgsim/channels.hpp"
#include "fgsim/circuit_io.hpp"
#include "fgsim/decompose.hpp"
#include "fgsim/gaussian.hpp"
#include "fgsim/norms.hpp"
#include "fgsim/sampler.hpp"
#include "fgsim/sparsify.hpp"
#include "fgsim/types.hpp"

namespace fgsim {
namespace {

using nlohmann::ordered_json;

void emit(const ordered_json& doc) {
  std::cout << dump_canonical_json(doc) << "\n";
}

int emit_error(const std::string& type, const std::string& message,
               int code) {
  ordered_json doc;
  doc["error"]["type"] = type;
  doc["error"]["message"] = message;
  emit(doc);
  return code;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read circuit file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ordered_json complex_json(const Complex& c) {
  return ordered_json::array({c.real(), c.imag()});
}

ordered_json circuit_json(const GaussianCircuit& c) {
  ordered_json out;
  out["phase"] = complex_json(c.phase);
  ordered_json gates = ordered_json::array();
  for (const GaussianGenerator& g : c.gates) {
    ordered_json gate;
    switch (g.kind) {
      case GaussianGenerator::Kind::TwoMajoranaRotation:
        gate["rotation"] = ordered_json::array({g.j, g.k});
        gate["theta"] = g.theta;
        break;
      case GaussianGenerator::Kind::SingleMajorana:
        gate["majorana"] = g.j;
        break;
      case GaussianGenerator::Kind::NamedMatchgate: {
        gate["id"] = g.id;
        ordered_json targets = ordered_json::array();
        for (const int q : g.targets) targets.push_back(q);
        gate["targets"] = std::move(targets);
        if (!g.params.empty()) {
          ordered_json params = ordered_json::array();
          for (const double p : g.params) params.push_back(p);
          gate["params"] = std::move(params);
        }
        break;
      }
    }
    gates.push_back(std::move(gate));
  }
  out["gates"] = std::move(gates);
  return out;
}

// --- vocabulary tables (file spellings) ---

bool cli_gate_is_gaussian(const std::string& id) {
  return id == "rz" || id == "x" || id == "y" || id == "z" ||
         id == "rxx_nn" || id == "ryy_nn" || id == "rxy_nn" || id == "fswap";
}

bool cli_gate_is_magic(const std::string& id) {
  return id == "rx" || id == "ry" || id == "h" || id == "rzz" ||
         id == "cphase" || id == "swap";
}

bool cli_gate_takes_theta(const std::string& id) {
  return id == "rz" || id == "rx" || id == "ry" || id == "rxx_nn" ||
         id == "ryy_nn" || id == "rxy_nn" || id == "rzz" || id == "cphase";
}

int cli_gate_arity(const std::string& id) {
  if (id == "rz" || id == "rx" || id == "ry" || id == "h" || id == "x" ||
      id == "y" || id == "z") {
    return 1;
  }
  return 2;
}

std::string cli_catalog_id(const std::string& id) {
  if (id == "h") return "hadamard";
  if (id == "swap") return "swap_nn";
  return id;
}

std::string cli_file_id(const std::string& id) {
  if (id == "hadamard") return "h";
  if (id == "swap_nn") return "swap";
  return id;
}

// Gaussian gates and decomposed gates as one list of unitary decompositions;
// rejects channels and measurements.
std::vector<UnitaryDecomposition> unitary_only_decompositions(
    const CircuitProgram& program, const char* command) {
  std::vector<UnitaryDecomposition> decomps;
  for (const ProgramElement& el : program.elements) {
    switch (el.kind) {
      case ProgramElement::Kind::Gaussian: {
        GaussianCircuit c;
        c.n = program.n;
        c.gates = {el.gate};
        UnitaryDecomposition d;
        d.n = program.n;
        d.terms = {{Complex(1.0, 0.0), std::move(c)}};
        d.l1_norm = 1.0;
        d.extent_claim = 1.0;
        d.optimal = true;
        decomps.push_back(std::move(d));
        break;
      }
      case ProgramElement::Kind::NonGaussian:
        decomps.push_back(decompose_gate_element(el, program.n));
        break;
      default:
        throw InvalidArgument(std::string(command) +
                              " expects a unitary-only circuit (no channels "
                              "or measurements)");
    }
  }
  return decomps;
}

// --- subcommands ---

int cmd_decompose(const std::string& gate, std::optional<double> theta) {
  const std::string id = cli_file_id(gate);
  if (id == "custom_u4") {
    throw InvalidArgument(
        "decompose does not take custom_u4; put the matrix in a circuit "
        "file");
  }
  if (!cli_gate_is_gaussian(id) && !cli_gate_is_magic(id)) {
    throw InvalidArgument("unknown gate id '" + gate + "'");
  }
  if (cli_gate_takes_theta(id) && !theta) {
    throw InvalidArgument("gate '" + gate + "' requires --theta");
  }
  if (!cli_gate_takes_theta(id) && theta) {
    throw InvalidArgument("gate '" + gate + "' takes no --theta");
  }

  const int n = cli_gate_arity(id);
  std::vector<int> targets(static_cast<std::size_t>(n));
  for (int q = 0; q < n; ++q) targets[static_cast<std::size_t>(q)] = q;

  UnitaryDecomposition d;
  if (cli_gate_is_gaussian(id)) {
    GaussianCircuit c;
    c.n = n;
    std::vector<double> params;
    if (theta) params.push_back(*theta);
    c.gates = {GaussianGenerator::named(id, targets, params)};
    d.n = n;
    d.terms = {{Complex(1.0, 0.0), std::move(c)}};
    d.l1_norm = 1.0;
    d.extent_claim = 1.0;
    d.optimal = true;
  } else {
    d = optimal_unitary_decomposition(cli_catalog_id(id), theta, targets, n);
  }

  ordered_json doc;
  doc["command"] = "decompose";
  doc["gate"] = id;
  if (theta) doc["theta"] = *theta;
  doc["n"] = d.n;
  doc["l1_norm"] = d.l1_norm;
  doc["extent"] = d.extent_claim ? *d.extent_claim : d.l1_norm * d.l1_norm;
  doc["optimal"] = d.optimal;
  ordered_json terms = ordered_json::array();
  for (const DecompositionTerm& term : d.terms) {
    ordered_json t;
    t["coeff"] = complex_json(term.coeff);
    t["word"] = circuit_json(term.circuit);
    terms.push_back(std::move(t));
  }
  doc["terms"] = std::move(terms);
  emit(doc);
  return 0;
}

int cmd_extent(const std::string& path) {
  const CircuitProgram program = parse_circuit_file(read_file(path));
  ordered_json doc;
  doc["command"] = "extent";
  doc["n"] = program.n;
  ordered_json elements = ordered_json::array();
  double product = 1.0;
  for (std::size_t i = 0; i < program.elements.size(); ++i) {
    const ProgramElement& el = program.elements[i];
    ordered_json entry;
    entry["index"] = static_cast<std::int64_t>(i);
    double cost = 1.0;
    switch (el.kind) {
      case ProgramElement::Kind::Gaussian:
        entry["type"] = "gate";
        entry["id"] = el.gate.id;
        break;
      case ProgramElement::Kind::NonGaussian: {
        entry["type"] = "gate";
        entry["id"] = cli_file_id(el.id);
        const UnitaryDecomposition d = decompose_gate_element(el, program.n);
        cost = d.l1_norm * d.l1_norm;
        break;
      }
      case ProgramElement::Kind::Noisy:
      case ProgramElement::Kind::Adaptive:
        entry["type"] = "channel";
        entry["id"] = el.channel.kind;
        cost = resolve_channel(el.channel, program.n).cost;
        break;
      case ProgramElement::Kind::Measure:
        entry["type"] = "measure";
        break;
    }
    entry["cost"] = cost;
    product *= cost;
    elements.push_back(std::move(entry));
  }
  doc["elements"] = std::move(elements);
  doc["product_cost"] = product;
  emit(doc);
  return 0;
}

std::vector<int> parse_qubit_range(const std::string& spec) {
  const auto parse_int = [&](const std::string& s) {
    try {
      std::size_t pos = 0;
      const int v = std::stoi(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw InvalidArgument("--qubits expects a..b, got '" + spec + "'");
    }
  };
  const std::size_t dots = spec.find("..");
  if (dots == std::string::npos) return {parse_int(spec)};
  const int a = parse_int(spec.substr(0, dots));
  const int b = parse_int(spec.substr(dots + 2));
  if (a > b) throw InvalidArgument("--qubits range must be ascending");
  std::vector<int> qubits;
  for (int q = a; q <= b; ++q) qubits.push_back(q);
  return qubits;
}

std::string bitstring_text(std::uint64_t bits, int w) {
  std::string s(static_cast<std::size_t>(w), '0');
  for (int i = 0; i < w; ++i) {
    if ((bits >> i) & 1) s[static_cast<std::size_t>(i)] = '1';
  }
  return s;
}

int cmd_sample(const std::string& path, const std::string& mode, int shots,
               double delta, double eps, double p_fail, std::uint64_t seed,
               const std::string& qubits) {
  CircuitProgram program = parse_circuit_file(read_file(path));
  const bool has_measure =
      !program.elements.empty() &&
      program.elements.back().kind == ProgramElement::Kind::Measure;
  if (!qubits.empty()) {
    if (has_measure) {
      throw InvalidArgument(
          "--qubits conflicts with the circuit file's measure element");
    }
    program.elements.push_back(ProgramElement::measure(parse_qubit_range(qubits)));
  }
  const bool measured_fixed =
      !program.elements.empty() &&
      program.elements.back().kind == ProgramElement::Kind::Measure;
  const int w = measured_fixed
                    ? static_cast<int>(program.elements.back().measured.size())
                    : program.n;

  std::vector<SampleReport> reports;
  reports.reserve(static_cast<std::size_t>(shots));
  const auto t0 = std::chrono::steady_clock::now();
  for (int s = 0; s < shots; ++s) {
    const std::uint64_t shot_seed = seed + static_cast<std::uint64_t>(s);
    if (mode == "exact") {
      reports.push_back(sample_exact(program, w, shot_seed));
    } else if (mode == "approx") {
      reports.push_back(
          sample_approx(program, w, delta, eps, p_fail, shot_seed));
    } else {
      reports.push_back(
          sample_adaptive(program, w, delta, eps, p_fail, shot_seed));
    }
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  std::map<std::string, std::int64_t> counts;
  std::int64_t k_max = 0;
  double cost_sum = 0.0;
  for (const SampleReport& r : reports) {
    ++counts[bitstring_text(r.bitstring, w)];
    k_max = std::max(k_max, r.k_used);
    cost_sum += r.cost;
  }

  ordered_json doc;
  doc["command"] = "sample";
  doc["mode"] = mode;
  doc["n"] = program.n;
  doc["w"] = w;
  doc["shots"] = shots;
  doc["seed"] = seed;
  if (mode != "exact") {
    doc["delta"] = delta;
    doc["eps"] = eps;
    doc["p_fail"] = p_fail;
  }
  {
    ordered_json measured = ordered_json::array();
    for (const int q : reports.front().measured_qubits) measured.push_back(q);
    doc["measured_qubits"] = std::move(measured);
  }
  doc["k"] = k_max;
  doc["mean_cost"] = cost_sum / static_cast<double>(shots);
  {
    ordered_json c;
    for (const auto& [bits, count] : counts) c[bits] = count;
    doc["counts"] = std::move(c);
  }
  // Per-shot detail is capped so huge runs stay storable; the cap is fixed,
  // keeping the document deterministic for a given argv.
  const int detail = std::min(shots, 1000);
  ordered_json rows = ordered_json::array();
  for (int s = 0; s < detail; ++s) {
    const SampleReport& r = reports[static_cast<std::size_t>(s)];
    ordered_json row;
    row["shot"] = s;
    row["seed"] = r.seed;
    row["bitstring"] = bitstring_text(r.bitstring, w);
    row["k"] = r.k_used;
    row["cost"] = r.cost;
    ordered_json probs = ordered_json::array();
    for (const double p : r.bit_probabilities) probs.push_back(p);
    row["bit_probabilities"] = std::move(probs);
    if (!r.adaptive_probabilities.empty()) {
      ordered_json ap = ordered_json::array();
      for (const double p : r.adaptive_probabilities) ap.push_back(p);
      row["adaptive_probabilities"] = std::move(ap);
    }
    rows.push_back(std::move(row));
  }
  doc["shots_detail"] = std::move(rows);
  doc["elapsed_seconds"] = elapsed;
  emit(doc);
  return 0;
}

int cmd_norm(const std::string& path, const std::string& mode, double eps,
             double p_fail, double floor, std::uint64_t seed,
             std::int64_t budget) {
  const CircuitProgram program = parse_circuit_file(read_file(path));
  const std::vector<UnitaryDecomposition> decomps =
      unitary_only_decompositions(program, "norm");
  const SparseSuperposition sup =
      evolve_circuit(decomps, prepare_basis_state(program.n, 0), budget);

  ordered_json doc;
  doc["command"] = "norm";
  doc["mode"] = mode;
  doc["n"] = program.n;
  doc["rank"] = static_cast<std::int64_t>(sup.terms.size());
  if (mode == "exact") {
    doc["norm_sq"] = exact_norm(sup);
  } else {
    const NormEstimate est = fast_norm(sup, eps, p_fail, seed, floor);
    doc["norm_sq"] = est.value;
    doc["epsilon"] = est.epsilon;
    doc["p_fail"] = est.p_fail;
    doc["norm_floor"] = floor;
    doc["seed"] = seed;
    doc["samples_used"] = est.samples_used;
    doc["multiplicative"] = est.multiplicative;
  }
  emit(doc);
  return 0;
}

int cmd_sparsify_report(const std::string& path, int k, int trials,
                        std::uint64_t seed) {
  const CircuitProgram program = parse_circuit_file(read_file(path));
  const std::vector<UnitaryDecomposition> decomps =
      unitary_only_decompositions(program, "sparsify-report");
  double e_cost = 1.0;
  for (const UnitaryDecomposition& d : decomps) {
    e_cost *= d.l1_norm * d.l1_norm;
  }

  const PhasedGaussianState start = prepare_basis_state(program.n, 0);
  std::vector<double> traces;
  traces.reserve(static_cast<std::size_t>(trials));
  for (int m = 0; m < trials; ++m) {
    const SparsifiedCircuitSet set =
        sparsify_circuit(decomps, k, seed + static_cast<std::uint64_t>(m));
    SparseSuperposition sup;
    sup.n = program.n;
    sup.k = k;
    sup.terms.reserve(set.circuits.size());
    for (const GaussianCircuit& c : set.circuits) {
      sup.terms.push_back(
          {Complex(set.scale, 0.0), evolve_circuit_state(start, c)});
    }
    traces.push_back(exact_norm(sup));
  }

  double mean = 0.0;
  for (const double t : traces) mean += t;
  mean /= static_cast<double>(trials);
  double var = 0.0;
  double lo = traces.front(), hi = traces.front();
  for (const double t : traces) {
    var += (t - mean) * (t - mean);
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  var = trials > 1 ? var / static_cast<double>(trials - 1) : 0.0;

  ordered_json doc;
  doc["command"] = "sparsify-report";
  doc["n"] = program.n;
  doc["k"] = k;
  doc["trials"] = trials;
  doc["seed"] = seed;
  doc["l1_sq"] = e_cost;
  doc["mean_trace"] = mean;
  doc["predicted_mean_trace"] = 1.0 + (e_cost - 1.0) / static_cast<double>(k);
  doc["sample_variance"] = var;
  doc["min_trace"] = lo;
  doc["max_trace"] = hi;
  emit(doc);
  return 0;
}

int run_command(int argc, char** argv) {
  if (const char* env = std::getenv("FGSIM_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) Eigen::setNbThreads(t);
  }

  CLI::App app{
      "fgsim: classical simulator for matchgate circuits with magic gates "
      "and noisy channels"};
  app.require_subcommand(1);

  std::string dec_gate;
  double dec_theta = 0.0;
  auto* dec = app.add_subcommand(
      "decompose", "closed-form free-word decomposition of a catalog gate");
  dec->add_option("--gate", dec_gate, "gate id")->required();
  auto* dec_theta_opt =
      dec->add_option("--theta", dec_theta, "rotation angle in radians");

  std::string ext_path;
  auto* ext = app.add_subcommand(
      "extent", "per-element decomposition cost and product");
  ext->add_option("--circuit", ext_path, "circuit file")->required();

  std::string smp_path, smp_mode = "exact", smp_qubits;
  int smp_shots = 1;
  double smp_delta = 0.1, smp_eps = 0.2, smp_pfail = 0.05;
  std::uint64_t smp_seed = 1;
  auto* smp = app.add_subcommand("sample", "draw measurement samples");
  smp->add_option("--circuit", smp_path, "circuit file")->required();
  smp->add_option("--shots", smp_shots, "number of samples")
      ->check(CLI::PositiveNumber);
  smp->add_option("--mode", smp_mode, "exact | approx | adaptive")
      ->check(CLI::IsMember({"exact", "approx", "adaptive"}));
  smp->add_option("--delta", smp_delta, "sparsification 1-norm budget");
  smp->add_option("--eps", smp_eps, "norm-estimate relative error");
  smp->add_option("--pfail", smp_pfail, "norm-estimate failure probability");
  smp->add_option("--seed", smp_seed, "base seed; shot s uses seed + s");
  smp->add_option("--qubits", smp_qubits, "measured qubits as a..b");

  std::string nrm_path, nrm_mode = "exact";
  double nrm_eps = 0.05, nrm_pfail = 0.01, nrm_floor = 0.1;
  std::uint64_t nrm_seed = 1;
  std::int64_t nrm_budget = std::int64_t(1) << 16;
  auto* nrm = app.add_subcommand(
      "norm", "squared norm of the expanded gate-decomposition superposition");
  nrm->add_option("--circuit", nrm_path, "circuit file")->required();
  nrm->add_option("--mode", nrm_mode, "exact | fast")
      ->check(CLI::IsMember({"exact", "fast"}));
  nrm->add_option("--eps", nrm_eps, "fast-mode relative error");
  nrm->add_option("--pfail", nrm_pfail, "fast-mode failure probability");
  nrm->add_option("--floor", nrm_floor, "fast-mode norm floor");
  nrm->add_option("--seed", nrm_seed, "fast-mode seed");
  nrm->add_option("--budget", nrm_budget, "term budget for the expansion");

  std::string spr_path;
  int spr_k = 0, spr_trials = 100;
  std::uint64_t spr_seed = 1;
  auto* spr = app.add_subcommand(
      "sparsify-report", "empirical trace statistics of sparsified circuits");
  spr->add_option("--circuit", spr_path, "circuit file")->required();
  spr->add_option("--k", spr_k, "samples per sparsification")
      ->required()
      ->check(CLI::PositiveNumber);
  spr->add_option("--trials", spr_trials, "independent sparsifications")
      ->check(CLI::PositiveNumber);
  spr->add_option("--seed", spr_seed, "base seed; trial m uses seed + m");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return emit_error("usage", e.what(), 2);
  }

  try {
    if (dec->parsed()) {
      return cmd_decompose(dec_gate, dec_theta_opt->count()
                                         ? std::optional<double>(dec_theta)
                                         : std::nullopt);
    }
    if (ext->parsed()) return cmd_extent(ext_path);
    if (smp->parsed()) {
      return cmd_sample(smp_path, smp_mode, smp_shots, smp_delta, smp_eps,
                        smp_pfail, smp_seed, smp_qubits);
    }
    if (nrm->parsed()) {
      return cmd_norm(nrm_path, nrm_mode, nrm_eps, nrm_pfail, nrm_floor,
                      nrm_seed, nrm_budget);
    }
    if (spr->parsed()) {
      return cmd_sparsify_report(spr_path, spr_k, spr_trials, spr_seed);
    }
    return emit_error("usage", "no subcommand given", 2);
  } catch (const ResourceLimit& e) {
    return emit_error("resource-limit", e.what(), 3);
  } catch (const InvalidArgument& e) {
    return emit_error("validation", e.what(), 2);
  } catch (const InvalidState& e) {
    return emit_error("validation", e.what(), 2);
  } catch (const std::exception& e) {
    return emit_error("internal", e.what(), 2);
  }
}

}  // namespace
}  // namespace fgsim

int main(int argc, char** argv) { return fgsim::run_command(argc, argv); }
