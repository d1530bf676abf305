#include "fgsim/circuit_io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fgsim/channels.hpp"
#include "fgsim/dense.hpp"

namespace fgsim {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// --- vocabulary tables ---

bool is_gaussian_gate(const std::string& id) {
  return id == "rz" || id == "x" || id == "y" || id == "z" ||
         id == "rxx_nn" || id == "ryy_nn" || id == "rxy_nn" || id == "fswap";
}

bool is_magic_gate(const std::string& id) {
  return id == "rx" || id == "ry" || id == "h" || id == "rzz" ||
         id == "cphase" || id == "swap";
}

bool gate_takes_theta(const std::string& id) {
  return id == "rz" || id == "rx" || id == "ry" || id == "rxx_nn" ||
         id == "ryy_nn" || id == "rxy_nn" || id == "rzz" || id == "cphase";
}

bool gate_needs_adjacent_targets(const std::string& id) {
  return id == "rxx_nn" || id == "ryy_nn" || id == "rxy_nn" || id == "fswap";
}

int file_gate_arity(const std::string& id) {
  if (id == "rz" || id == "rx" || id == "ry" || id == "h" || id == "x" ||
      id == "y" || id == "z") {
    return 1;
  }
  return 2;
}

// File spelling -> decomposition-catalog id.
std::string catalog_gate_id(const std::string& id) {
  if (id == "h") return "hadamard";
  if (id == "swap") return "swap_nn";
  return id;
}

// Decomposition-catalog id -> file spelling.
std::string file_gate_id(const std::string& id) {
  if (id == "hadamard") return "h";
  if (id == "swap_nn") return "swap";
  return id;
}

// --- parse helpers ---

[[noreturn]] void element_error(std::size_t index, const std::string& what) {
  throw InvalidArgument("element " + std::to_string(index) + ": " + what);
}

void check_keys(const json& obj, const std::set<std::string>& required,
                const std::set<std::string>& optional, std::size_t index) {
  for (const auto& item : obj.items()) {
    if (!required.count(item.key()) && !optional.count(item.key())) {
      element_error(index, "unknown key '" + item.key() + "'");
    }
  }
  for (const std::string& key : required) {
    if (!obj.contains(key)) element_error(index, "missing key '" + key + "'");
  }
}

double require_number(const json& obj, const char* key, std::size_t index) {
  const json& v = obj.at(key);
  if (!v.is_number()) {
    element_error(index, std::string("'") + key + "' must be a number");
  }
  return v.get<double>();
}

std::vector<int> parse_targets(const json& obj, std::size_t index, int n,
                               int arity) {
  const json& v = obj.at("targets");
  if (!v.is_array()) element_error(index, "'targets' must be an array");
  std::vector<int> targets;
  for (const json& t : v) {
    if (!t.is_number_integer()) {
      element_error(index, "targets must be integers");
    }
    targets.push_back(t.get<int>());
  }
  if (arity > 0 && static_cast<int>(targets.size()) != arity) {
    element_error(index, "expected " + std::to_string(arity) +
                             " target(s), got " +
                             std::to_string(targets.size()));
  }
  std::set<int> seen;
  for (const int q : targets) {
    if (q < 0 || q >= n) {
      element_error(index,
                    "target " + std::to_string(q) + " out of range for n = " +
                        std::to_string(n));
    }
    if (!seen.insert(q).second) {
      element_error(index, "duplicate target " + std::to_string(q));
    }
  }
  return targets;
}

ProgramElement parse_gate(const json& obj, std::size_t index, int n) {
  check_keys(obj, {"type", "id", "targets"}, {"theta", "matrix"}, index);
  const std::string id = obj.at("id").is_string()
                             ? obj.at("id").get<std::string>()
                             : throw InvalidArgument(
                                   "element " + std::to_string(index) +
                                   ": 'id' must be a string");

  if (id == "custom_u4") {
    if (obj.contains("theta")) {
      element_error(index, "custom_u4 takes a 'matrix', not 'theta'");
    }
    if (!obj.contains("matrix")) element_error(index, "missing key 'matrix'");
    const json& m = obj.at("matrix");
    if (!m.is_array() || m.size() != 16) {
      element_error(index, "'matrix' must list 16 [re, im] pairs");
    }
    std::vector<double> params;
    params.reserve(32);
    for (const json& entry : m) {
      if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
          !entry[1].is_number()) {
        element_error(index, "'matrix' must list 16 [re, im] pairs");
      }
      params.push_back(entry[0].get<double>());
      params.push_back(entry[1].get<double>());
    }
    std::vector<int> targets = parse_targets(obj, index, n, 2);
    if (targets[0] >= targets[1]) {
      element_error(index, "two-qubit targets must be ascending");
    }
    return ProgramElement::custom_u4(std::move(params), std::move(targets));
  }

  if (!is_gaussian_gate(id) && !is_magic_gate(id)) {
    element_error(index, "unknown gate id '" + id + "'");
  }
  if (obj.contains("matrix")) {
    element_error(index, "'matrix' is only valid for custom_u4");
  }
  std::optional<double> theta;
  if (gate_takes_theta(id)) {
    if (!obj.contains("theta")) element_error(index, "missing key 'theta'");
    theta = require_number(obj, "theta", index);
  } else if (obj.contains("theta")) {
    element_error(index, "gate '" + id + "' takes no 'theta'");
  }

  const int arity = file_gate_arity(id);
  std::vector<int> targets = parse_targets(obj, index, n, arity);
  if (arity == 2) {
    if (targets[0] >= targets[1]) {
      element_error(index, "two-qubit targets must be ascending");
    }
    if (gate_needs_adjacent_targets(id) && targets[1] != targets[0] + 1) {
      element_error(index,
                    "gate '" + id + "' requires adjacent targets");
    }
  }

  if (is_gaussian_gate(id)) {
    std::vector<double> params;
    if (theta) params.push_back(*theta);
    return ProgramElement::gaussian(
        GaussianGenerator::named(id, std::move(targets), std::move(params)));
  }
  return ProgramElement::non_gaussian(catalog_gate_id(id), theta,
                                      std::move(targets));
}

ProgramElement parse_channel(const json& obj, std::size_t index, int n) {
  const std::string id = obj.at("id").is_string()
                             ? obj.at("id").get<std::string>()
                             : throw InvalidArgument(
                                   "element " + std::to_string(index) +
                                   ": 'id' must be a string");
  ChannelDescriptor desc;
  desc.kind = id;
  if (id == "noisy_rot") {
    check_keys(obj, {"type", "id", "axis", "theta", "p", "targets"}, {},
               index);
    if (!obj.at("axis").is_string()) {
      element_error(index, "'axis' must be a string");
    }
    desc.axis = obj.at("axis").get<std::string>();
  } else if (id == "noisy_rzz") {
    check_keys(obj, {"type", "id", "noise", "theta", "p", "targets"},
               {"adaptive"}, index);
    if (!obj.at("noise").is_string()) {
      element_error(index, "'noise' must be a string");
    }
    desc.noise = obj.at("noise").get<std::string>();
    if (obj.contains("adaptive")) {
      if (!obj.at("adaptive").is_boolean()) {
        element_error(index, "'adaptive' must be a boolean");
      }
      desc.adaptive = obj.at("adaptive").get<bool>();
    }
  } else {
    element_error(index, "unknown channel id '" + id + "'");
  }
  desc.theta = require_number(obj, "theta", index);
  desc.p = require_number(obj, "p", index);
  desc.targets = parse_targets(obj, index, n, /*arity=*/0);

  // Resolve once so malformed parameters surface here with the element
  // index, not later inside a sampling run.
  try {
    (void)resolve_channel(desc, n);
  } catch (const InvalidArgument& err) {
    element_error(index, err.what());
  }
  return desc.adaptive ? ProgramElement::adaptive_channel(std::move(desc))
                       : ProgramElement::noisy(std::move(desc));
}

ProgramElement parse_measure(const json& obj, std::size_t index, int n,
                             bool is_last) {
  check_keys(obj, {"type", "targets"}, {}, index);
  if (!is_last) {
    element_error(index, "'measure' must be the last element");
  }
  std::vector<int> targets = parse_targets(obj, index, n, /*arity=*/0);
  if (targets.empty()) {
    element_error(index, "'measure' needs at least one target");
  }
  return ProgramElement::measure(std::move(targets));
}

// --- serialize helpers ---

void write_json(std::ostringstream& os, const ordered_json& j) {
  switch (j.type()) {
    case json::value_t::object: {
      os << '{';
      bool first = true;
      for (const auto& item : j.items()) {
        if (!first) os << ',';
        first = false;
        os << json(item.key()).dump() << ':';
        write_json(os, item.value());
      }
      os << '}';
      return;
    }
    case json::value_t::array: {
      os << '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ',';
        write_json(os, j[i]);
      }
      os << ']';
      return;
    }
    case json::value_t::string:
      os << json(j.get<std::string>()).dump();
      return;
    case json::value_t::boolean:
      os << (j.get<bool>() ? "true" : "false");
      return;
    case json::value_t::number_integer:
      os << j.get<std::int64_t>();
      return;
    case json::value_t::number_unsigned:
      os << j.get<std::uint64_t>();
      return;
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        os << "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << buf;
      return;
    }
    default:
      os << "null";
      return;
  }
}

ordered_json targets_json(const std::vector<int>& targets) {
  ordered_json arr = ordered_json::array();
  for (const int q : targets) arr.push_back(q);
  return arr;
}

ordered_json serialize_element(const ProgramElement& el) {
  ordered_json obj;
  switch (el.kind) {
    case ProgramElement::Kind::Gaussian: {
      if (el.gate.kind != GaussianGenerator::Kind::NamedMatchgate) {
        throw InvalidArgument(
            "serialize_circuit_file: raw Majorana generators are not "
            "file-representable");
      }
      obj["type"] = "gate";
      obj["id"] = el.gate.id;
      if (!el.gate.params.empty()) obj["theta"] = el.gate.params[0];
      obj["targets"] = targets_json(el.gate.targets);
      return obj;
    }
    case ProgramElement::Kind::NonGaussian: {
      obj["type"] = "gate";
      obj["id"] = file_gate_id(el.id);
      if (el.id == "custom_u4") {
        ordered_json m = ordered_json::array();
        for (std::size_t i = 0; i + 1 < el.params.size(); i += 2) {
          m.push_back(ordered_json::array({el.params[i], el.params[i + 1]}));
        }
        obj["matrix"] = std::move(m);
      } else if (el.theta) {
        obj["theta"] = *el.theta;
      }
      obj["targets"] = targets_json(el.targets);
      return obj;
    }
    case ProgramElement::Kind::Noisy:
    case ProgramElement::Kind::Adaptive: {
      obj["type"] = "channel";
      obj["id"] = el.channel.kind;
      if (el.channel.kind == "noisy_rot") {
        obj["axis"] = el.channel.axis;
      } else {
        obj["noise"] = el.channel.noise;
      }
      obj["theta"] = el.channel.theta.value_or(0.0);
      obj["p"] = el.channel.p;
      if (el.channel.kind == "noisy_rzz") obj["adaptive"] = el.channel.adaptive;
      obj["targets"] = targets_json(el.channel.targets);
      return obj;
    }
    case ProgramElement::Kind::Measure:
      obj["type"] = "measure";
      obj["targets"] = targets_json(el.measured);
      return obj;
  }
  throw InvalidState("serialize_circuit_file: unreachable element kind");
}

}  // namespace

CircuitProgram parse_circuit_file(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw InvalidArgument(std::string("circuit file: ") + err.what());
  }
  if (!doc.is_object()) {
    throw InvalidArgument("circuit file: top level must be an object");
  }
  for (const auto& item : doc.items()) {
    if (item.key() != "schema_version" && item.key() != "n" &&
        item.key() != "elements" && item.key() != "metadata") {
      throw InvalidArgument("circuit file: unknown key '" + item.key() + "'");
    }
  }
  if (!doc.contains("schema_version") ||
      !doc["schema_version"].is_number_integer() ||
      doc["schema_version"].get<int>() != 1) {
    throw InvalidArgument("circuit file: schema_version must be 1");
  }
  if (!doc.contains("n") || !doc["n"].is_number_integer()) {
    throw InvalidArgument("circuit file: 'n' must be an integer");
  }
  const int n = doc["n"].get<int>();
  if (n < 1 || n > 64) {
    throw InvalidArgument("circuit file: n must lie in [1, 64]");
  }
  if (!doc.contains("elements") || !doc["elements"].is_array()) {
    throw InvalidArgument("circuit file: 'elements' must be an array");
  }
  if (doc.contains("metadata") && !doc["metadata"].is_object()) {
    throw InvalidArgument("circuit file: 'metadata' must be an object");
  }

  CircuitProgram program;
  program.n = n;
  const json& elements = doc["elements"];
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const json& el = elements[i];
    if (!el.is_object()) element_error(i, "element must be an object");
    if (!el.contains("type") || !el["type"].is_string()) {
      element_error(i, "'type' must be a string");
    }
    const std::string type = el["type"].get<std::string>();
    if (type == "gate") {
      if (!el.contains("id")) element_error(i, "missing key 'id'");
      program.elements.push_back(parse_gate(el, i, n));
    } else if (type == "channel") {
      if (!el.contains("id")) element_error(i, "missing key 'id'");
      program.elements.push_back(parse_channel(el, i, n));
    } else if (type == "measure") {
      program.elements.push_back(
          parse_measure(el, i, n, i + 1 == elements.size()));
    } else {
      element_error(i, "unknown element type '" + type + "'");
    }
  }
  return program;
}

std::string serialize_circuit_file(const CircuitProgram& program) {
  ordered_json doc;
  doc["schema_version"] = 1;
  doc["n"] = program.n;
  ordered_json elements = ordered_json::array();
  for (const ProgramElement& el : program.elements) {
    elements.push_back(serialize_element(el));
  }
  doc["elements"] = std::move(elements);
  return dump_canonical_json(doc);
}

std::string dump_canonical_json(const nlohmann::ordered_json& j) {
  std::ostringstream os;
  write_json(os, j);
  return os.str();
}

}  // namespace fgsim
