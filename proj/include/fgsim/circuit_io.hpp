#pragma once

// Circuit file format: a single JSON document
//
//   {
//     "schema_version": 1,
//     "n": <qubits>,
//     "metadata": { ... },            // optional, free-form, ignored
//     "elements": [
//       {"type": "gate", "id": <gate id>, "theta": <radians>,
//        "targets": [q...]},
//       {"type": "gate", "id": "custom_u4",
//        "matrix": [[re, im] x 16 row-major], "targets": [q, q+?]},
//       {"type": "channel", "id": "noisy_rot", "axis": "x"|"y"|"zz",
//        "theta": r, "p": prob, "targets": [...]},
//       {"type": "channel", "id": "noisy_rzz",
//        "noise": "zz"|"z1"|"z2"|"general", "theta": r, "p": prob,
//        "adaptive": bool, "targets": [...]},
//       {"type": "measure", "targets": [q...]}   // must be last
//     ]
//   }
//
// The gate vocabulary is closed: rz, rx, ry, h, x, y, z, rxx_nn, ryy_nn,
// rxy_nn, fswap, rzz, cphase, swap, custom_u4.  Angles are radians,
// probabilities decimals.  Parsing is strict: unknown keys, missing keys,
// and out-of-range targets are rejected with the offending element index.

#include <string>

#include <json.hpp>

#include "fgsim/sampler.hpp"
#include "fgsim/types.hpp"

namespace fgsim {

// Strict parse of the document above.  Malformed JSON raises InvalidArgument
// with the underlying line/column diagnostic; semantic violations raise
// InvalidArgument naming the element index.
CircuitProgram parse_circuit_file(const std::string& text);

// Inverse of parse_circuit_file on its image: emits the canonical document
// so that parse(serialize(parse(text))) == parse(text).  Programs containing
// constructs the file grammar cannot express (raw Majorana generators) are
// rejected.
std::string serialize_circuit_file(const CircuitProgram& program);

// Canonical compact JSON: insertion-ordered keys, floating-point numbers
// printed with 17 significant digits so every double round-trips exactly and
// identical documents are byte-identical.
std::string dump_canonical_json(const nlohmann::ordered_json& j);

}  // namespace fgsim
