#pragma once

#include <string>
#include <vector>

#include "mpc/circuit.hpp"

namespace mpc::circuit {

struct VersionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CorruptPayload : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Versioned little-endian container, magic "MPCG".
std::vector<uint8_t> serialize_circuit(const CircuitGraph& g);
CircuitGraph deserialize_circuit(const std::vector<uint8_t>& bytes);

void write_circuit_file(const CircuitGraph& g, const std::string& path);
CircuitGraph read_circuit_file(const std::string& path);

// Human-readable mirror for inspection (--emit-json).
std::string circuit_to_json(const CircuitGraph& g);

} // namespace mpc::circuit
