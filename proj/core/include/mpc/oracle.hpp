#pragma once

#include <map>
#include <string>
#include <vector>

#include "mpc/circuit.hpp"

namespace mpc::oracle {

using Inputs = std::map<std::string, std::vector<uint32_t>>;

struct NonTerminating : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sequential cleartext walk of the lowered circuit over F_p; the ground
// truth for every protocol/scheduler equivalence test.
std::vector<uint32_t> interpret(const circuit::CircuitGraph& g, const Inputs& inputs,
                                uint64_t step_cap = 1ull << 24);

// Reference interpreter over the raw (pre-lowering) IR, used to check
// lowering soundness independently of the graph pipeline.
std::vector<uint32_t> interpret_ir(const ir::EntryView& entry, const Inputs& inputs,
                                   uint64_t step_cap = 1ull << 24);

} // namespace mpc::oracle
