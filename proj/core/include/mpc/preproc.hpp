#pragma once

#include <map>
#include <string>
#include <vector>

#include "mpc/circuit_io.hpp"
#include "mpc/linear.hpp"
#include "mpc/net.hpp"
#include "mpc/triple_store.hpp"

namespace mpc::preproc {

struct ShapeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InsufficientTriples : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Inputs = std::map<std::string, std::vector<uint32_t>>;

// Input file: magic "MPCI", version, param count, per-param {name, element
// count u64, flat u32 values}; a JSON sidecar (<path>.json) mirrors the
// shapes for inspection.
void write_input_file(const Inputs& inputs, const std::string& path);
Inputs read_input_file(const std::string& path);

// Static preprocessing demand of one full run of the circuit: scalar Beaver
// triples for multiply-like nodes and one matrix triple per planned tile.
// Loop bodies are counted `loop_iters` times per enclosing loop.
struct TripleDemand {
    size_t scalars = 0;
    size_t input_masks = 0;
    std::vector<std::pair<uint32_t, uint32_t>> matrix_shapes;  // (din, rows) per tile
};
TripleDemand compute_triple_demand(const circuit::CircuitGraph& g, size_t slice,
                                   size_t loop_iters = 1);

// Deterministic per-node triple regions. Every party derives the same layout
// from the graph, so a node execution consumes the same store offsets on all
// parties regardless of scheduling order. Enumeration matches the dealer's
// generation order (nodes by id, executions, tiles).
struct TripleLayout {
    struct Region {
        size_t base = 0;
        size_t stride = 0;     // triples (or tiles) per execution
        size_t max_execs = 1;  // provisioned executions (loop_iters per nesting level)
    };
    std::map<circuit::NodeId, Region> scalar;
    std::map<circuit::NodeId, Region> matrix;
    size_t scalar_total = 0, matrix_total = 0;
};
TripleLayout compute_triple_layout(const circuit::CircuitGraph& g, size_t slice,
                                   size_t loop_iters = 1);

struct RunBundle {
    circuit::CircuitGraph graph;
    std::shared_ptr<spdz::TripleStore> store;
    Inputs inputs;
};

// Loads and cross-validates the three artifacts. `slice` is needed to count
// matrix-triple demand against the store.
RunBundle load_run_bundle(const std::string& circuit_path, const std::string& triples_path,
                          const std::string& inputs_path, size_t slice);

// Mask-based SPDZ input sharing: party 0 owns all private inputs and opens
// x - mask; every party derives its share from the mask share plus the
// public difference. Public inputs pass through in clear. Returns shares
// keyed by parameter name (public params map to an empty ShareVec).
std::map<std::string, spdz::ShareVec> share_inputs(const circuit::CircuitGraph& g,
                                                   spdz::TripleStore& store,
                                                   const Inputs& inputs, net::Session& session,
                                                   uint64_t batch_base);
std::map<std::string, spdz::ShareVec> share_inputs(const RunBundle& bundle,
                                                   net::Session& session,
                                                   uint64_t batch_base);

} // namespace mpc::preproc
