#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpc/field.hpp"
#include "mpc/ir.hpp"

namespace mpc::circuit {

using NodeId = uint32_t;
inline constexpr NodeId kNoNode = 0xffffffffu;

enum class NodeKind : uint8_t {
    Input, Const, Adder, Multiplier, Subtract,
    AddBatch, MultBatch, SubBatch, ReduceAdd, ReduceMul,
    Load, LinearLayer, Phi, Branch, BlockLabel, Root,
    CmpPublic,
    // provisional kinds, eliminated by the lowering passes
    RawGep, RawShl, RawSelect, RawZext, RawAnd, RawOr, RawXor, RawCmp,
};

const char* kind_name(NodeKind k);

// True for kinds that execute and produce a runtime value.
bool is_compute_kind(NodeKind k);
// Multiplication-like, communication-heavy kinds (scheduler heavy queue).
bool is_heavy_kind(NodeKind k);

struct Node {
    NodeId id = kNoNode;
    NodeKind kind = NodeKind::Const;
    uint32_t lanes = 1;
    std::vector<NodeId> operands;
    NodeId block = kNoNode;  // owning BlockLabel; kNoNode for Input/Const
    bool is_private = false;
    NodeId next = kNoNode;   // intra-block chain successor
    bool is_bit = false;     // value known to be in {0,1} (i1 origin)

    std::vector<uint64_t> cvals;      // Const payload (lanes entries)
    ir::CmpPred pred{};               // RawCmp / CmpPublic
    std::vector<NodeId> phi_labels;   // Phi: incoming label per operand
    std::vector<NodeId> successors;   // Branch: successor BlockLabels
    uint32_t din = 0, dout = 0;       // LinearLayer
    std::string name;                 // Input param name / BlockLabel label
    bool removed = false;
};

struct LoopInfo {
    NodeId header = kNoNode;
    std::set<NodeId> members;   // BlockLabel ids, header included
    std::vector<NodeId> exits;  // BlockLabel ids outside members
};

struct InputDesc {
    std::string name;
    bool is_private = false;
    bool is_pointer = false;
    uint64_t count = 0;  // 0 = not statically known (runtime-indexed buffers)
    NodeId node = kNoNode;
};

struct GraphError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CircuitGraph {
    std::vector<Node> nodes;
    NodeId root = kNoNode;        // Root node (holds the ret operand)
    std::map<uint64_t, NodeId> const_pool;
    std::vector<InputDesc> inputs;
    std::vector<NodeId> labels;   // BlockLabel ids in block order
    std::map<NodeId, LoopInfo> loops;
    NodeId entry_label = kNoNode;

    Node& node(NodeId id) { return nodes.at(id); }
    const Node& node(NodeId id) const { return nodes.at(id); }

    NodeId add_node(Node n) {
        n.id = static_cast<NodeId>(nodes.size());
        nodes.push_back(std::move(n));
        return nodes.back().id;
    }

    // Constants are reduced mod p at intern time.
    NodeId intern_const(uint64_t v) {
        v %= kPrime;
        auto it = const_pool.find(v);
        if (it != const_pool.end()) return it->second;
        Node n;
        n.kind = NodeKind::Const;
        n.cvals = {v};
        n.is_bit = v <= 1;
        NodeId id = add_node(std::move(n));
        const_pool[v] = id;
        return id;
    }

    // Innermost loop whose members contain block `b`, or kNoNode.
    NodeId innermost_loop_of_block(NodeId b) const {
        NodeId best = kNoNode;
        size_t best_size = SIZE_MAX;
        for (auto& [h, li] : loops) {
            if (li.members.count(b) && li.members.size() < best_size) {
                best = h;
                best_size = li.members.size();
            }
        }
        return best;
    }

    std::vector<NodeId> loops_containing_block(NodeId b) const {
        std::vector<NodeId> out;
        for (auto& [h, li] : loops)
            if (li.members.count(b)) out.push_back(h);
        return out;
    }
};

// Compile pipeline over a validated entry view. Each pass corresponds to a
// distinct transformation and can be unit-tested in isolation via the
// lower-level entry points below; `compile_graph` runs them all and
// finalizes node ids deterministically.
CircuitGraph build_graph(const ir::EntryView& entry);
void normalize_loads(CircuitGraph& g);
void lower_idioms(CircuitGraph& g);
void collapse_linear_layer(CircuitGraph& g);
void tag_and_propagate_privacy(CircuitGraph& g);
void build_cfg_and_loops(CircuitGraph& g);
void finalize_graph(CircuitGraph& g);

CircuitGraph compile_graph(const ir::EntryView& entry);

// Structural equality, used by serialization round-trip checks.
bool graphs_equal(const CircuitGraph& a, const CircuitGraph& b);

} // namespace mpc::circuit
