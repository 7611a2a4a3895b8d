#pragma once

#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <set>

#include "mpc/circuit.hpp"
#include "mpc/trace.hpp"

namespace mpc::sched {

using circuit::CircuitGraph;
using circuit::NodeId;
using circuit::NodeKind;

inline constexpr uint64_t kEpochFinished = ~0ull;

struct SecretControlFlow : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DoubleCompletion : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownPredecessor : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IssuedNode {
    NodeId id = circuit::kNoNode;
    NodeKind kind = NodeKind::Const;
    std::vector<NodeId> operands;
};

// Two-queue non-blocking scheduler with loop-epoch back-edge gating. One
// instance drives one run; next_ready_node / mark_complete may be called
// concurrently from worker contexts. Node execution happens outside the
// scheduler's lock.
class Scheduler {
public:
    // Reads the completed public scalar value of a node (branch conditions).
    using PublicReader = std::function<uint32_t(NodeId)>;
    // Invoked when a phi resolves: the runtime copies the chosen operand's
    // value onto the phi before the phi is marked complete.
    using PhiResolver = std::function<void(NodeId phi, NodeId chosen)>;

    Scheduler(const CircuitGraph& g, PublicReader read_public, PhiResolver resolve_phi,
              trace::Trace* trace = nullptr);

    // Marks Inputs/Consts available and enters the entry block.
    void start();

    // Returns a ready compute node (heavy preferred), processing takeable
    // branches along the way, or nullopt when no compute work is available.
    std::optional<IssuedNode> next_ready_node(int worker);

    void mark_complete(NodeId id, int worker);

    bool finished() const;
    // No compute ready, none in flight would help: used by the runtime to
    // decide between spinning and waiting for network completions.
    bool queues_empty() const;

    uint64_t loop_epoch(NodeId header) const;

private:
    struct NodeState {
        int remaining = 0;       // unmet dependency count
        int base_unlock = 0;
        std::vector<bool> op_sat;
        bool completed = false;
        bool in_queue = false;
        bool issued = false;
    };

    bool is_queueable(const circuit::Node& n) const;
    void enqueue_locked(NodeId id);
    void reset_node_locked(NodeId id);
    void enter_block_locked(NodeId label, int worker);
    void rearm_loop_locked(NodeId header);
    bool try_branch_once_locked(NodeId id, int worker);
    bool is_loop_epoch_complete_locked(NodeId header, NodeId branch, uint64_t epoch) const;
    void complete_locked(NodeId id, int worker);
    NodeId phi_chosen_locked(NodeId phi) const;
    void unpark_locked();
    // innermost loop whose members contain the branch's block
    NodeId loop_header_for_branch_locked(NodeId id) const;

    const CircuitGraph& g_;
    PublicReader read_public_;
    PhiResolver resolve_phi_;
    trace::Trace* trace_;

    mutable std::mutex mu_;
    std::deque<NodeId> heavy_, light_;
    std::vector<NodeId> parked_;
    std::vector<NodeState> state_;
    std::vector<bool> entered_;
    std::map<NodeId, NodeId> pred_label_;
    std::map<NodeId, uint64_t> loop_epoch_;
    std::map<std::pair<NodeId, NodeId>, uint64_t> last_done_;
    // consumer edges: producer -> (consumer, operand index)
    std::vector<std::vector<std::pair<NodeId, int>>> consumers_;
    // phis waiting for their chosen operand to complete
    std::vector<std::vector<NodeId>> phi_waiters_;
    std::vector<NodeId> phi_choice_;  // phi -> chosen operand (kNoNode if unset)
    bool finished_ = false;
};

} // namespace mpc::sched
