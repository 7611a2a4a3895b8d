#include "mpc/trace.hpp"

#include <chrono>

namespace mpc::trace {

const char* event_name(Event e) {
    switch (e) {
        case Event::Issue: return "issue";
        case Event::Complete: return "complete";
        case Event::BranchTaken: return "branch-taken";
        case Event::BranchStalled: return "branch-stalled";
        case Event::BlockEnter: return "block-enter";
        case Event::EpochAdvance: return "epoch-advance";
    }
    return "?";
}

void Trace::record(int worker, Event e, circuit::NodeId node, uint64_t epoch) {
    auto now = std::chrono::duration_cast<std::chrono::nanoseconds>(
                   std::chrono::steady_clock::now().time_since_epoch())
                   .count();
    std::lock_guard lk(mu_);
    events_.push_back({uint64_t(now), worker, e, node, epoch});
}

std::vector<TraceEvent> Trace::snapshot() const {
    std::lock_guard lk(mu_);
    return events_;
}

void Trace::dump(std::ostream& os) const {
    std::lock_guard lk(mu_);
    for (auto& ev : events_)
        os << ev.ts_ns << ' ' << ev.worker << ' ' << event_name(ev.event) << ' ' << ev.node << ' '
           << ev.epoch << '\n';
}

std::vector<std::string> validate_trace(const circuit::CircuitGraph& g,
                                        const std::vector<TraceEvent>& events) {
    using circuit::NodeId;
    using circuit::NodeKind;
    std::vector<std::string> out;
    std::vector<bool> completed(g.nodes.size(), false);
    std::vector<bool> entered(g.nodes.size(), false);
    std::map<NodeId, uint64_t> epoch_seen;

    for (auto& n : g.nodes)
        if (n.kind == NodeKind::Input || n.kind == NodeKind::Const) completed[n.id] = true;

    auto note = [&](const TraceEvent& ev, const std::string& msg) {
        out.push_back("node " + std::to_string(ev.node) + ": " + msg);
    };

    for (auto& ev : events) {
        switch (ev.event) {
            case Event::BlockEnter:
                entered[ev.node] = true;
                break;
            case Event::EpochAdvance: {
                uint64_t prev = epoch_seen.count(ev.node) ? epoch_seen[ev.node] : 0;
                // epoch 1 is also legal after a finished activation: an inner
                // loop restarts from scratch on each outer iteration
                if (ev.epoch != prev + 1 && ev.epoch != 1)
                    note(ev, "epoch jumped from " + std::to_string(prev) + " to " +
                                 std::to_string(ev.epoch));
                epoch_seen[ev.node] = ev.epoch;
                // re-arm the loop region for the new iteration
                auto it = g.loops.find(ev.node);
                if (it != g.loops.end()) {
                    for (NodeId b : it->second.members) {
                        if (b != ev.node) entered[b] = false;
                        for (NodeId u = g.node(b).next; u != circuit::kNoNode; u = g.node(u).next)
                            completed[u] = false;
                    }
                }
                break;
            }
            case Event::Issue: {
                const auto& n = g.node(ev.node);
                for (NodeId op : n.operands)
                    if (!completed[op])
                        note(ev, "issued before operand " + std::to_string(op) + " completed");
                if (n.block != circuit::kNoNode && !entered[n.block])
                    note(ev, "issued in block " + std::to_string(n.block) + " before entry");
                break;
            }
            case Event::Complete:
                completed[ev.node] = true;
                break;
            case Event::BranchTaken:
            case Event::BranchStalled:
                break;
        }
    }
    return out;
}

} // namespace mpc::trace
