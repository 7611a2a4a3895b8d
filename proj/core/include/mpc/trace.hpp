#pragma once

#include <cstdint>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include "mpc/circuit.hpp"

namespace mpc::trace {

enum class Event : uint8_t {
    Issue,
    Complete,
    BranchTaken,
    BranchStalled,
    BlockEnter,
    EpochAdvance,
};

const char* event_name(Event e);

struct TraceEvent {
    uint64_t ts_ns = 0;
    int worker = -1;
    Event event = Event::Issue;
    circuit::NodeId node = circuit::kNoNode;
    uint64_t epoch = 0;
};

// Thread-safe append-only event log.
class Trace {
public:
    void record(int worker, Event e, circuit::NodeId node, uint64_t epoch = 0);

    std::vector<TraceEvent> snapshot() const;
    // newline-delimited {timestamp-ns, worker, event, node, epoch}
    void dump(std::ostream& os) const;

private:
    mutable std::mutex mu_;
    std::vector<TraceEvent> events_;
};

// Replays a trace against the graph and returns human-readable violations
// of the scheduling safety rules: no issue before all operands completed,
// no issue before the owning block is entered, no issue in never-entered
// blocks, and per-header epoch sequences 1..k without gaps.
std::vector<std::string> validate_trace(const circuit::CircuitGraph& g,
                                        const std::vector<TraceEvent>& events);

} // namespace mpc::trace
