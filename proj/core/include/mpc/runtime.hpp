#pragma once

#include "mpc/backend.hpp"
#include "mpc/preproc.hpp"
#include "mpc/scheduler.hpp"
#include "mpc/trace.hpp"

namespace mpc::runtime {

struct RunOptions {
    int threads = 1;
    size_t slice = 262140;
    bool trace = false;
    // pending MAC-check log capacity warning threshold; the check itself is
    // executed once at run end (a mid-run check would need a cross-party
    // agreed cut of the log)
    size_t mac_log_threshold = 1ull << 20;
};

struct RunReport {
    double frontend_ms = 0, setup_ms = 0, online_ms = 0;
    uint64_t bytes_sent = 0, bytes_received = 0;
    size_t scalar_triples_consumed = 0;
    size_t matrix_triples_consumed = 0;
    uint64_t output_digest = 0;
    int workers = 0;
    size_t slice = 0;
    int parties = 0;
    std::vector<uint32_t> outputs;  // opened output values
    std::vector<trace::TraceEvent> trace_events;
};

// One party's online phase: shares inputs, drives the scheduler with a
// worker pool, opens the root, and runs the deferred MAC check. Aborts
// (MacCheckFailed / SecretControlFlow / ...) propagate out of run().
class PartyRuntime {
public:
    PartyRuntime(const circuit::CircuitGraph& g, std::shared_ptr<spdz::TripleStore> store,
                 std::shared_ptr<net::Session> session, RunOptions opts);

    // Cleartext inputs for this party (party 0 feeds the private parameters;
    // public parameters must be identical on every party).
    RunReport run(const preproc::Inputs& inputs);

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

// Convenience for tests: runs all n parties over the simulated transport,
// one thread pool each, and returns their reports (outputs are identical).
std::vector<RunReport> run_local(const circuit::CircuitGraph& g, int n_parties,
                                 const preproc::Inputs& inputs, RunOptions opts,
                                 uint64_t dealer_seed = 1, net::FaultPlan faults = {},
                                 uint64_t loop_iters_hint = 64);

} // namespace mpc::runtime
