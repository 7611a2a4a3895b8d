#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mpc/oracle.hpp"
#include "mpc/runtime.hpp"
#include "test_util.hpp"

using namespace mpc;
using runtime::RunOptions;
using runtime::run_local;
using testutil::compile_fixture;

namespace {

struct FixtureCase {
    const char* file;
    oracle::Inputs inputs;
};

std::vector<FixtureCase> fixture_cases() {
    return {
        {"straight_line.ll", {{"x", {3, 5, 4}}, {"k", {7}}}},
        {"diamond.ll", {{"x", {4, 6}}, {"k", {9}}}},
        {"diamond.ll", {{"x", {4, 6}}, {"k", {2}}}},
        {"loop_sum.ll", {{"n", {10}}}},
        {"nested_loop.ll", {{"x", {2, 3}}, {"a", {3}}, {"b", {2}}}},
        {"loop_after_loop.ll", {{"x", {2, 3}}, {"n", {4}}}},
        {"vector_add.ll",
         {{"x", {1, 2, 3, 4, 5, 6, 7, 8}}, {"y", {8, 7, 6, 5, 4, 3, 2, 1}}}},
        {"reduce_mul.ll", {{"x", {1, 2, 3, 4, 5, 6, 7}}}},
        {"select_shl_bits.ll", {{"x", {100}}, {"k", {4}}, {"m", {7}}}},
        {"linear_64x32.ll", testutil::linear_inputs(64, 32, 9)},
    };
}

} // namespace

TEST_CASE("two-party runs reconstruct to the oracle on every fixture") {
    for (auto& c : fixture_cases()) {
        auto g = compile_fixture(c.file);
        auto want = oracle::interpret(g, c.inputs);
        RunOptions opts;
        opts.threads = 2;
        auto reports = run_local(g, 2, c.inputs, opts);
        REQUIRE(reports.size() == 2);
        for (auto& r : reports) {
            CHECK_MESSAGE(r.outputs == want, c.file);
            CHECK(r.parties == 2);
            CHECK(r.output_digest == reports[0].output_digest);
        }
    }
}

TEST_CASE("party counts 2..6 agree") {
    auto g = compile_fixture("straight_line.ll");
    oracle::Inputs in{{"x", {1000, 2000, 3000}}, {"k", {9}}};
    auto want = oracle::interpret(g, in);
    for (int n = 2; n <= 6; ++n) {
        auto reports = run_local(g, n, in, RunOptions{});
        for (auto& r : reports) CHECK_MESSAGE(r.outputs == want, "n=" << n);
    }
}

TEST_CASE("digests identical across worker counts") {
    for (auto& c : fixture_cases()) {
        auto g = compile_fixture(c.file);
        std::vector<uint64_t> digests;
        for (int w : {1, 2, 8}) {
            RunOptions opts;
            opts.threads = w;
            digests.push_back(run_local(g, 2, c.inputs, opts)[0].output_digest);
        }
        CHECK_MESSAGE(digests[0] == digests[1], c.file);
        CHECK_MESSAGE(digests[0] == digests[2], c.file);
    }
}

TEST_CASE("runtime traces validate and report plausible stages") {
    auto g = compile_fixture("nested_loop.ll");
    oracle::Inputs in{{"x", {2, 3}}, {"a", {3}}, {"b", {2}}};
    RunOptions opts;
    opts.threads = 2;
    opts.trace = true;
    auto reports = run_local(g, 2, in, opts);
    for (auto& r : reports) {
        CHECK_FALSE(r.trace_events.empty());
        auto viol = trace::validate_trace(g, r.trace_events);
        std::string first = viol.empty() ? std::string() : viol[0];
        CHECK_MESSAGE(viol.empty(), first);
        CHECK(r.setup_ms >= 0);
        CHECK(r.online_ms > 0);
        CHECK(r.bytes_sent > 0);
        CHECK(r.bytes_received > 0);
        CHECK(r.scalar_triples_consumed >= 6);  // inner multiply, 3x2 iterations
        CHECK(r.workers == 2);
    }
}

TEST_CASE("a single flipped bit in an opened frame aborts the run") {
    auto g = compile_fixture("straight_line.ll");
    oracle::Inputs in{{"x", {3, 5, 4}}, {"k", {7}}};
    net::FaultPlan plan;
    plan.faults.push_back({net::Fault::Kind::BitFlip, 1, net::MsgType::OpenShares, 0, 9, 0});
    CHECK_THROWS_AS(run_local(g, 2, in, RunOptions{}, 1, plan), spdz::MacCheckFailed);
}

TEST_CASE("under-provisioned loop iterations surface as TripleExhausted") {
    auto g = compile_fixture("nested_loop.ll");
    oracle::Inputs in{{"x", {2, 3}}, {"a", {4}}, {"b", {4}}};  // 16 inner executions
    CHECK_THROWS_AS(run_local(g, 2, in, RunOptions{}, 1, {}, 2), spdz::TripleExhausted);
    // properly provisioned, same shape succeeds
    auto want = oracle::interpret(g, in);
    CHECK(run_local(g, 2, in, RunOptions{}, 1, {}, 4)[0].outputs == want);
}

TEST_CASE("secret branch aborts the runtime with SecretControlFlow") {
    auto g = compile_fixture("secret_branch.ll");
    CHECK_THROWS_AS(run_local(g, 2, {{"p", {1}}}, RunOptions{}), sched::SecretControlFlow);
}

TEST_CASE("same seed twice yields identical transcript digests") {
    auto g = compile_fixture("linear_64x32.ll");
    auto in = testutil::linear_inputs(64, 32, 33);
    RunOptions opts;
    opts.threads = 4;
    auto a = run_local(g, 3, in, opts, 77);
    auto b = run_local(g, 3, in, opts, 77);
    CHECK(a[0].output_digest == b[0].output_digest);
    CHECK(a[0].outputs == b[0].outputs);
    CHECK(a[0].matrix_triples_consumed == b[0].matrix_triples_consumed);
}

TEST_CASE("public-only computation still runs under MPC") {
    auto g = compile_fixture("loop_sum.ll");
    auto reports = run_local(g, 2, {{"n", {25}}}, RunOptions{});
    for (auto& r : reports) CHECK(r.outputs == std::vector<uint32_t>{325});
}
