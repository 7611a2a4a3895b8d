#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mpc/circuit_io.hpp"
#include "mpc/oracle.hpp"
#include "test_util.hpp"

#include <json.hpp>

using namespace mpc;
using testutil::compile_fixture;
using testutil::compile_ll;
using testutil::fixture_path;
using testutil::read_file;

static const char* kAllFixtures[] = {
    "straight_line.ll", "diamond.ll",   "loop_sum.ll",        "nested_loop.ll",
    "loop_after_loop.ll", "vector_add.ll", "reduce_mul.ll",   "select_shl_bits.ll",
    "linear_64x32.ll",  "secret_branch.ll",
};

TEST_CASE("field arithmetic properties") {
    CHECK(fp::reduce(kPrime) == 0);
    CHECK(fp::reduce(kPrime + 3) == 3);
    CHECK(fp::add(uint32_t(kPrime - 1), 1) == 0);
    CHECK(fp::sub(0, 1) == uint32_t(kPrime - 1));
    CHECK(fp::neg(0) == 0);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        uint32_t a = uint32_t(rng() % kPrime), b = uint32_t(rng() % kPrime);
        CHECK(fp::add(a, b) == fp::add(b, a));
        CHECK(fp::sub(fp::add(a, b), b) == a);
        CHECK(fp::mul(a, b) == uint32_t((uint64_t(a) * b) % kPrime));
        CHECK(fp::add(a, fp::neg(a)) == 0);
        if (a != 0) CHECK(fp::mul(a, fp::inv(a)) == 1);
    }
    CHECK(fp::pow(3, 5) == 243);
    CHECK(fp::pow(2, kPrime - 1) == 1);  // Fermat
}

TEST_CASE("parser round-trips every fixture through the printer") {
    for (auto* f : kAllFixtures) {
        auto r1 = ir::parse_module(read_file(fixture_path(f)));
        REQUIRE_MESSAGE(r1.ok(), f);
        auto text = ir::print_module(r1.module);
        auto r2 = ir::parse_module(text);
        REQUIRE_MESSAGE(r2.ok(), f);
        CHECK_MESSAGE(r1.module == r2.module, f);
    }
}

TEST_CASE("unsupported opcode yields a positioned diagnostic, not a crash") {
    auto r = ir::parse_module(read_file(fixture_path("unsupported_opcode.ll")));
    REQUIRE_FALSE(r.ok());
    CHECK(r.diagnostics[0].line > 0);
    CHECK(r.diagnostics[0].to_string("x.ll").find("x.ll") != std::string::npos);
}

TEST_CASE("entry validation") {
    auto r = ir::parse_module(read_file(fixture_path("straight_line.ll")));
    REQUIRE(r.ok());
    CHECK_THROWS(ir::validate_entry(r.module, "nope"));
    auto ev = ir::validate_entry(r.module, "main");
    REQUIRE(ev.entry.params.size() == 2);
    CHECK(ev.entry.params[0].annotation == "private");
    CHECK(ev.entry.params[1].annotation == "public");  // unannotated scalar defaults public

    // pointer params must carry an annotation
    auto bad = ir::parse_module(
        "define i32 @main(ptr %x) {\nentry:\n  %a = load i32, ptr %x\n  ret i32 %a\n}\n");
    REQUIRE(bad.ok());
    CHECK_THROWS(ir::validate_entry(bad.module, "main"));
}

TEST_CASE("loop discovery on fixtures") {
    auto g1 = compile_fixture("loop_sum.ll");
    REQUIRE(g1.loops.size() == 1);
    auto& li = g1.loops.begin()->second;
    CHECK(li.members.size() == 1);
    CHECK(li.exits.size() == 1);

    auto g2 = compile_fixture("nested_loop.ll");
    REQUIRE(g2.loops.size() == 2);
    std::vector<size_t> sizes;
    for (auto& [h, l] : g2.loops) sizes.push_back(l.members.size());
    std::sort(sizes.begin(), sizes.end());
    CHECK(sizes[0] == 1);  // inner: just its own block
    CHECK(sizes[1] == 3);  // outer: header, inner, latch

    CHECK(compile_fixture("diamond.ll").loops.empty());
    CHECK(compile_fixture("loop_after_loop.ll").loops.size() == 2);
}

TEST_CASE("secret-branch fixture compiles; the rejection is a runtime concern") {
    auto g = compile_fixture("secret_branch.ll");
    bool saw_private_bit = false;
    for (auto& n : g.nodes)
        if (n.kind == circuit::NodeKind::Load && n.is_private && n.is_bit) saw_private_bit = true;
    CHECK(saw_private_bit);
}

TEST_CASE("irreducible control flow is rejected") {
    // entry jumps into the middle of a rotated loop: two-entry cycle
    const char* text =
        "define i32 @main(i32 %k) {\n"
        "entry:\n  %c = icmp sgt i32 %k, 5\n  br i1 %c, label %h, label %m\n"
        "h:\n  br label %m\n"
        "m:\n  %c2 = icmp sgt i32 %k, 9\n  br i1 %c2, label %h, label %x\n"
        "x:\n  ret i32 %k\n}\n";
    CHECK_THROWS_AS(compile_ll(text), circuit::GraphError);
}

TEST_CASE("multiple returns are rejected") {
    const char* text =
        "define i32 @main(i32 %k) {\n"
        "entry:\n  %c = icmp sgt i32 %k, 5\n  br i1 %c, label %a, label %b\n"
        "a:\n  ret i32 1\n"
        "b:\n  ret i32 2\n}\n";
    CHECK_THROWS_AS(compile_ll(text), circuit::GraphError);
}

TEST_CASE("serialization round-trip preserves structure") {
    for (auto* f : kAllFixtures) {
        auto g = compile_fixture(f);
        auto bytes = circuit::serialize_circuit(g);
        auto g2 = circuit::deserialize_circuit(bytes);
        CHECK_MESSAGE(circuit::graphs_equal(g, g2), f);
    }
}

TEST_CASE("corrupt circuit payloads are detected") {
    auto g = compile_fixture("loop_sum.ll");
    auto bytes = circuit::serialize_circuit(g);
    auto bad = bytes;
    bad[1] = 'Z';  // magic
    CHECK_THROWS(circuit::deserialize_circuit(bad));
    bad = bytes;
    bad[4] ^= 0x40;  // version
    CHECK_THROWS_AS(circuit::deserialize_circuit(bad), circuit::VersionMismatch);
    bad = bytes;
    bad.resize(bad.size() / 2);
    CHECK_THROWS_AS(circuit::deserialize_circuit(bad), circuit::CorruptPayload);
}

TEST_CASE("json mirror is well-formed") {
    auto g = compile_fixture("diamond.ll");
    auto j = nlohmann::json::parse(circuit::circuit_to_json(g));
    CHECK(j["nodes"].size() == g.nodes.size());
}

TEST_CASE("oracle matches hand-computed fixture results") {
    using oracle::Inputs;
    {
        Inputs in{{"n", {10}}};
        CHECK(oracle::interpret(compile_fixture("loop_sum.ll"), in) ==
              std::vector<uint32_t>{55});
    }
    {
        Inputs in{{"x", {3, 5, 4}}, {"k", {7}}};
        // ((3*5)+7)*4 - 3
        CHECK(oracle::interpret(compile_fixture("straight_line.ll"), in) ==
              std::vector<uint32_t>{85});
    }
    {
        auto g = compile_fixture("diamond.ll");
        CHECK(oracle::interpret(g, Inputs{{"x", {4, 6}}, {"k", {9}}}) ==
              std::vector<uint32_t>{33});  // big: 4*6+9
        CHECK(oracle::interpret(g, Inputs{{"x", {9, 6}}, {"k", {2}}}) ==
              std::vector<uint32_t>{3});  // small: 9-6
    }
    {
        // sum over i in 1..3, j in 1..2 of s*i*t*j with s=2, t=3
        Inputs in{{"x", {2, 3}}, {"a", {3}}, {"b", {2}}};
        CHECK(oracle::interpret(compile_fixture("nested_loop.ll"), in) ==
              std::vector<uint32_t>{108});
    }
    {
        Inputs in{{"x", {1, 2, 3, 4, 5, 6, 7}}};
        CHECK(oracle::interpret(compile_fixture("reduce_mul.ll"), in) ==
              std::vector<uint32_t>{5040});
    }
    {
        Inputs in{{"x", {1, 1, 1, 1, 1, 1, 1, 1}}, {"y", {2, 2, 2, 2, 2, 2, 2, 2}}};
        CHECK(oracle::interpret(compile_fixture("vector_add.ll"), in) ==
              std::vector<uint32_t>{48});  // 8 * (1+2)*2
    }
    {
        // dout=2, din=3 layer against a dense hand computation
        auto g = compile_ll(testutil::linear_ll(3, 2));
        Inputs in{{"x", {1, 2, 3}}, {"W", {4, 5, 6, 7, 8, 9}}, {"b", {10, 20}}};
        CHECK(oracle::interpret(g, in) == std::vector<uint32_t>{42, 70});
    }
}

TEST_CASE("lowering soundness: lowered graph equals raw-IR interpretation") {
    auto r = ir::parse_module(read_file(fixture_path("select_shl_bits.ll")));
    REQUIRE(r.ok());
    auto ev = ir::validate_entry(r.module, "main");
    auto g = circuit::compile_graph(ev);
    std::mt19937_64 rng(11);
    // exhaustive around both icmp thresholds, then random
    for (uint32_t k = 0; k < 8; ++k)
        for (uint32_t m = 5; m < 10; ++m)
            for (uint32_t a : {0u, 1u, 12345u}) {
                oracle::Inputs in{{"x", {a}}, {"k", {k}}, {"m", {m}}};
                CHECK(oracle::interpret(g, in) == oracle::interpret_ir(ev, in));
            }
    for (int i = 0; i < 1000; ++i) {
        oracle::Inputs in{{"x", {uint32_t(rng() % kPrime)}},
                          {"k", {uint32_t(rng() % 16)}},
                          {"m", {uint32_t(rng() % 16)}}};
        CHECK(oracle::interpret(g, in) == oracle::interpret_ir(ev, in));
    }
}

TEST_CASE("lowering soundness holds over generated branchy programs") {
    std::mt19937_64 rng(21);
    for (uint64_t seed = 0; seed < 60; ++seed) {
        auto text = testutil::gen_random_ll(seed);
        auto r = ir::parse_module(text);
        REQUIRE_MESSAGE(r.ok(), "seed " << seed);
        auto ev = ir::validate_entry(r.module, "main");
        auto g = circuit::compile_graph(ev);
        for (int rep = 0; rep < 5; ++rep) {
            oracle::Inputs in{{"p0", {uint32_t(rng() % 1000)}},
                              {"p1", {uint32_t(rng() % 1000)}},
                              {"p2", {uint32_t(rng() % 1000)}}};
            CHECK_MESSAGE(oracle::interpret(g, in) == oracle::interpret_ir(ev, in),
                          "seed " << seed);
        }
    }
}
