#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mpc/circuit.hpp"
#include "mpc/oracle.hpp"
#include "mpc/scheduler.hpp"
#include "mpc/trace.hpp"

#ifndef LLSPDZ_FIXTURE_DIR
#define LLSPDZ_FIXTURE_DIR "tests/fixtures"
#endif

namespace testutil {

inline std::string fixture_path(const std::string& name) {
    return std::string(LLSPDZ_FIXTURE_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline mpc::circuit::CircuitGraph compile_ll(const std::string& text,
                                             const std::string& entry = "main") {
    auto parsed = mpc::ir::parse_module(text);
    if (!parsed.ok())
        throw std::runtime_error("fixture parse failed: " + parsed.diagnostics[0].message);
    return mpc::circuit::compile_graph(mpc::ir::validate_entry(parsed.module, entry));
}

inline mpc::circuit::CircuitGraph compile_fixture(const std::string& name) {
    return compile_ll(read_file(fixture_path(name)));
}

inline std::vector<uint32_t> rand_field_vec(size_t n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<uint32_t> v(n);
    for (auto& x : v) x = uint32_t(rng() % mpc::kPrime);
    return v;
}

// Generates the linear-layer fixture for arbitrary dimensions.
inline std::string linear_ll(uint32_t din, uint32_t dout) {
    std::ostringstream os;
    os << "@.str = private unnamed_addr constant [8 x i8] c\"private\\00\", align 1\n\n"
       << "define ptr @main(ptr %x, ptr %W, ptr %b) {\n"
       << "entry:\n"
       << "  call void @llvm.var.annotation(ptr %x, ptr @.str, ptr null, i32 0, ptr null)\n"
       << "  call void @llvm.var.annotation(ptr %W, ptr @.str, ptr null, i32 0, ptr null)\n"
       << "  call void @llvm.var.annotation(ptr %b, ptr @.str, ptr null, i32 0, ptr null)\n"
       << "  %y = call ptr @mark_linear_layer(ptr %x, ptr %W, ptr %b, i32 " << din << ", i32 "
       << dout << ")\n"
       << "  ret ptr %y\n"
       << "}\n";
    return os.str();
}

inline mpc::oracle::Inputs linear_inputs(uint32_t din, uint32_t dout, uint64_t seed) {
    mpc::oracle::Inputs in;
    in["x"] = rand_field_vec(din, seed);
    in["W"] = rand_field_vec(size_t(din) * dout, seed + 1);
    in["b"] = rand_field_vec(dout, seed + 2);
    return in;
}

// Random structured all-public program: arithmetic runs, diamonds, counted
// loops (optionally with a diamond in the body). Always reducible SSA.
inline std::string gen_random_ll(uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::ostringstream os;
    std::vector<std::string> avail = {"%p0", "%p1", "%p2"};
    int tmp = 0;
    auto pick = [&]() -> std::string {
        if (rng() % 4 == 0) return std::to_string(rng() % 97);
        return avail[rng() % avail.size()];
    };
    auto op = [&]() -> std::string {
        switch (rng() % 3) {
            case 0: return "add";
            case 1: return "sub";
            default: return "mul";
        }
    };
    auto arith = [&](std::ostringstream& o, std::vector<std::string>& scope) {
        std::string n = "%t" + std::to_string(tmp++);
        o << "  " << n << " = " << op() << " i32 " << pick() << ", " << pick() << "\n";
        scope.push_back(n);
    };
    os << "define i32 @main(i32 %p0, i32 %p1, i32 %p2) {\nentry:\n";
    std::string cur = "entry";
    int segs = 2 + int(rng() % 4);
    for (int s = 0; s < segs; ++s) {
        int kind = int(rng() % 3);
        if (kind == 0) {
            int k = 1 + int(rng() % 3);
            for (int i = 0; i < k; ++i) arith(os, avail);
        } else if (kind == 1) {
            // diamond
            std::string a = "a" + std::to_string(s), b = "b" + std::to_string(s),
                        j = "j" + std::to_string(s);
            os << "  %c" << s << " = icmp " << (rng() % 2 ? "slt" : "sgt") << " i32 " << pick()
               << ", " << (rng() % 50) << "\n"
               << "  br i1 %c" << s << ", label %" << a << ", label %" << b << "\n";
            os << a << ":\n";
            std::string xa = "%x" + std::to_string(s);
            os << "  " << xa << " = " << op() << " i32 " << pick() << ", " << pick() << "\n"
               << "  br label %" << j << "\n";
            os << b << ":\n";
            std::string xb = "%y" + std::to_string(s);
            os << "  " << xb << " = " << op() << " i32 " << pick() << ", " << pick() << "\n"
               << "  br label %" << j << "\n";
            os << j << ":\n"
               << "  %m" << s << " = phi i32 [ " << xa << ", %" << a << " ], [ " << xb << ", %"
               << b << " ]\n";
            avail.push_back("%m" + std::to_string(s));
            cur = j;
        } else {
            // counted loop, sometimes with a diamond body
            std::string L = "L" + std::to_string(s), X = "X" + std::to_string(s);
            int trip = 1 + int(rng() % 4);
            bool diamond = rng() % 2 == 0;
            std::string init = pick();
            os << "  br label %" << L << "\n" << L << ":\n";
            std::string latch = diamond ? "dj" + std::to_string(s) : L;
            os << "  %i" << s << " = phi i32 [ 0, %" << cur << " ], [ %in" << s << ", %" << latch
               << " ]\n"
               << "  %acc" << s << " = phi i32 [ " << init << ", %" << cur << " ], [ %accn" << s
               << ", %" << latch << " ]\n";
            std::vector<std::string> body = avail;
            body.push_back("%i" + std::to_string(s));
            body.push_back("%acc" + std::to_string(s));
            auto bpick = [&]() -> std::string {
                if (rng() % 4 == 0) return std::to_string(rng() % 97);
                return body[rng() % body.size()];
            };
            std::string term;
            if (diamond) {
                std::string da = "da" + std::to_string(s), db = "db" + std::to_string(s);
                os << "  %dc" << s << " = icmp slt i32 " << bpick() << ", " << (rng() % 50)
                   << "\n"
                   << "  br i1 %dc" << s << ", label %" << da << ", label %" << db << "\n";
                os << da << ":\n  %dxa" << s << " = " << op() << " i32 " << bpick() << ", "
                   << bpick() << "\n  br label %" << latch << "\n";
                os << db << ":\n  %dxb" << s << " = " << op() << " i32 " << bpick() << ", "
                   << bpick() << "\n  br label %" << latch << "\n";
                os << latch << ":\n  %dm" << s << " = phi i32 [ %dxa" << s << ", %" << da
                   << " ], [ %dxb" << s << ", %" << db << " ]\n";
                term = "%dm" + std::to_string(s);
            } else {
                os << "  %bt" << s << " = " << op() << " i32 " << bpick() << ", " << bpick()
                   << "\n";
                term = "%bt" + std::to_string(s);
            }
            os << "  %accn" << s << " = add i32 %acc" << s << ", " << term << "\n"
               << "  %in" << s << " = add i32 %i" << s << ", 1\n"
               << "  %lc" << s << " = icmp slt i32 %in" << s << ", " << trip << "\n"
               << "  br i1 %lc" << s << ", label %" << L << ", label %" << X << "\n";
            os << X << ":\n";
            avail.push_back("%accn" + std::to_string(s));
            cur = X;
        }
    }
    os << "  %r = add i32 " << pick() << ", " << pick() << "\n  ret i32 %r\n}\n";
    return os.str();
}

// Drives the scheduler over cleartext values with a worker pool: the
// protocol-free half of the runtime, for scheduler-focused tests.
struct ClearRun {
    std::vector<uint32_t> output;
    std::vector<mpc::trace::TraceEvent> events;
    std::map<mpc::circuit::NodeId, uint64_t> final_epochs;
};

inline ClearRun clear_run(const mpc::circuit::CircuitGraph& g, const mpc::oracle::Inputs& inputs,
                          int workers, bool with_trace = true) {
    using namespace mpc;
    using circuit::NodeKind;
    std::vector<std::vector<uint32_t>> vals(g.nodes.size());
    for (auto& d : g.inputs) {
        auto it = inputs.find(d.name);
        if (it == inputs.end()) throw std::runtime_error("missing input " + d.name);
        vals[d.node] = it->second;
        for (auto& v : vals[d.node]) v = fp::reduce(v);
    }
    for (auto& n : g.nodes) {
        if (n.kind != NodeKind::Const) continue;
        for (uint64_t c : n.cvals) vals[n.id].push_back(uint32_t(c % kPrime));
    }
    auto at = [&](circuit::NodeId id, size_t lane) -> uint32_t {
        const auto& v = vals[id];
        return v.size() == 1 ? v[0] : v.at(lane);
    };
    trace::Trace tr;
    sched::Scheduler sch(
        g, [&](circuit::NodeId id) { return vals[id].at(0); },
        [&](circuit::NodeId phi, circuit::NodeId chosen) { vals[phi] = vals[chosen]; },
        with_trace ? &tr : nullptr);
    sch.start();
    std::atomic<bool> failed{false};
    std::exception_ptr err;
    std::mutex err_mu;
    auto work = [&](int w) {
        try {
            while (!failed && !sch.finished()) {
                auto nd = sch.next_ready_node(w);
                if (!nd) {
                    std::this_thread::yield();
                    continue;
                }
                const auto& n = g.node(nd->id);
                std::vector<uint32_t> out(n.lanes);
                switch (n.kind) {
                    case NodeKind::Adder: case NodeKind::AddBatch:
                        for (uint32_t i = 0; i < n.lanes; ++i)
                            out[i] = fp::add(at(n.operands[0], i), at(n.operands[1], i));
                        break;
                    case NodeKind::Subtract: case NodeKind::SubBatch:
                        for (uint32_t i = 0; i < n.lanes; ++i)
                            out[i] = fp::sub(at(n.operands[0], i), at(n.operands[1], i));
                        break;
                    case NodeKind::Multiplier: case NodeKind::MultBatch:
                        for (uint32_t i = 0; i < n.lanes; ++i)
                            out[i] = fp::mul(at(n.operands[0], i), at(n.operands[1], i));
                        break;
                    case NodeKind::ReduceAdd: {
                        uint32_t acc = 0;
                        for (uint32_t v : vals[n.operands[0]]) acc = fp::add(acc, v);
                        out = {acc};
                        break;
                    }
                    case NodeKind::ReduceMul: {
                        uint32_t acc = 1;
                        for (uint32_t v : vals[n.operands[0]]) acc = fp::mul(acc, v);
                        out = {acc};
                        break;
                    }
                    case NodeKind::CmpPublic: {
                        uint32_t a = vals[n.operands[0]].at(0), b = vals[n.operands[1]].at(0);
                        bool r = false;
                        switch (n.pred) {
                            case mpc::ir::CmpPred::Eq: r = a == b; break;
                            case mpc::ir::CmpPred::Ne: r = a != b; break;
                            case mpc::ir::CmpPred::Slt: r = a < b; break;
                            case mpc::ir::CmpPred::Sgt: r = a > b; break;
                            case mpc::ir::CmpPred::Sle: r = a <= b; break;
                            case mpc::ir::CmpPred::Sge: r = a >= b; break;
                        }
                        out = {r ? 1u : 0u};
                        break;
                    }
                    case NodeKind::Load: {
                        uint32_t start = vals[n.operands[1]].at(0);
                        const auto& base = vals[n.operands[0]];
                        for (uint32_t i = 0; i < n.lanes; ++i) out[i] = base.at(start + i);
                        break;
                    }
                    case NodeKind::LinearLayer: {
                        const auto& x = vals[n.operands[0]];
                        const auto& W = vals[n.operands[1]];
                        const auto& b = vals[n.operands[2]];
                        for (uint32_t r = 0; r < n.dout; ++r) {
                            uint64_t acc = b[r];
                            for (uint32_t c = 0; c < n.din; ++c) {
                                acc += uint64_t(fp::mul(W[size_t(r) * n.din + c], x[c]));
                                if (acc >= (1ull << 60)) acc %= kPrime;
                            }
                            out[r] = uint32_t(acc % kPrime);
                        }
                        break;
                    }
                    case NodeKind::Root:
                        out = vals[n.operands[0]];
                        break;
                    default:
                        throw std::runtime_error("clear_run: unexpected kind");
                }
                vals[nd->id] = std::move(out);
                sch.mark_complete(nd->id, w);
            }
        } catch (...) {
            std::lock_guard lk(err_mu);
            if (!err) err = std::current_exception();
            failed = true;
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work, w);
    work(0);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    if (!sch.finished()) throw std::runtime_error("clear_run: scheduler stalled");
    ClearRun out{vals[g.root], tr.snapshot(), {}};
    for (auto& [h, li] : g.loops) out.final_epochs[h] = sch.loop_epoch(h);
    return out;
}

} // namespace testutil
