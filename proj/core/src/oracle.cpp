#include "mpc/oracle.hpp"

#include "mpc/field.hpp"

namespace mpc::oracle {

using namespace circuit;

namespace {

bool cmp_eval(ir::CmpPred pred, uint32_t a, uint32_t b) {
    switch (pred) {
        case ir::CmpPred::Eq: return a == b;
        case ir::CmpPred::Ne: return a != b;
        case ir::CmpPred::Slt: return a < b;
        case ir::CmpPred::Sgt: return a > b;
        case ir::CmpPred::Sle: return a <= b;
        case ir::CmpPred::Sge: return a >= b;
    }
    return false;
}

} // namespace

std::vector<uint32_t> interpret(const CircuitGraph& g, const Inputs& inputs, uint64_t step_cap) {
    std::vector<std::vector<uint32_t>> vals(g.nodes.size());
    std::vector<bool> have(g.nodes.size(), false);

    auto set = [&](NodeId id, std::vector<uint32_t> v) {
        vals[id] = std::move(v);
        have[id] = true;
    };
    for (auto& n : g.nodes) {
        if (n.kind == NodeKind::Input) {
            auto it = inputs.find(n.name);
            if (it == inputs.end())
                throw std::runtime_error("oracle: missing input '" + n.name + "'");
            set(n.id, it->second);
        } else if (n.kind == NodeKind::Const) {
            std::vector<uint32_t> v;
            for (uint64_t x : n.cvals) v.push_back(uint32_t(x % kPrime));
            set(n.id, std::move(v));
        }
    }

    auto val = [&](NodeId id) -> const std::vector<uint32_t>& {
        if (!have[id])
            throw std::runtime_error("oracle: use before definition of node " +
                                     std::to_string(id) + " (" + kind_name(g.node(id).kind) +
                                     ")");
        return vals[id];
    };
    auto scalar = [&](NodeId id) { return val(id).at(0); };

    NodeId cur = g.entry_label;
    NodeId pred_block = kNoNode;
    uint64_t steps = 0;
    std::vector<uint32_t> output;
    bool done = false;

    while (!done) {
        for (NodeId id = g.node(cur).next; id != kNoNode; id = g.node(id).next) {
            if (++steps > step_cap) throw NonTerminating("oracle: iteration cap exceeded");
            const Node& n = g.node(id);
            switch (n.kind) {
                case NodeKind::Adder: case NodeKind::AddBatch: {
                    auto &a = val(n.operands[0]), &b = val(n.operands[1]);
                    std::vector<uint32_t> v(a.size());
                    for (size_t i = 0; i < a.size(); ++i) v[i] = fp::add(a[i], b[i]);
                    set(id, std::move(v));
                    break;
                }
                case NodeKind::Subtract: case NodeKind::SubBatch: {
                    auto &a = val(n.operands[0]), &b = val(n.operands[1]);
                    std::vector<uint32_t> v(a.size());
                    for (size_t i = 0; i < a.size(); ++i) v[i] = fp::sub(a[i], b[i]);
                    set(id, std::move(v));
                    break;
                }
                case NodeKind::Multiplier: case NodeKind::MultBatch: {
                    auto &a = val(n.operands[0]), &b = val(n.operands[1]);
                    std::vector<uint32_t> v(a.size());
                    for (size_t i = 0; i < a.size(); ++i) v[i] = fp::mul(a[i], b[i]);
                    set(id, std::move(v));
                    break;
                }
                case NodeKind::ReduceAdd: {
                    uint32_t acc = 0;
                    for (uint32_t x : val(n.operands[0])) acc = fp::add(acc, x);
                    set(id, {acc});
                    break;
                }
                case NodeKind::ReduceMul: {
                    uint32_t acc = 1;
                    for (uint32_t x : val(n.operands[0])) acc = fp::mul(acc, x);
                    set(id, {acc});
                    break;
                }
                case NodeKind::CmpPublic:
                    set(id, {cmp_eval(n.pred, scalar(n.operands[0]), scalar(n.operands[1])) ? 1u : 0u});
                    break;
                case NodeKind::Load: {
                    auto& buf = val(n.operands[0]);
                    uint32_t start = scalar(n.operands[1]);
                    if (uint64_t(start) + n.lanes > buf.size())
                        throw std::runtime_error("oracle: load out of bounds");
                    set(id, std::vector<uint32_t>(buf.begin() + start, buf.begin() + start + n.lanes));
                    break;
                }
                case NodeKind::LinearLayer: {
                    auto& x = val(n.operands[0]);
                    auto& W = val(n.operands[1]);
                    auto& b = val(n.operands[2]);
                    std::vector<uint32_t> y(n.dout);
                    for (uint32_t r = 0; r < n.dout; ++r) {
                        uint64_t acc = 0;
                        for (uint32_t c = 0; c < n.din; ++c) {
                            acc += uint64_t(fp::mul(W[uint64_t(r) * n.din + c], x[c]));
                            if (acc >= (1ull << 60)) acc %= kPrime;
                        }
                        y[r] = fp::add(uint32_t(acc % kPrime), b[r]);
                    }
                    set(id, std::move(y));
                    break;
                }
                case NodeKind::Phi: {
                    bool found = false;
                    for (size_t i = 0; i < n.operands.size(); ++i) {
                        if (n.phi_labels[i] == pred_block) {
                            set(id, val(n.operands[i]));
                            found = true;
                            break;
                        }
                    }
                    if (!found) throw std::runtime_error("oracle: phi has no pair for predecessor");
                    break;
                }
                case NodeKind::Root:
                    output = val(n.operands[0]);
                    done = true;
                    break;
                case NodeKind::Branch: {
                    NodeId dst;
                    if (n.successors.size() == 1) dst = n.successors[0];
                    else dst = scalar(n.operands[0]) ? n.successors[0] : n.successors[1];
                    pred_block = cur;
                    cur = dst;
                    break;
                }
                default:
                    throw std::runtime_error(std::string("oracle: unexpected node kind ") +
                                             kind_name(n.kind));
            }
            if (done || n.kind == NodeKind::Branch) break;
        }
        if (done) break;
    }
    return output;
}

// ---------------------------------------------------------------------------

namespace {

struct PtrVal {
    std::string base;
    uint32_t off = 0;
};

struct IrInterp {
    const ir::Function& fn;
    const Inputs& inputs;
    uint64_t cap;
    uint64_t steps = 0;

    std::map<std::string, std::vector<uint32_t>> env;
    std::map<std::string, PtrVal> ptrs;
    std::map<std::string, std::vector<uint32_t>> heap;  // mark_linear_layer outputs

    const ir::BasicBlock* find_block(const std::string& label) const {
        for (auto& bb : fn.blocks)
            if (bb.label == label) return &bb;
        throw std::runtime_error("ir-interp: no block '" + label + "'");
    }

    std::vector<uint32_t> operand(const ir::Value& v) {
        switch (v.kind) {
            case ir::ValueKind::Local: {
                auto it = env.find(v.name);
                if (it == env.end()) throw std::runtime_error("ir-interp: undefined %" + v.name);
                return it->second;
            }
            case ir::ValueKind::ConstInt: return {uint32_t(v.ival % kPrime)};
            case ir::ValueKind::ConstVector: {
                std::vector<uint32_t> out;
                for (uint64_t x : v.vvals) out.push_back(uint32_t(x % kPrime));
                return out;
            }
            default:
                throw std::runtime_error("ir-interp: bad data operand");
        }
    }

    PtrVal pointer(const ir::Value& v) {
        if (v.kind == ir::ValueKind::Local) {
            auto it = ptrs.find(v.name);
            if (it != ptrs.end()) return it->second;
            // a pointer parameter used directly
            for (auto& p : fn.params)
                if (p.name == v.name && p.type.kind == ir::TypeKind::Pointer)
                    return {v.name, 0};
        }
        throw std::runtime_error("ir-interp: cannot resolve pointer");
    }

    const std::vector<uint32_t>& buffer(const std::string& base) {
        auto hit = heap.find(base);
        if (hit != heap.end()) return hit->second;
        auto it = inputs.find(base);
        if (it == inputs.end()) throw std::runtime_error("ir-interp: missing input '" + base + "'");
        return it->second;
    }

    std::vector<uint32_t> run() {
        for (auto& p : fn.params) {
            if (p.type.kind != ir::TypeKind::Pointer) {
                auto it = inputs.find(p.name);
                if (it == inputs.end())
                    throw std::runtime_error("ir-interp: missing input '" + p.name + "'");
                env[p.name] = it->second;
            }
        }
        const ir::BasicBlock* cur = &fn.blocks.front();
        std::string pred;
        while (true) {
            const ir::BasicBlock* next = nullptr;
            for (auto& in : cur->insts) {
                if (++steps > cap) throw NonTerminating("ir-interp: iteration cap exceeded");
                switch (in.opcode) {
                    case ir::Opcode::Add: case ir::Opcode::Sub: case ir::Opcode::Mul: {
                        auto a = operand(in.operands[0]);
                        auto b = operand(in.operands[1]);
                        std::vector<uint32_t> v(a.size());
                        for (size_t i = 0; i < a.size(); ++i)
                            v[i] = in.opcode == ir::Opcode::Add ? fp::add(a[i], b[i])
                                 : in.opcode == ir::Opcode::Sub ? fp::sub(a[i], b[i])
                                                                : fp::mul(a[i], b[i]);
                        env[*in.result] = std::move(v);
                        break;
                    }
                    case ir::Opcode::Shl: {
                        auto a = operand(in.operands[0]);
                        auto b = operand(in.operands[1]);
                        std::vector<uint32_t> v(a.size());
                        for (size_t i = 0; i < a.size(); ++i)
                            v[i] = fp::mul(a[i], fp::pow(2, b[i]));
                        env[*in.result] = std::move(v);
                        break;
                    }
                    case ir::Opcode::And: case ir::Opcode::Or: case ir::Opcode::Xor: {
                        auto a = operand(in.operands[0]);
                        auto b = operand(in.operands[1]);
                        std::vector<uint32_t> v(a.size());
                        for (size_t i = 0; i < a.size(); ++i) {
                            bool x = a[i] != 0, y = b[i] != 0;
                            v[i] = in.opcode == ir::Opcode::And ? (x && y)
                                 : in.opcode == ir::Opcode::Or  ? (x || y)
                                                                : (x != y);
                        }
                        env[*in.result] = std::move(v);
                        break;
                    }
                    case ir::Opcode::Icmp: {
                        uint32_t a = operand(in.operands[0])[0];
                        uint32_t b = operand(in.operands[1])[0];
                        env[*in.result] = {cmp_eval(*in.pred, a, b) ? 1u : 0u};
                        break;
                    }
                    case ir::Opcode::Select: {
                        uint32_t c = operand(in.operands[0])[0];
                        env[*in.result] = operand(in.operands[c ? 1 : 2]);
                        break;
                    }
                    case ir::Opcode::Zext:
                        env[*in.result] = operand(in.operands[0]);
                        break;
                    case ir::Opcode::Gep: {
                        PtrVal p = pointer(in.operands[0]);
                        p.off += operand(in.operands[1])[0];
                        ptrs[*in.result] = p;
                        break;
                    }
                    case ir::Opcode::Load: {
                        PtrVal p = pointer(in.operands[0]);
                        auto& buf = buffer(p.base);
                        uint32_t lanes = in.type.kind == ir::TypeKind::VectorInt ? in.type.lanes : 1;
                        if (uint64_t(p.off) + lanes > buf.size())
                            throw std::runtime_error("ir-interp: load out of bounds");
                        env[*in.result] = std::vector<uint32_t>(buf.begin() + p.off,
                                                                buf.begin() + p.off + lanes);
                        break;
                    }
                    case ir::Opcode::Store:
                        break;  // metadata only
                    case ir::Opcode::Phi: {
                        bool found = false;
                        for (size_t i = 0; i < in.operands.size(); ++i) {
                            if (in.phi_blocks[i] == pred) {
                                env[*in.result] = operand(in.operands[i]);
                                found = true;
                                break;
                            }
                        }
                        if (!found) throw std::runtime_error("ir-interp: phi without predecessor pair");
                        break;
                    }
                    case ir::Opcode::Call: {
                        if (in.callee == "llvm.var.annotation") break;
                        if (in.callee.rfind("llvm.vector.reduce.add", 0) == 0) {
                            uint32_t acc = 0;
                            for (uint32_t x : operand(in.operands[0])) acc = fp::add(acc, x);
                            env[*in.result] = {acc};
                        } else if (in.callee.rfind("llvm.vector.reduce.mul", 0) == 0) {
                            uint32_t acc = 1;
                            for (uint32_t x : operand(in.operands[0])) acc = fp::mul(acc, x);
                            env[*in.result] = {acc};
                        } else if (in.callee == "mark_linear_layer") {
                            PtrVal px = pointer(in.operands[0]);
                            PtrVal pw = pointer(in.operands[1]);
                            PtrVal pb = pointer(in.operands[2]);
                            uint32_t din = operand(in.operands[3])[0];
                            uint32_t dout = operand(in.operands[4])[0];
                            auto& x = buffer(px.base);
                            auto& W = buffer(pw.base);
                            auto& b = buffer(pb.base);
                            std::vector<uint32_t> y(dout);
                            for (uint32_t r = 0; r < dout; ++r) {
                                uint32_t acc = 0;
                                for (uint32_t c = 0; c < din; ++c)
                                    acc = fp::add(acc, fp::mul(W[uint64_t(r) * din + c], x[c]));
                                y[r] = fp::add(acc, b[r]);
                            }
                            std::string name = "__ll_" + *in.result;
                            heap[name] = std::move(y);
                            ptrs[*in.result] = {name, 0};
                        }
                        break;
                    }
                    case ir::Opcode::Br: {
                        std::string dst;
                        if (in.operands.size() == 1) dst = in.operands[0].name;
                        else dst = operand(in.operands[0])[0] ? in.operands[1].name
                                                              : in.operands[2].name;
                        pred = cur->label;
                        next = find_block(dst);
                        break;
                    }
                    case ir::Opcode::Ret: {
                        if (in.type.kind == ir::TypeKind::Pointer) {
                            PtrVal p = pointer(in.operands[0]);
                            return buffer(p.base);
                        }
                        return operand(in.operands[0]);
                    }
                }
                if (next) break;
            }
            if (!next) throw std::runtime_error("ir-interp: block fell through");
            cur = next;
        }
    }
};

} // namespace

std::vector<uint32_t> interpret_ir(const ir::EntryView& entry, const Inputs& inputs,
                                   uint64_t step_cap) {
    IrInterp interp{entry.entry, inputs, step_cap};
    return interp.run();
}

} // namespace mpc::oracle
