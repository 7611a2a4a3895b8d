#include "mpc/circuit.hpp"

#include <algorithm>
#include <cassert>

namespace mpc::circuit {

using ir::Opcode;
using ir::TypeKind;
using ir::ValueKind;

const char* kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::Input: return "Input";
        case NodeKind::Const: return "Const";
        case NodeKind::Adder: return "Adder";
        case NodeKind::Multiplier: return "Multiplier";
        case NodeKind::Subtract: return "Subtract";
        case NodeKind::AddBatch: return "AddBatch";
        case NodeKind::MultBatch: return "MultBatch";
        case NodeKind::SubBatch: return "SubBatch";
        case NodeKind::ReduceAdd: return "ReduceAdd";
        case NodeKind::ReduceMul: return "ReduceMul";
        case NodeKind::Load: return "Load";
        case NodeKind::LinearLayer: return "LinearLayer";
        case NodeKind::Phi: return "Phi";
        case NodeKind::Branch: return "Branch";
        case NodeKind::BlockLabel: return "BlockLabel";
        case NodeKind::Root: return "Root";
        case NodeKind::CmpPublic: return "CmpPublic";
        case NodeKind::RawGep: return "RawGep";
        case NodeKind::RawShl: return "RawShl";
        case NodeKind::RawSelect: return "RawSelect";
        case NodeKind::RawZext: return "RawZext";
        case NodeKind::RawAnd: return "RawAnd";
        case NodeKind::RawOr: return "RawOr";
        case NodeKind::RawXor: return "RawXor";
        case NodeKind::RawCmp: return "RawCmp";
    }
    return "?";
}

bool is_compute_kind(NodeKind k) {
    switch (k) {
        case NodeKind::Adder: case NodeKind::Multiplier: case NodeKind::Subtract:
        case NodeKind::AddBatch: case NodeKind::MultBatch: case NodeKind::SubBatch:
        case NodeKind::ReduceAdd: case NodeKind::ReduceMul:
        case NodeKind::Load: case NodeKind::LinearLayer:
        case NodeKind::CmpPublic: case NodeKind::Root:
            return true;
        default:
            return false;
    }
}

bool is_heavy_kind(NodeKind k) {
    return k == NodeKind::Multiplier || k == NodeKind::MultBatch ||
           k == NodeKind::ReduceMul || k == NodeKind::LinearLayer;
}

namespace {

bool is_raw_kind(NodeKind k) {
    switch (k) {
        case NodeKind::RawGep: case NodeKind::RawShl: case NodeKind::RawSelect:
        case NodeKind::RawZext: case NodeKind::RawAnd: case NodeKind::RawOr:
        case NodeKind::RawXor: case NodeKind::RawCmp:
            return true;
        default:
            return false;
    }
}

// Unlink a node from its block's intra-block chain.
void unchain(CircuitGraph& g, NodeId id) {
    NodeId blk = g.node(id).block;
    if (blk == kNoNode) return;
    NodeId cur = blk;
    while (g.node(cur).next != kNoNode) {
        if (g.node(cur).next == id) {
            g.node(cur).next = g.node(id).next;
            return;
        }
        cur = g.node(cur).next;
    }
}

// Insert `nid` into the chain immediately before `before` (same block).
void chain_before(CircuitGraph& g, NodeId nid, NodeId before) {
    NodeId blk = g.node(before).block;
    g.node(nid).block = blk;
    NodeId cur = blk;
    while (g.node(cur).next != before) {
        cur = g.node(cur).next;
        assert(cur != kNoNode);
    }
    g.node(nid).next = before;
    g.node(cur).next = nid;
}

void replace_uses(CircuitGraph& g, NodeId old_id, NodeId new_id) {
    for (auto& n : g.nodes) {
        if (n.removed) continue;
        for (auto& op : n.operands)
            if (op == old_id) op = new_id;
    }
    if (g.root == old_id) g.root = new_id;
}

void propagate_privacy(CircuitGraph& g) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto& n : g.nodes) {
            if (n.removed || n.kind == NodeKind::Input || n.kind == NodeKind::Const ||
                n.kind == NodeKind::BlockLabel || n.kind == NodeKind::CmpPublic)
                continue;
            bool priv = false;
            if (n.kind == NodeKind::Load) {
                priv = !n.operands.empty() && g.node(n.operands[0]).is_private;
            } else {
                for (NodeId op : n.operands)
                    if (g.node(op).is_private) { priv = true; break; }
            }
            if (priv && !n.is_private) { n.is_private = true; changed = true; }
        }
    }
}

} // namespace

CircuitGraph build_graph(const ir::EntryView& entry) {
    CircuitGraph g;
    const ir::Function& fn = entry.entry;

    std::map<std::string, NodeId> defs;

    for (auto& p : fn.params) {
        Node n;
        n.kind = NodeKind::Input;
        n.name = p.name;
        n.is_private = p.annotation == "private";
        NodeId id = g.add_node(std::move(n));
        defs[p.name] = id;
        InputDesc d;
        d.name = p.name;
        d.is_private = p.annotation == "private";
        d.is_pointer = p.type.kind == TypeKind::Pointer;
        d.count = d.is_pointer ? 0 : 1;
        d.node = id;
        g.inputs.push_back(d);
    }

    std::map<std::string, NodeId> label_ids;
    for (auto& bb : fn.blocks) {
        Node n;
        n.kind = NodeKind::BlockLabel;
        n.name = bb.label;
        NodeId id = g.add_node(std::move(n));
        label_ids[bb.label] = id;
        g.labels.push_back(id);
    }
    g.entry_label = g.labels.empty() ? kNoNode : g.labels.front();

    struct Pending {
        NodeId node;
        const ir::Instruction* inst;
    };
    std::vector<Pending> pending;

    // pass A: one node per SSA definition / control instruction
    for (auto& bb : fn.blocks) {
        NodeId blk = label_ids[bb.label];
        NodeId prev = blk;
        for (auto& inst : bb.insts) {
            NodeKind kind;
            uint32_t lanes = inst.type.kind == TypeKind::VectorInt ? inst.type.lanes : 1;
            bool bit = inst.type.kind == TypeKind::ScalarInt && inst.type.bits == 1;
            switch (inst.opcode) {
                case Opcode::Add: kind = lanes > 1 ? NodeKind::AddBatch : NodeKind::Adder; break;
                case Opcode::Sub: kind = lanes > 1 ? NodeKind::SubBatch : NodeKind::Subtract; break;
                case Opcode::Mul: kind = lanes > 1 ? NodeKind::MultBatch : NodeKind::Multiplier; break;
                case Opcode::Shl: kind = NodeKind::RawShl; break;
                case Opcode::And: kind = NodeKind::RawAnd; break;
                case Opcode::Or: kind = NodeKind::RawOr; break;
                case Opcode::Xor: kind = NodeKind::RawXor; break;
                case Opcode::Icmp: kind = NodeKind::RawCmp; bit = true; break;
                case Opcode::Select: kind = NodeKind::RawSelect; break;
                case Opcode::Zext: kind = NodeKind::RawZext; break;
                case Opcode::Load: kind = NodeKind::Load; break;
                case Opcode::Gep: kind = NodeKind::RawGep; break;
                case Opcode::Br: kind = NodeKind::Branch; break;
                case Opcode::Ret: kind = NodeKind::Root; break;
                case Opcode::Phi: kind = NodeKind::Phi; break;
                case Opcode::Store:
                    continue;  // outputs are discovered through ret; stores are metadata
                case Opcode::Call: {
                    if (inst.callee == "llvm.var.annotation") continue;
                    if (inst.callee == "mark_linear_layer") kind = NodeKind::LinearLayer;
                    else if (inst.callee.rfind("llvm.vector.reduce.add", 0) == 0) kind = NodeKind::ReduceAdd;
                    else if (inst.callee.rfind("llvm.vector.reduce.mul", 0) == 0) kind = NodeKind::ReduceMul;
                    else throw GraphError("UnloweredInstruction: callee @" + inst.callee);
                    break;
                }
                default:
                    throw GraphError("UnloweredInstruction: unhandled opcode");
            }
            Node n;
            n.kind = kind;
            n.lanes = lanes;
            n.block = blk;
            n.is_bit = bit;
            if (kind == NodeKind::RawCmp) n.pred = *inst.pred;
            NodeId id = g.add_node(std::move(n));
            if (inst.result) {
                if (!defs.emplace(*inst.result, id).second)
                    throw GraphError("duplicate SSA name %" + *inst.result);
            }
            g.node(prev).next = id;
            prev = id;
            pending.push_back({id, &inst});

            if (kind == NodeKind::Root) {
                if (g.root != kNoNode) throw GraphError("multiple return points are not supported");
                g.root = id;
            }
        }
    }
    if (g.root == kNoNode) throw GraphError("entry function has no ret");

    // pass B: wire operands
    auto resolve = [&](const ir::Value& v) -> NodeId {
        switch (v.kind) {
            case ValueKind::Local: {
                auto it = defs.find(v.name);
                if (it == defs.end()) throw GraphError("use of undefined value %" + v.name);
                return it->second;
            }
            case ValueKind::ConstInt:
                return g.intern_const(v.ival);
            case ValueKind::ConstVector: {
                Node n;
                n.kind = NodeKind::Const;
                n.lanes = static_cast<uint32_t>(v.vvals.size());
                for (uint64_t x : v.vvals) n.cvals.push_back(x % kPrime);
                return g.add_node(std::move(n));
            }
            case ValueKind::LabelRef:
                return label_ids.at(v.name);
            default:
                throw GraphError("value kind not usable as data operand");
        }
    };

    for (auto& [id, inst] : pending) {
        // resolve() may add const nodes and reallocate g.nodes, so gather all
        // resolved operands before touching the node itself
        std::vector<NodeId> ops;
        std::vector<NodeId> succs;
        std::vector<NodeId> phi_labels;
        switch (g.node(id).kind) {
            case NodeKind::Branch: {
                if (inst->operands.size() == 1) {
                    succs = {label_ids.at(inst->operands[0].name)};
                } else {
                    ops = {resolve(inst->operands[0])};
                    succs = {label_ids.at(inst->operands[1].name),
                             label_ids.at(inst->operands[2].name)};
                }
                break;
            }
            case NodeKind::Root:
                if (inst->type.kind == TypeKind::Void)
                    throw GraphError("entry function must return a value");
                ops = {resolve(inst->operands[0])};
                break;
            case NodeKind::Phi: {
                for (size_t i = 0; i < inst->operands.size(); ++i) {
                    ops.push_back(resolve(inst->operands[i]));
                    phi_labels.push_back(label_ids.at(inst->phi_blocks[i]));
                }
                break;
            }
            default: {
                for (auto& v : inst->operands) ops.push_back(resolve(v));
                break;
            }
        }
        Node& n = g.node(id);
        n.operands = std::move(ops);
        n.successors = std::move(succs);
        n.phi_labels = std::move(phi_labels);
    }
    return g;
}

void normalize_loads(CircuitGraph& g) {
    // intern_const may grow g.nodes, so iterate by index over the original span
    size_t original = g.nodes.size();
    for (size_t i = 0; i < original; ++i) {
        NodeId id = static_cast<NodeId>(i);
        if (g.node(id).removed || g.node(id).kind != NodeKind::Load) continue;
        if (g.node(id).operands.size() != 1) continue;  // already normalized
        NodeId p = g.node(id).operands[0];
        NodeId base, start;
        if (g.node(p).kind == NodeKind::Input) {
            base = p;
            start = g.intern_const(0);
        } else if (g.node(p).kind == NodeKind::RawGep) {
            NodeId gb = g.node(p).operands[0];
            if (g.node(gb).kind != NodeKind::Input)
                throw GraphError("UntraceableBase: load pointer does not trace to a parameter");
            base = gb;
            start = g.node(p).operands[1];
        } else {
            throw GraphError("UntraceableBase: load pointer does not trace to a parameter");
        }
        g.node(id).operands = {base, start};
    }
    // drop geps that no longer have users
    std::set<NodeId> used;
    for (auto& n : g.nodes) {
        if (n.removed) continue;
        for (NodeId op : n.operands) used.insert(op);
    }
    for (auto& n : g.nodes) {
        if (!n.removed && n.kind == NodeKind::RawGep && !used.count(n.id)) {
            n.removed = true;
            unchain(g, n.id);
        }
    }
}

void lower_idioms(CircuitGraph& g) {
    propagate_privacy(g);
    size_t original = g.nodes.size();
    for (size_t i = 0; i < original; ++i) {
        NodeId id = static_cast<NodeId>(i);
        NodeKind kind = g.node(id).kind;
        if (g.node(id).removed) continue;

        switch (kind) {
            case NodeKind::RawShl: {
                NodeId amt = g.node(id).operands[1];
                if (g.node(amt).kind != NodeKind::Const)
                    throw GraphError("UnloweredInstruction: shl by non-immediate amount");
                uint64_t k = g.node(amt).cvals[0];
                NodeId factor = g.intern_const(fp::pow(2, k));
                Node& n = g.node(id);
                n.kind = n.lanes > 1 ? NodeKind::MultBatch : NodeKind::Multiplier;
                n.operands = {n.operands[0], factor};
                break;
            }
            case NodeKind::RawZext: {
                NodeId src = g.node(id).operands[0];
                replace_uses(g, id, src);
                g.node(id).removed = true;
                unchain(g, id);
                break;
            }
            case NodeKind::RawSelect: {
                if (g.node(id).lanes > 1)
                    throw GraphError("UnloweredInstruction: vector select");
                NodeId c = g.node(id).operands[0];
                NodeId t = g.node(id).operands[1];
                NodeId f = g.node(id).operands[2];
                Node sub;
                sub.kind = NodeKind::Subtract;
                sub.operands = {t, f};
                NodeId s = g.add_node(std::move(sub));
                chain_before(g, s, id);
                Node mul;
                mul.kind = NodeKind::Multiplier;
                mul.operands = {c, s};
                NodeId m = g.add_node(std::move(mul));
                chain_before(g, m, id);
                Node& n = g.node(id);
                n.kind = NodeKind::Adder;
                n.operands = {f, m};
                break;
            }
            case NodeKind::RawAnd: case NodeKind::RawOr: case NodeKind::RawXor: {
                NodeId x = g.node(id).operands[0];
                NodeId y = g.node(id).operands[1];
                if (!g.node(x).is_bit || !g.node(y).is_bit)
                    throw GraphError("UnloweredInstruction: bitwise op on operands not known to be 0/1");
                if (kind == NodeKind::RawAnd) {
                    Node& n = g.node(id);
                    n.kind = NodeKind::Multiplier;
                    break;
                }
                Node mul;
                mul.kind = NodeKind::Multiplier;
                mul.operands = {x, y};
                NodeId m = g.add_node(std::move(mul));
                chain_before(g, m, id);
                NodeId m2 = m;
                if (kind == NodeKind::RawXor) {
                    Node dbl;
                    dbl.kind = NodeKind::Multiplier;
                    dbl.operands = {g.intern_const(2), m};
                    m2 = g.add_node(std::move(dbl));
                    chain_before(g, m2, id);
                }
                Node addn;
                addn.kind = NodeKind::Adder;
                addn.operands = {x, y};
                NodeId a = g.add_node(std::move(addn));
                chain_before(g, a, id);
                Node& n = g.node(id);
                n.kind = NodeKind::Subtract;
                n.operands = {a, m2};
                n.is_bit = true;
                break;
            }
            case NodeKind::RawCmp: {
                NodeId x = g.node(id).operands[0];
                NodeId y = g.node(id).operands[1];
                bool priv = g.node(x).is_private || g.node(y).is_private;
                if (!priv) {
                    g.node(id).kind = NodeKind::CmpPublic;
                    break;
                }
                ir::CmpPred pred = g.node(id).pred;
                bool eqne = pred == ir::CmpPred::Eq || pred == ir::CmpPred::Ne;
                if (!eqne)
                    throw GraphError("SecretComparisonUnsupported: ordered comparison on private operands");
                if (!g.node(x).is_bit || !g.node(y).is_bit)
                    throw GraphError("SecretComparisonUnsupported: private eq/ne on operands not known to be 0/1");
                // ne(x,y) = x + y - 2xy over bits; eq = 1 - ne
                Node mul;
                mul.kind = NodeKind::Multiplier;
                mul.operands = {x, y};
                NodeId m = g.add_node(std::move(mul));
                chain_before(g, m, id);
                Node dbl;
                dbl.kind = NodeKind::Multiplier;
                dbl.operands = {g.intern_const(2), m};
                NodeId m2 = g.add_node(std::move(dbl));
                chain_before(g, m2, id);
                Node addn;
                addn.kind = NodeKind::Adder;
                addn.operands = {x, y};
                NodeId a = g.add_node(std::move(addn));
                chain_before(g, a, id);
                if (pred == ir::CmpPred::Ne) {
                    Node& n = g.node(id);
                    n.kind = NodeKind::Subtract;
                    n.operands = {a, m2};
                    n.is_bit = true;
                } else {
                    Node ne;
                    ne.kind = NodeKind::Subtract;
                    ne.operands = {a, m2};
                    ne.is_bit = true;
                    NodeId nid = g.add_node(std::move(ne));
                    chain_before(g, nid, id);
                    NodeId one = g.intern_const(1);
                    Node& n = g.node(id);
                    n.kind = NodeKind::Subtract;
                    n.operands = {one, nid};
                    n.is_bit = true;
                }
                break;
            }
            default:
                break;
        }
    }
    for (auto& n : g.nodes)
        if (!n.removed && is_raw_kind(n.kind) && n.kind != NodeKind::RawGep)
            throw GraphError(std::string("UnloweredInstruction: ") + kind_name(n.kind));
}

void collapse_linear_layer(CircuitGraph& g) {
    for (auto& n : g.nodes) {
        if (n.removed || n.kind != NodeKind::LinearLayer) continue;
        if (n.operands.size() == 3) continue;  // already collapsed
        if (n.operands.size() != 5)
            throw GraphError("mark_linear_layer expects (x, W, b, DIN, DOUT)");
        const Node& dn = g.node(n.operands[3]);
        const Node& on = g.node(n.operands[4]);
        if (dn.kind != NodeKind::Const || on.kind != NodeKind::Const)
            throw GraphError("NonConstantDims: linear layer dimensions must be compile-time constants");
        n.din = static_cast<uint32_t>(dn.cvals[0]);
        n.dout = static_cast<uint32_t>(on.cvals[0]);
        for (int i = 0; i < 3; ++i)
            if (g.node(n.operands[i]).kind != NodeKind::Input)
                throw GraphError("linear layer operands must be input parameters");
        n.operands.resize(3);
        n.lanes = n.dout;
    }
}

void tag_and_propagate_privacy(CircuitGraph& g) {
    propagate_privacy(g);
    for (auto& n : g.nodes) {
        if (n.removed) continue;
        if (n.kind == NodeKind::Load && g.node(n.operands[1]).is_private)
            throw GraphError("load index depends on private data");
        if (n.kind == NodeKind::CmpPublic)
            for (NodeId op : n.operands)
                if (g.node(op).is_private)
                    throw GraphError("internal: CmpPublic with private operand");
    }
}

void build_cfg_and_loops(CircuitGraph& g) {
    size_t nb = g.labels.size();
    std::map<NodeId, size_t> idx;
    for (size_t i = 0; i < nb; ++i) idx[g.labels[i]] = i;

    std::vector<std::vector<size_t>> succ(nb), pred(nb);
    for (auto& n : g.nodes) {
        if (n.removed || n.kind != NodeKind::Branch) continue;
        size_t from = idx.at(n.block);
        for (NodeId s : n.successors) {
            size_t to = idx.at(s);
            succ[from].push_back(to);
            pred[to].push_back(from);
        }
    }

    // dominators, iterative dataflow
    std::vector<std::set<size_t>> dom(nb);
    std::set<size_t> all;
    for (size_t i = 0; i < nb; ++i) all.insert(i);
    for (size_t i = 0; i < nb; ++i) dom[i] = i == 0 ? std::set<size_t>{0} : all;
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 1; i < nb; ++i) {
            std::set<size_t> nd = all;
            if (pred[i].empty()) nd = {};
            for (size_t p : pred[i]) {
                std::set<size_t> inter;
                std::set_intersection(nd.begin(), nd.end(), dom[p].begin(), dom[p].end(),
                                      std::inserter(inter, inter.begin()));
                nd = std::move(inter);
            }
            nd.insert(i);
            if (nd != dom[i]) { dom[i] = std::move(nd); changed = true; }
        }
    }

    // reducible iff the graph is acyclic once back edges (target dominates
    // source) are removed
    {
        std::vector<int> color(nb, 0);
        std::vector<std::pair<size_t, size_t>> stack;
        for (size_t r = 0; r < nb; ++r) {
            if (color[r] != 0) continue;
            stack.push_back({r, 0});
            color[r] = 1;
            while (!stack.empty()) {
                auto& [u, i] = stack.back();
                if (i < succ[u].size()) {
                    size_t s = succ[u][i++];
                    if (dom[u].count(s)) continue;  // back edge, skipped
                    if (color[s] == 1)
                        throw GraphError(
                            "IrreducibleControlFlow: loop entered at a non-dominating block");
                    if (color[s] == 0) {
                        color[s] = 1;
                        stack.push_back({s, 0});
                    }
                } else {
                    color[u] = 2;
                    stack.pop_back();
                }
            }
        }
    }

    g.loops.clear();
    for (size_t h = 0; h < nb; ++h) {
        std::set<size_t> members;
        for (size_t b = 0; b < nb; ++b) {
            bool back = false;
            for (size_t t : succ[b])
                if (t == h && dom[b].count(h)) back = true;
            if (!back) continue;
            // blocks that reach b without passing through h
            members.insert(h);
            members.insert(b);
            std::vector<size_t> wl{b};
            while (!wl.empty()) {
                size_t u = wl.back();
                wl.pop_back();
                if (u == h) continue;
                for (size_t p : pred[u])
                    if (!members.count(p)) { members.insert(p); wl.push_back(p); }
            }
        }
        if (members.empty()) continue;
        LoopInfo li;
        li.header = g.labels[h];
        for (size_t m : members) li.members.insert(g.labels[m]);
        std::set<NodeId> exits;
        for (size_t m : members)
            for (size_t s : succ[m])
                if (!members.count(s)) exits.insert(g.labels[s]);
        li.exits.assign(exits.begin(), exits.end());
        g.loops[li.header] = std::move(li);
    }

    // loops must nest cleanly
    for (auto& [h1, l1] : g.loops)
        for (auto& [h2, l2] : g.loops) {
            if (h1 == h2) continue;
            std::set<NodeId> inter;
            std::set_intersection(l1.members.begin(), l1.members.end(),
                                  l2.members.begin(), l2.members.end(),
                                  std::inserter(inter, inter.begin()));
            if (inter.empty()) continue;
            bool nested = std::includes(l1.members.begin(), l1.members.end(),
                                        l2.members.begin(), l2.members.end()) ||
                          std::includes(l2.members.begin(), l2.members.end(),
                                        l1.members.begin(), l1.members.end());
            if (!nested)
                throw GraphError("IrreducibleControlFlow: overlapping non-nested loops");
        }
}

void finalize_graph(CircuitGraph& g) {
    std::vector<NodeId> order;
    std::vector<bool> placed(g.nodes.size(), false);
    auto place = [&](NodeId id) {
        if (id == kNoNode || placed[id] || g.node(id).removed) return;
        placed[id] = true;
        order.push_back(id);
    };
    for (auto& d : g.inputs) place(d.node);
    for (auto& n : g.nodes)
        if (!n.removed && n.kind == NodeKind::Const) place(n.id);
    for (NodeId lbl : g.labels) {
        place(lbl);
        for (NodeId cur = g.node(lbl).next; cur != kNoNode; cur = g.node(cur).next) place(cur);
    }
    for (auto& n : g.nodes)
        if (!n.removed) place(n.id);

    std::vector<NodeId> remap(g.nodes.size(), kNoNode);
    for (size_t i = 0; i < order.size(); ++i) remap[order[i]] = static_cast<NodeId>(i);
    auto mp = [&](NodeId id) { return id == kNoNode ? kNoNode : remap[id]; };

    std::vector<Node> fresh;
    fresh.reserve(order.size());
    for (NodeId old : order) {
        Node n = std::move(g.node(old));
        n.id = remap[old];
        for (auto& op : n.operands) op = mp(op);
        for (auto& s : n.successors) s = mp(s);
        for (auto& l : n.phi_labels) l = mp(l);
        n.block = mp(n.block);
        n.next = mp(n.next);
        fresh.push_back(std::move(n));
    }
    g.nodes = std::move(fresh);
    g.root = mp(g.root);
    g.entry_label = mp(g.entry_label);
    for (auto& l : g.labels) l = mp(l);
    for (auto& d : g.inputs) d.node = mp(d.node);
    std::map<uint64_t, NodeId> pool;
    for (auto& [v, id] : g.const_pool) pool[v] = mp(id);
    g.const_pool = std::move(pool);
    std::map<NodeId, LoopInfo> loops;
    for (auto& [h, li] : g.loops) {
        LoopInfo nl;
        nl.header = mp(h);
        for (NodeId m : li.members) nl.members.insert(mp(m));
        for (NodeId e : li.exits) nl.exits.push_back(mp(e));
        std::sort(nl.exits.begin(), nl.exits.end());
        loops[nl.header] = std::move(nl);
    }
    g.loops = std::move(loops);

    // static element counts for pointer inputs, where derivable
    std::map<NodeId, uint64_t> counts;
    std::map<NodeId, bool> unknown;
    for (auto& n : g.nodes) {
        if (n.kind == NodeKind::Load) {
            NodeId base = n.operands[0];
            const Node& sn = g.node(n.operands[1]);
            if (sn.kind == NodeKind::Const) {
                uint64_t hi = sn.cvals[0] + n.lanes;
                counts[base] = std::max(counts[base], hi);
            } else {
                unknown[base] = true;
            }
        } else if (n.kind == NodeKind::LinearLayer) {
            counts[n.operands[0]] = std::max(counts[n.operands[0]], uint64_t(n.din));
            counts[n.operands[1]] = std::max(counts[n.operands[1]], uint64_t(n.din) * n.dout);
            counts[n.operands[2]] = std::max(counts[n.operands[2]], uint64_t(n.dout));
        }
    }
    for (auto& d : g.inputs) {
        if (!d.is_pointer) continue;
        if (unknown[d.node]) d.count = 0;
        else d.count = counts.count(d.node) ? counts[d.node] : 0;
    }
}

CircuitGraph compile_graph(const ir::EntryView& entry) {
    CircuitGraph g = build_graph(entry);
    normalize_loads(g);
    lower_idioms(g);
    collapse_linear_layer(g);
    tag_and_propagate_privacy(g);
    build_cfg_and_loops(g);
    finalize_graph(g);
    return g;
}

bool graphs_equal(const CircuitGraph& a, const CircuitGraph& b) {
    if (a.nodes.size() != b.nodes.size()) return false;
    for (size_t i = 0; i < a.nodes.size(); ++i) {
        const Node& x = a.nodes[i];
        const Node& y = b.nodes[i];
        if (x.id != y.id || x.kind != y.kind || x.lanes != y.lanes ||
            x.operands != y.operands || x.block != y.block ||
            x.is_private != y.is_private || x.next != y.next || x.is_bit != y.is_bit ||
            x.cvals != y.cvals || x.phi_labels != y.phi_labels ||
            x.successors != y.successors || x.din != y.din || x.dout != y.dout ||
            x.name != y.name)
            return false;
        if (x.kind == NodeKind::CmpPublic && x.pred != y.pred) return false;
    }
    auto ieq = [](const InputDesc& x, const InputDesc& y) {
        return x.name == y.name && x.is_private == y.is_private &&
               x.is_pointer == y.is_pointer && x.count == y.count && x.node == y.node;
    };
    if (a.inputs.size() != b.inputs.size()) return false;
    for (size_t i = 0; i < a.inputs.size(); ++i)
        if (!ieq(a.inputs[i], b.inputs[i])) return false;
    if (a.root != b.root || a.entry_label != b.entry_label || a.labels != b.labels ||
        a.const_pool != b.const_pool)
        return false;
    if (a.loops.size() != b.loops.size()) return false;
    for (auto it1 = a.loops.begin(), it2 = b.loops.begin(); it1 != a.loops.end(); ++it1, ++it2) {
        if (it1->first != it2->first || it1->second.header != it2->second.header ||
            it1->second.members != it2->second.members || it1->second.exits != it2->second.exits)
            return false;
    }
    return true;
}

} // namespace mpc::circuit
