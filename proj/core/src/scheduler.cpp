#include "mpc/scheduler.hpp"

#include <algorithm>

namespace mpc::sched {

using circuit::kNoNode;
using circuit::Node;

Scheduler::Scheduler(const CircuitGraph& g, PublicReader read_public, PhiResolver resolve_phi,
                     trace::Trace* trace)
    : g_(g),
      read_public_(std::move(read_public)),
      resolve_phi_(std::move(resolve_phi)),
      trace_(trace) {
    state_.resize(g_.nodes.size());
    entered_.assign(g_.nodes.size(), false);
    consumers_.resize(g_.nodes.size());
    phi_waiters_.resize(g_.nodes.size());
    phi_choice_.assign(g_.nodes.size(), kNoNode);
    for (auto& n : g_.nodes) {
        NodeState& s = state_[n.id];
        if (n.kind == NodeKind::Phi) continue;  // resolved at block entry
        if (!is_queueable(n)) continue;
        s.base_unlock = int(n.operands.size());
        s.remaining = s.base_unlock;
        s.op_sat.assign(n.operands.size(), false);
        for (size_t i = 0; i < n.operands.size(); ++i)
            consumers_[n.operands[i]].emplace_back(n.id, int(i));
    }
    for (auto& [h, li] : g_.loops) loop_epoch_[h] = 0;
}

bool Scheduler::is_queueable(const Node& n) const {
    if (n.kind == NodeKind::Branch) return true;
    if (n.kind == NodeKind::Input || n.kind == NodeKind::Const) return false;
    return circuit::is_compute_kind(n.kind);
}

void Scheduler::enqueue_locked(NodeId id) {
    NodeState& s = state_[id];
    if (s.in_queue || s.completed || s.issued) return;
    s.in_queue = true;
    if (circuit::is_heavy_kind(g_.node(id).kind))
        heavy_.push_back(id);
    else
        light_.push_back(id);
}

void Scheduler::start() {
    std::lock_guard lk(mu_);
    for (auto& n : g_.nodes) {
        if (n.kind != NodeKind::Input && n.kind != NodeKind::Const) continue;
        state_[n.id].completed = true;
        for (auto [c, slot] : consumers_[n.id]) {
            NodeState& cs = state_[c];
            if (!cs.op_sat[slot]) {
                cs.op_sat[slot] = true;
                --cs.remaining;
            }
        }
    }
    enter_block_locked(g_.entry_label, -1);
}

std::optional<IssuedNode> Scheduler::next_ready_node(int worker) {
    std::lock_guard lk(mu_);
    for (;;) {
        if (!heavy_.empty()) {
            NodeId id = heavy_.front();
            heavy_.pop_front();
            NodeState& s = state_[id];
            s.in_queue = false;
            s.issued = true;
            if (trace_) trace_->record(worker, trace::Event::Issue, id);
            return IssuedNode{id, g_.node(id).kind, g_.node(id).operands};
        }
        if (light_.empty()) return std::nullopt;
        NodeId id = light_.front();
        light_.pop_front();
        NodeState& s = state_[id];
        s.in_queue = false;
        if (g_.node(id).kind == NodeKind::Branch) {
            if (!try_branch_once_locked(id, worker)) {
                // parked until the next completion or block entry re-examines it
                if (trace_) trace_->record(worker, trace::Event::BranchStalled, id);
                parked_.push_back(id);
            }
            continue;
        }
        s.issued = true;
        if (trace_) trace_->record(worker, trace::Event::Issue, id);
        return IssuedNode{id, g_.node(id).kind, g_.node(id).operands};
    }
}

void Scheduler::mark_complete(NodeId id, int worker) {
    std::lock_guard lk(mu_);
    complete_locked(id, worker);
    unpark_locked();
}

bool Scheduler::finished() const {
    std::lock_guard lk(mu_);
    return finished_;
}

bool Scheduler::queues_empty() const {
    std::lock_guard lk(mu_);
    return heavy_.empty() && light_.empty();
}

uint64_t Scheduler::loop_epoch(NodeId header) const {
    std::lock_guard lk(mu_);
    auto it = loop_epoch_.find(header);
    return it == loop_epoch_.end() ? 0 : it->second;
}

void Scheduler::unpark_locked() {
    for (NodeId id : parked_) {
        NodeState& s = state_[id];
        if (!s.in_queue) {
            s.in_queue = true;
            light_.push_back(id);
        }
    }
    parked_.clear();
}

void Scheduler::complete_locked(NodeId id, int worker) {
    NodeState& s = state_[id];
    if (s.completed)
        throw DoubleCompletion("DoubleCompletion: node " + std::to_string(id) +
                               " completed twice in one epoch");
    s.completed = true;
    s.issued = false;
    s.in_queue = false;
    if (trace_) trace_->record(worker, trace::Event::Complete, id);

    NodeId blk = g_.node(id).block;
    if (blk != kNoNode) {
        for (NodeId h : g_.loops_containing_block(blk))
            last_done_[{h, id}] = loop_epoch_[h];
    }
    if (id == g_.root) finished_ = true;

    for (auto [c, slot] : consumers_[id]) {
        NodeState& cs = state_[c];
        if (cs.op_sat[slot]) continue;
        cs.op_sat[slot] = true;
        if (--cs.remaining == 0) {
            NodeId cb = g_.node(c).block;
            if (cb == kNoNode || entered_[cb]) enqueue_locked(c);
        }
    }

    auto waiters = std::move(phi_waiters_[id]);
    phi_waiters_[id].clear();
    for (NodeId phi : waiters) {
        if (phi_choice_[phi] != id || state_[phi].completed) continue;
        resolve_phi_(phi, id);
        complete_locked(phi, worker);
    }
}

void Scheduler::reset_node_locked(NodeId id) {
    const Node& n = g_.node(id);
    NodeState& s = state_[id];
    s.completed = false;
    s.issued = false;
    if (n.kind == NodeKind::Phi) {
        phi_choice_[id] = kNoNode;
        return;
    }
    if (n.block == kNoNode) return;
    NodeId h = g_.innermost_loop_of_block(n.block);
    if (h == kNoNode) return;
    const auto& members = g_.loops.at(h).members;
    for (size_t i = 0; i < n.operands.size(); ++i) {
        if (!s.op_sat[i]) continue;
        NodeId pb = g_.node(n.operands[i]).block;
        if (pb != kNoNode && members.count(pb)) {
            s.op_sat[i] = false;
            ++s.remaining;
        }
    }
}

void Scheduler::rearm_loop_locked(NodeId header) {
    const auto& li = g_.loops.at(header);
    for (NodeId b : li.members) {
        if (b != header) entered_[b] = false;
        // inner loops restart from scratch on each outer iteration
        if (b != header && g_.loops.count(b)) {
            loop_epoch_[b] = 0;
            for (auto it = last_done_.begin(); it != last_done_.end();) {
                if (it->first.first == b)
                    it = last_done_.erase(it);
                else
                    ++it;
            }
        }
        for (NodeId u = g_.node(b).next; u != kNoNode; u = g_.node(u).next) {
            const Node& n = g_.node(u);
            NodeState& s = state_[u];
            s.completed = false;
            s.issued = false;
            if (n.kind == NodeKind::Phi) {
                phi_choice_[u] = kNoNode;
                continue;
            }
            for (size_t i = 0; i < n.operands.size(); ++i) {
                if (!s.op_sat[i]) continue;
                NodeId pb = g_.node(n.operands[i]).block;
                if (pb != kNoNode && li.members.count(pb)) {
                    s.op_sat[i] = false;
                    ++s.remaining;
                }
            }
        }
    }
}

NodeId Scheduler::phi_chosen_locked(NodeId phi) const {
    const Node& n = g_.node(phi);
    auto pit = pred_label_.find(n.block);
    if (pit == pred_label_.end())
        throw UnknownPredecessor("UnknownPredecessor: phi " + std::to_string(phi) +
                                 " entered with no recorded predecessor");
    NodeId pred = pit->second;
    for (size_t i = 0; i < n.operands.size(); ++i)
        if (n.phi_labels[i] == pred) return n.operands[i];
    throw UnknownPredecessor("UnknownPredecessor: phi " + std::to_string(phi) +
                             " has no pair for block " + std::to_string(pred));
}

void Scheduler::enter_block_locked(NodeId label, int worker) {
    bool is_header = g_.loops.count(label) != 0;
    if (entered_[label] && !is_header) return;
    entered_[label] = true;
    // phi choices must be captured before a rearm wipes the previous epoch's
    // completion flags: a back-edge phi takes the value the body just produced
    struct Seed {
        NodeId phi, chosen;
        bool ready;
    };
    std::vector<Seed> seeds;
    for (NodeId u = g_.node(label).next; u != kNoNode; u = g_.node(u).next) {
        if (g_.node(u).kind != NodeKind::Phi) continue;
        NodeId chosen = phi_chosen_locked(u);
        seeds.push_back({u, chosen, state_[chosen].completed});
    }
    if (is_header) {
        uint64_t& e = loop_epoch_[label];
        e = e == kEpochFinished ? 1 : e + 1;
        if (trace_) trace_->record(worker, trace::Event::EpochAdvance, label, e);
        rearm_loop_locked(label);
    }
    if (trace_) trace_->record(worker, trace::Event::BlockEnter, label,
                               is_header ? loop_epoch_[label] : 0);
    for (auto& s : seeds) {
        phi_choice_[s.phi] = s.chosen;
        if (s.ready) {
            resolve_phi_(s.phi, s.chosen);
            complete_locked(s.phi, worker);
        } else {
            phi_waiters_[s.chosen].push_back(s.phi);
        }
    }
    for (NodeId u = g_.node(label).next; u != kNoNode; u = g_.node(u).next) {
        const Node& n = g_.node(u);
        if (!is_queueable(n)) continue;
        if (state_[u].remaining == 0) enqueue_locked(u);
    }
    unpark_locked();
}

NodeId Scheduler::loop_header_for_branch_locked(NodeId id) const {
    const Node& n = g_.node(id);
    NodeId h = g_.innermost_loop_of_block(n.block);
    if (h == kNoNode) return kNoNode;
    // only branches that can close or leave the loop are gated
    const auto& members = g_.loops.at(h).members;
    for (NodeId succ : n.successors)
        if (succ == h || !members.count(succ)) return h;
    return kNoNode;
}

bool Scheduler::try_branch_once_locked(NodeId id, int worker) {
    const Node& n = g_.node(id);
    NodeId dst;
    if (n.successors.size() == 1) {
        dst = n.successors[0];
    } else {
        NodeId cond = n.operands[0];
        if (g_.node(cond).is_private)
            throw SecretControlFlow("SecretControlFlow: branch " + std::to_string(id) +
                                    " conditioned on private node " + std::to_string(cond));
        uint32_t c = read_public_(cond);
        dst = c ? n.successors[0] : n.successors[1];
    }
    NodeId h = loop_header_for_branch_locked(id);
    if (h != kNoNode) {
        uint64_t e = loop_epoch_.at(h);
        if (e > 0 && e != kEpochFinished && !is_loop_epoch_complete_locked(h, id, e))
            return false;
        if (!g_.loops.at(h).members.count(dst)) loop_epoch_[h] = kEpochFinished;
    }
    pred_label_[dst] = n.block;
    if (trace_) trace_->record(worker, trace::Event::BranchTaken, id);
    enter_block_locked(dst, worker);
    reset_node_locked(id);
    unpark_locked();
    return true;
}

bool Scheduler::is_loop_epoch_complete_locked(NodeId header, NodeId branch,
                                              uint64_t epoch) const {
    const auto& members = g_.loops.at(header).members;
    std::vector<NodeId> worklist;
    std::set<NodeId> seen;
    if (g_.node(header).next != kNoNode) worklist.push_back(g_.node(header).next);
    while (!worklist.empty()) {
        NodeId u = worklist.back();
        worklist.pop_back();
        if (!seen.insert(u).second) continue;
        const Node& n = g_.node(u);
        if (n.kind == NodeKind::BlockLabel) {
            if (u != header && !members.count(u)) continue;
            if (u != header && g_.loops.count(u)) {
                // nested loop: reason at the granularity of its exits
                auto it = loop_epoch_.find(u);
                if (it == loop_epoch_.end() || it->second != kEpochFinished) continue;
                for (NodeId ex : g_.loops.at(u).exits) worklist.push_back(ex);
                continue;
            }
            if (n.next != kNoNode) worklist.push_back(n.next);
            continue;
        }
        if (n.block != header && !members.count(n.block)) continue;
        if (u == branch) return true;
        if (n.kind == NodeKind::Branch) {
            if (n.successors.size() == 1) {
                worklist.push_back(n.successors[0]);
            } else {
                NodeId cond = n.operands[0];
                if (!state_[cond].completed) continue;  // path not yet resolved
                uint32_t c = read_public_(cond);
                worklist.push_back(c ? n.successors[0] : n.successors[1]);
            }
            continue;
        }
        if (circuit::is_compute_kind(n.kind) && n.kind != NodeKind::Root) {
            auto it = last_done_.find({header, u});
            uint64_t done = it == last_done_.end() ? 0 : it->second;
            if (done < epoch) return false;
        }
        if (n.next != kNoNode) worklist.push_back(n.next);
    }
    return false;
}

} // namespace mpc::sched
