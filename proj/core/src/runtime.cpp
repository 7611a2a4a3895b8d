#include "mpc/runtime.hpp"

#include <atomic>
#include <chrono>
#include <random>
#include <thread>

#include "mpc/hash.hpp"
#include "mpc/linear.hpp"

namespace mpc::runtime {

using circuit::kNoNode;
using circuit::NodeId;
using circuit::NodeKind;
using spdz::ShareVec;

namespace {

// (node, execution, sub-op) -> wire batch id; input sharing and the MAC
// check use reserved high ranges.
uint64_t make_batch(NodeId node, uint64_t exec, uint64_t sub) {
    return (uint64_t(node) << 32) | (exec << 12) | sub;
}
constexpr uint64_t kMacBatchBase = 1ull << 62;
constexpr uint64_t kInputBatchBase = 1ull << 63;

struct RtValue {
    bool is_public = true;
    std::vector<uint32_t> pub;
    ShareVec sh;

    size_t lanes() const { return is_public ? pub.size() : sh.lanes(); }
};

std::vector<uint32_t> bcast(const std::vector<uint32_t>& v, size_t lanes) {
    if (v.size() == lanes) return v;
    return std::vector<uint32_t>(lanes, v.at(0));
}

ShareVec bcast_share(const ShareVec& s, size_t lanes) {
    if (s.lanes() == lanes) return s;
    ShareVec out;
    out.vals.assign(lanes, s.vals.at(0));
    out.macs.assign(lanes, s.macs.at(0));
    return out;
}

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

uint64_t u64_of(const std::vector<uint32_t>& v, size_t at) {
    return uint64_t(v[at]) | (uint64_t(v[at + 1]) << 32);
}

} // namespace

struct PartyRuntime::Impl : std::enable_shared_from_this<PartyRuntime::Impl> {
    const circuit::CircuitGraph& g;
    std::shared_ptr<spdz::TripleStore> store;
    std::shared_ptr<net::Session> session;
    RunOptions opts;

    preproc::TripleLayout layout;
    backend::BackendRegistry registry;
    trace::Trace trace_log;
    std::unique_ptr<sched::Scheduler> sched_;

    std::vector<RtValue> vals;
    std::vector<std::atomic<uint64_t>> exec_count;

    std::mutex log_mu;
    std::vector<spdz::OpenRecord> mac_log;

    std::atomic<bool> abort_flag{false};
    std::mutex err_mu;
    std::exception_ptr first_error;

    std::atomic<size_t> scalar_used{0}, matrix_used{0};

    Impl(const circuit::CircuitGraph& g_, std::shared_ptr<spdz::TripleStore> store_,
         std::shared_ptr<net::Session> session_, RunOptions o)
        : g(g_),
          store(std::move(store_)),
          session(std::move(session_)),
          opts(o),
          layout(preproc::compute_triple_layout(g_, o.slice, store->loop_iters)),
          registry(std::max<size_t>(1, o.slice / 4)),
          vals(g_.nodes.size()),
          exec_count(g_.nodes.size()) {}

    int party() const { return store->party; }
    uint32_t alpha() const { return store->alpha_share; }

    void fail(std::exception_ptr e) {
        {
            std::lock_guard lk(err_mu);
            if (!first_error) first_error = e;
        }
        abort_flag = true;
    }

    void log_open(uint64_t batch_id, const std::vector<uint32_t>& opened,
                  const std::vector<uint32_t>& mac_shares) {
        std::lock_guard lk(log_mu);
        for (size_t i = 0; i < opened.size(); ++i)
            mac_log.push_back({batch_id, uint32_t(i), opened[i], mac_shares[i]});
    }

    uint32_t read_public(NodeId id) const {
        const RtValue& v = vals[id];
        if (!v.is_public || v.pub.empty())
            throw std::runtime_error("runtime: node " + std::to_string(id) +
                                     " is not a completed public scalar");
        return v.pub[0];
    }

    // ---- node execution ----

    RtValue exec_add(const RtValue& a, const RtValue& b, size_t lanes, bool sub) {
        RtValue out;
        if (a.is_public && b.is_public) {
            auto av = bcast(a.pub, lanes), bv = bcast(b.pub, lanes);
            out.pub.resize(lanes);
            for (size_t i = 0; i < lanes; ++i)
                out.pub[i] = sub ? fp::sub(av[i], bv[i]) : fp::add(av[i], bv[i]);
            return out;
        }
        out.is_public = false;
        if (!a.is_public && !b.is_public) {
            auto as = bcast_share(a.sh, lanes), bs = bcast_share(b.sh, lanes);
            auto& be = registry.select(lanes);
            out.sh = sub ? be.sub_batch(as, bs) : be.add_batch(as, bs);
            return out;
        }
        if (!a.is_public) {  // share op public
            out.sh = bcast_share(a.sh, lanes);
            auto bv = bcast(b.pub, lanes);
            if (sub)
                spdz::sub_public(out.sh, bv, party(), alpha());
            else
                spdz::add_public(out.sh, bv, party(), alpha());
            return out;
        }
        // public op share
        out.sh = bcast_share(b.sh, lanes);
        auto av = bcast(a.pub, lanes);
        if (sub)
            spdz::rsub_public(out.sh, av, party(), alpha());
        else
            spdz::add_public(out.sh, av, party(), alpha());
        return out;
    }

    // private*private goes through the async path in execute(); this handles
    // everything local.
    RtValue exec_mul_local(const RtValue& a, const RtValue& b, size_t lanes) {
        RtValue out;
        if (a.is_public && b.is_public) {
            auto av = bcast(a.pub, lanes), bv = bcast(b.pub, lanes);
            out.pub.resize(lanes);
            for (size_t i = 0; i < lanes; ++i) out.pub[i] = fp::mul(av[i], bv[i]);
            return out;
        }
        out.is_public = false;
        if (!a.is_public) {
            out.sh = bcast_share(a.sh, lanes);
            spdz::mul_public(out.sh, bcast(b.pub, lanes));
        } else {
            out.sh = bcast_share(b.sh, lanes);
            spdz::mul_public(out.sh, bcast(a.pub, lanes));
        }
        return out;
    }

    spdz::TripleShares take_scalar_triples(NodeId id, uint64_t exec, size_t lanes,
                                           size_t already_used) {
        auto it = layout.scalar.find(id);
        if (it == layout.scalar.end())
            throw spdz::TripleExhausted("TripleExhausted: no triple region for node " +
                                        std::to_string(id));
        const auto& r = it->second;
        if (exec >= r.max_execs)
            throw spdz::TripleExhausted(
                "TripleExhausted: node " + std::to_string(id) + " executed " +
                std::to_string(exec + 1) + " times, provisioned for " +
                std::to_string(r.max_execs) + " (raise --loop-iters at preprocessing)");
        size_t offset = r.base + size_t(exec) * r.stride + already_used;
        scalar_used.fetch_add(lanes);
        return store->take_range(offset, lanes);
    }

    // Beaver multiply, asynchronous: sends the masked opening now, finishes
    // in the open continuation.
    void exec_mul_private(NodeId id, const RtValue& a, const RtValue& b, size_t lanes,
                          uint64_t exec, int worker) {
        auto as = bcast_share(a.sh, lanes), bs = bcast_share(b.sh, lanes);
        auto t = std::make_shared<spdz::TripleShares>(take_scalar_triples(id, exec, lanes, 0));
        std::vector<uint32_t> d, e;
        registry.select(lanes).mul_mask(as, bs, *t, d, e);
        auto de_macs = std::make_shared<std::vector<uint32_t>>(2 * lanes);
        for (size_t i = 0; i < lanes; ++i) {
            (*de_macs)[i] = fp::sub(as.macs[i], t->a.macs[i]);
            (*de_macs)[lanes + i] = fp::sub(bs.macs[i], t->b.macs[i]);
        }
        std::vector<uint32_t> payload(2 * lanes);
        std::copy(d.begin(), d.end(), payload.begin());
        std::copy(e.begin(), e.end(), payload.begin() + lanes);
        uint64_t batch = make_batch(id, exec, 0);
        auto self = shared_from_this();
        session->async_open(batch, std::move(payload),
                            [self, id, lanes, t, de_macs, batch, worker](
                                std::vector<uint32_t> opened) {
                                try {
                                    self->log_open(batch, opened, *de_macs);
                                    std::vector<uint32_t> od(opened.begin(),
                                                             opened.begin() + lanes);
                                    std::vector<uint32_t> oe(opened.begin() + lanes,
                                                             opened.end());
                                    RtValue out;
                                    out.is_public = false;
                                    out.sh = self->registry.select(lanes).mul_combine(
                                        *t, od, oe, self->party(), self->alpha());
                                    self->vals[id] = std::move(out);
                                    self->sched_->mark_complete(id, worker);
                                } catch (...) {
                                    self->fail(std::current_exception());
                                }
                            });
    }

    // Pairwise log-depth product tree; blocking (pumps the session).
    ShareVec reduce_mul_private(NodeId id, ShareVec cur, uint64_t exec) {
        size_t used = 0;
        uint64_t sub = 1;
        while (cur.lanes() > 1) {
            size_t pairs = cur.lanes() / 2;
            ShareVec xs, ys;
            xs.resize(pairs);
            ys.resize(pairs);
            for (size_t i = 0; i < pairs; ++i) {
                xs.vals[i] = cur.vals[2 * i];
                xs.macs[i] = cur.macs[2 * i];
                ys.vals[i] = cur.vals[2 * i + 1];
                ys.macs[i] = cur.macs[2 * i + 1];
            }
            auto t = take_scalar_triples(id, exec, pairs, used);
            used += pairs;
            std::vector<uint32_t> d, e;
            registry.select(pairs).mul_mask(xs, ys, t, d, e);
            std::vector<uint32_t> de_macs(2 * pairs);
            for (size_t i = 0; i < pairs; ++i) {
                de_macs[i] = fp::sub(xs.macs[i], t.a.macs[i]);
                de_macs[pairs + i] = fp::sub(ys.macs[i], t.b.macs[i]);
            }
            std::vector<uint32_t> payload(2 * pairs);
            std::copy(d.begin(), d.end(), payload.begin());
            std::copy(e.begin(), e.end(), payload.begin() + pairs);
            uint64_t batch = make_batch(id, exec, sub++);
            auto opened = session->open(batch, std::move(payload));
            log_open(batch, opened, de_macs);
            std::vector<uint32_t> od(opened.begin(), opened.begin() + pairs);
            std::vector<uint32_t> oe(opened.begin() + pairs, opened.end());
            ShareVec prod = registry.select(pairs).mul_combine(t, od, oe, party(), alpha());
            if (cur.lanes() % 2) {  // odd element passes through to the next round
                prod.vals.push_back(cur.vals.back());
                prod.macs.push_back(cur.macs.back());
            }
            cur = std::move(prod);
        }
        return cur;
    }

    RtValue exec_linear(const circuit::Node& n, uint64_t exec) {
        const RtValue& x = vals[n.operands[0]];
        const RtValue& w = vals[n.operands[1]];
        const RtValue& b = vals[n.operands[2]];
        const uint32_t din = n.din, dout = n.dout;
        RtValue out;
        if (x.is_public && w.is_public) {
            std::vector<uint32_t> y(dout);
            for (uint32_t r = 0; r < dout; ++r) {
                uint64_t acc = 0;
                for (uint32_t c = 0; c < din; ++c) {
                    acc += uint64_t(fp::mul(w.pub[size_t(r) * din + c], x.pub[c]));
                    if (acc >= (1ull << 60)) acc %= kPrime;
                }
                y[r] = uint32_t(acc % kPrime);
            }
            RtValue yv;
            yv.pub = std::move(y);
            return exec_add(yv, b, dout, false);
        }
        if (x.is_public != w.is_public) {
            // one factor public: the product is a local linear combination
            const RtValue& priv = x.is_public ? w : x;
            ShareVec y;
            y.resize(dout);
            for (uint32_t r = 0; r < dout; ++r) {
                uint64_t v = 0, m = 0;
                for (uint32_t c = 0; c < din; ++c) {
                    uint32_t wc = w.is_public ? w.pub[size_t(r) * din + c]
                                              : priv.sh.vals[size_t(r) * din + c];
                    uint32_t wm = w.is_public ? 0 : priv.sh.macs[size_t(r) * din + c];
                    uint32_t xc = x.is_public ? x.pub[c] : x.sh.vals[c];
                    uint32_t xm = x.is_public ? x.sh.macs.empty() ? 0 : x.sh.macs[c]
                                              : x.sh.macs[c];
                    if (w.is_public) {
                        v += uint64_t(fp::mul(wc, xc));
                        m += uint64_t(fp::mul(wc, xm));
                    } else {
                        v += uint64_t(fp::mul(wc, xc));
                        m += uint64_t(fp::mul(wm, xc));
                    }
                    if (v >= (1ull << 60)) v %= kPrime;
                    if (m >= (1ull << 60)) m %= kPrime;
                }
                y.vals[r] = uint32_t(v % kPrime);
                y.macs[r] = uint32_t(m % kPrime);
            }
            RtValue yv;
            yv.is_public = false;
            yv.sh = std::move(y);
            return exec_add(yv, b, dout, false);
        }
        // both private: tiled matrix triples
        auto mit = layout.matrix.find(n.id);
        if (mit == layout.matrix.end())
            throw spdz::TripleExhausted("TripleExhausted: no matrix region for node " +
                                        std::to_string(n.id));
        const auto& region = mit->second;
        if (exec >= region.max_execs)
            throw spdz::TripleExhausted("TripleExhausted: linear layer executed more often than "
                                        "provisioned (raise --loop-iters)");
        ShareVec bs = b.is_public ? spdz::share_of_public(bcast(b.pub, dout), party(), alpha())
                                  : bcast_share(b.sh, dout);
        auto provider = [&](size_t tile_idx, uint32_t pdin, uint32_t rows) {
            matrix_used.fetch_add(1);
            return store->take_matrix_at(region.base + size_t(exec) * region.stride + tile_idx,
                                         pdin, rows);
        };
        auto logger = [this](uint64_t batch, const std::vector<uint32_t>& opened,
                             const std::vector<uint32_t>& macs) { log_open(batch, opened, macs); };
        out.is_public = false;
        out.sh = linear::run_linear_layer(din, dout, x.sh, w.sh, bs, opts.slice, provider,
                                          *session, make_batch(n.id, exec, 0), party(), alpha(),
                                          logger);
        return out;
    }

    void execute(const sched::IssuedNode& in, int worker) {
        const circuit::Node& n = g.node(in.id);
        uint64_t exec = exec_count[in.id].fetch_add(1);
        switch (n.kind) {
            case NodeKind::Adder:
            case NodeKind::AddBatch:
                vals[in.id] = exec_add(vals[n.operands[0]], vals[n.operands[1]], n.lanes, false);
                break;
            case NodeKind::Subtract:
            case NodeKind::SubBatch:
                vals[in.id] = exec_add(vals[n.operands[0]], vals[n.operands[1]], n.lanes, true);
                break;
            case NodeKind::Multiplier:
            case NodeKind::MultBatch: {
                const RtValue& a = vals[n.operands[0]];
                const RtValue& b = vals[n.operands[1]];
                if (!a.is_public && !b.is_public) {
                    exec_mul_private(in.id, a, b, n.lanes, exec, worker);
                    return;  // completion arrives from the open continuation
                }
                vals[in.id] = exec_mul_local(a, b, n.lanes);
                break;
            }
            case NodeKind::ReduceAdd: {
                const RtValue& a = vals[n.operands[0]];
                RtValue out;
                if (a.is_public) {
                    uint32_t acc = 0;
                    for (uint32_t v : a.pub) acc = fp::add(acc, v);
                    out.pub = {acc};
                } else {
                    out.is_public = false;
                    out.sh = registry.select(a.sh.lanes()).reduce_add(a.sh);
                }
                vals[in.id] = std::move(out);
                break;
            }
            case NodeKind::ReduceMul: {
                const RtValue& a = vals[n.operands[0]];
                RtValue out;
                if (a.is_public) {
                    uint32_t acc = 1;
                    for (uint32_t v : a.pub) acc = fp::mul(acc, v);
                    out.pub = {acc};
                } else {
                    out.is_public = false;
                    out.sh = reduce_mul_private(in.id, a.sh, exec);
                }
                vals[in.id] = std::move(out);
                break;
            }
            case NodeKind::CmpPublic: {
                uint32_t a = read_public(n.operands[0]);
                uint32_t b = read_public(n.operands[1]);
                RtValue out;
                out.pub = {cmp_eval(n.pred, a, b) ? 1u : 0u};
                vals[in.id] = std::move(out);
                break;
            }
            case NodeKind::Load: {
                const RtValue& base = vals[n.operands[0]];
                uint32_t start = read_public(n.operands[1]);
                RtValue out;
                if (base.is_public) {
                    if (size_t(start) + n.lanes > base.pub.size())
                        throw std::runtime_error("runtime: load out of bounds");
                    out.pub.assign(base.pub.begin() + start, base.pub.begin() + start + n.lanes);
                } else {
                    if (size_t(start) + n.lanes > base.sh.lanes())
                        throw std::runtime_error("runtime: load out of bounds");
                    out.is_public = false;
                    out.sh.vals.assign(base.sh.vals.begin() + start,
                                       base.sh.vals.begin() + start + n.lanes);
                    out.sh.macs.assign(base.sh.macs.begin() + start,
                                       base.sh.macs.begin() + start + n.lanes);
                }
                vals[in.id] = std::move(out);
                break;
            }
            case NodeKind::LinearLayer:
                vals[in.id] = exec_linear(n, exec);
                break;
            case NodeKind::Root:
                vals[in.id] = vals[n.operands[0]];
                break;
            default:
                throw std::runtime_error(std::string("runtime: unexpected node kind ") +
                                         circuit::kind_name(n.kind));
        }
        sched_->mark_complete(in.id, worker);
    }

    void worker_main(int w) {
        try {
            while (!abort_flag && !sched_->finished()) {
                auto nd = sched_->next_ready_node(w);
                if (nd) {
                    execute(*nd, w);
                } else {
                    session->pump(std::chrono::milliseconds(1));
                }
            }
        } catch (...) {
            fail(std::current_exception());
        }
    }

    void mac_check() {
        std::vector<spdz::OpenRecord> records;
        {
            std::lock_guard lk(log_mu);
            records = mac_log;
        }
        const int n = session->parties();
        std::mt19937_64 rng(std::random_device{}());

        uint64_t nonce = rng();
        uint64_t commit = fnv1a64(&nonce, sizeof nonce);
        auto commits = session->exchange(net::MsgType::Commit, kMacBatchBase,
                                         {uint32_t(commit), uint32_t(commit >> 32)});
        auto nonces = session->exchange(net::MsgType::Reveal, kMacBatchBase + 1,
                                        {uint32_t(nonce), uint32_t(nonce >> 32)});
        uint64_t coin = 0;
        for (int i = 0; i < n; ++i) {
            uint64_t ni = u64_of(nonces[i], 0);
            if (fnv1a64(&ni, sizeof ni) != u64_of(commits[i], 0))
                throw spdz::MacCheckFailed("MacCheckFailed: coin commitment mismatch from party " +
                                           std::to_string(i));
            coin = fnv1a64(&ni, sizeof ni, coin);
        }

        uint32_t sigma = spdz::mac_sigma(records, coin, alpha());
        uint64_t nonce2 = rng();
        uint64_t scommit = spdz::commit_sigma(sigma, nonce2);
        auto scommits = session->exchange(net::MsgType::Commit, kMacBatchBase + 2,
                                          {uint32_t(scommit), uint32_t(scommit >> 32)});
        auto reveals = session->exchange(net::MsgType::Reveal, kMacBatchBase + 3,
                                         {sigma, uint32_t(nonce2), uint32_t(nonce2 >> 32)});
        std::vector<uint32_t> sigmas(n);
        std::vector<uint64_t> nonces2(n), commitments(n);
        for (int i = 0; i < n; ++i) {
            sigmas[i] = reveals[i][0];
            nonces2[i] = u64_of(reveals[i], 1);
            commitments[i] = u64_of(scommits[i], 0);
        }
        spdz::verify_sigmas(sigmas, nonces2, commitments);
    }

    RunReport run(const preproc::Inputs& inputs) {
        auto t0 = std::chrono::steady_clock::now();
        // input sharing
        auto shares = preproc::share_inputs(g, *store, inputs, *session, kInputBatchBase);
        for (auto& d : g.inputs) {
            RtValue v;
            if (d.is_private) {
                v.is_public = false;
                v.sh = std::move(shares.at(d.name));
            } else {
                auto it = inputs.find(d.name);
                if (it == inputs.end())
                    throw preproc::ShapeMismatch("ShapeMismatch: missing public input '" +
                                                 d.name + "'");
                v.pub.reserve(it->second.size());
                for (uint32_t x : it->second) v.pub.push_back(fp::reduce(x));
            }
            vals[d.node] = std::move(v);
        }
        for (auto& n : g.nodes) {
            if (n.kind != NodeKind::Const) continue;
            RtValue v;
            for (uint64_t c : n.cvals) v.pub.push_back(uint32_t(c % kPrime));
            vals[n.id] = std::move(v);
        }

        auto t_setup = std::chrono::steady_clock::now();

        auto self = shared_from_this();
        sched_ = std::make_unique<sched::Scheduler>(
            g, [self](NodeId id) { return self->read_public(id); },
            [self](NodeId phi, NodeId chosen) { self->vals[phi] = self->vals[chosen]; },
            opts.trace ? &trace_log : nullptr);
        sched_->start();

        std::vector<std::thread> pool;
        for (int w = 1; w < opts.threads; ++w) pool.emplace_back([this, w] { worker_main(w); });
        worker_main(0);
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
        if (!sched_->finished())
            throw std::runtime_error("runtime: scheduler stalled before completing the root");

        // open outputs, then settle the deferred MAC check
        RunReport rep;
        const RtValue& rv = vals[g.root];
        if (rv.is_public) {
            rep.outputs = rv.pub;
        } else {
            uint64_t batch = make_batch(g.root, 1, 1);
            rep.outputs = session->open(batch, rv.sh.vals);
            log_open(batch, rep.outputs, rv.sh.macs);
        }
        mac_check();

        auto t1 = std::chrono::steady_clock::now();
        rep.setup_ms = std::chrono::duration<double, std::milli>(t_setup - t0).count();
        rep.online_ms = std::chrono::duration<double, std::milli>(t1 - t_setup).count();
        rep.bytes_sent = session->bytes_sent();
        rep.bytes_received = session->bytes_received();
        rep.scalar_triples_consumed = scalar_used.load();
        rep.matrix_triples_consumed = matrix_used.load();
        rep.workers = opts.threads;
        rep.slice = opts.slice;
        rep.parties = session->parties();
        rep.output_digest =
            fnv1a64(rep.outputs.data(), rep.outputs.size() * sizeof(uint32_t));
        if (opts.trace) rep.trace_events = trace_log.snapshot();
        return rep;
    }
};

PartyRuntime::PartyRuntime(const circuit::CircuitGraph& g, std::shared_ptr<spdz::TripleStore> store,
                           std::shared_ptr<net::Session> session, RunOptions opts)
    : impl_(std::make_shared<Impl>(g, std::move(store), std::move(session), opts)) {}

RunReport PartyRuntime::run(const preproc::Inputs& inputs) { return impl_->run(inputs); }

std::vector<RunReport> run_local(const circuit::CircuitGraph& g, int n_parties,
                                 const preproc::Inputs& inputs, RunOptions opts,
                                 uint64_t dealer_seed, net::FaultPlan faults,
                                 uint64_t loop_iters_hint) {
    auto demand = preproc::compute_triple_demand(g, opts.slice, loop_iters_hint);
    spdz::Dealer dealer(n_parties, dealer_seed);
    auto stores = spdz::make_dealer_stores(dealer, demand.scalars, demand.matrix_shapes,
                                           demand.input_masks, loop_iters_hint);
    auto sessions = net::make_sim_sessions(n_parties, std::move(faults));

    std::vector<RunReport> reports(n_parties);
    std::vector<std::exception_ptr> errors(n_parties);
    std::vector<std::thread> threads;
    for (int i = 0; i < n_parties; ++i) {
        threads.emplace_back([&, i] {
            try {
                PartyRuntime rt(g, stores[i], sessions[i], opts);
                reports[i] = rt.run(inputs);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return reports;
}

} // namespace mpc::runtime
