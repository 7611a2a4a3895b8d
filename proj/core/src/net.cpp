#include "mpc/net.hpp"

#include <algorithm>
#include <array>
#include <cstring>

namespace mpc::net {

std::vector<uint8_t> encode_frame(const Frame& f) {
    std::vector<uint8_t> out(kFrameHeaderSize + size_t(f.lanes) * 4);
    out[0] = uint8_t(f.type);
    for (int i = 0; i < 4; ++i) out[4 + i] = uint8_t(f.lanes >> (8 * i));
    for (int i = 0; i < 8; ++i) out[8 + i] = uint8_t(f.batch_id >> (8 * i));
    for (size_t j = 0; j < f.payload.size(); ++j)
        for (int i = 0; i < 4; ++i)
            out[kFrameHeaderSize + j * 4 + i] = uint8_t(f.payload[j] >> (8 * i));
    return out;
}

Frame decode_header(const uint8_t* hdr) {
    if (hdr[0] > uint8_t(MsgType::Control))
        throw MalformedShareMessage("MalformedShareMessage: unknown msg-type " +
                                    std::to_string(hdr[0]));
    Frame f;
    f.type = MsgType(hdr[0]);
    for (int i = 0; i < 4; ++i) f.lanes |= uint32_t(hdr[4 + i]) << (8 * i);
    for (int i = 0; i < 8; ++i) f.batch_id |= uint64_t(hdr[8 + i]) << (8 * i);
    return f;
}

Frame decode_frame(const uint8_t* data, size_t len) {
    if (len < kFrameHeaderSize)
        throw MalformedShareMessage("MalformedShareMessage: short frame");
    Frame f = decode_header(data);
    if (len != kFrameHeaderSize + size_t(f.lanes) * 4)
        throw MalformedShareMessage("MalformedShareMessage: length does not match lane count");
    f.payload.resize(f.lanes);
    for (size_t j = 0; j < f.lanes; ++j) {
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(data[kFrameHeaderSize + j * 4 + i]) << (8 * i);
        f.payload[j] = v;
    }
    return f;
}

// ---- Session core ----

void Session::broadcast(MsgType t, uint64_t batch_id, const std::vector<uint32_t>& payload) {
    Frame f;
    f.type = t;
    f.lanes = uint32_t(payload.size());
    f.batch_id = batch_id;
    f.payload = payload;
    for (int p = 0; p < n_; ++p) {
        if (p == party_) continue;
        send_frame(p, f);
        account_sent(kFrameHeaderSize + payload.size() * 4);
    }
}

void Session::async_open(uint64_t batch_id, std::vector<uint32_t> own_shares,
                         std::function<void(std::vector<uint32_t>)> done) {
    if (n_ == 1) {
        done(std::move(own_shares));
        return;
    }
    broadcast(MsgType::OpenShares, batch_id, own_shares);
    std::function<void()> ready;
    {
        std::unique_lock lk(mu_);
        auto [it, fresh] = opens_.try_emplace(batch_id);
        if (!fresh)
            throw MalformedShareMessage("MalformedShareMessage: duplicate open batch-id " +
                                        std::to_string(batch_id));
        PendingOpen& po = it->second;
        po.acc = std::move(own_shares);
        po.seen.assign(n_, false);
        po.seen[party_] = true;
        po.remaining = n_ - 1;
        po.done = std::move(done);
        pending_count_.fetch_add(1);
        // replay any frames that beat us here
        auto oit = orphan_opens_.find(batch_id);
        std::vector<std::pair<int, Frame>> replay;
        if (oit != orphan_opens_.end()) {
            replay = std::move(oit->second);
            orphan_opens_.erase(oit);
        }
        lk.unlock();
        for (auto& [peer, fr] : replay) {
            if (auto cont = absorb(peer, std::move(fr))) ready = std::move(cont);
        }
    }
    if (ready) ready();
}

std::vector<uint32_t> Session::open(uint64_t batch_id, std::vector<uint32_t> own_shares) {
    std::vector<uint32_t> result;
    bool done = false;
    async_open(batch_id, std::move(own_shares), [&](std::vector<uint32_t> v) {
        result = std::move(v);
        done = true;
    });
    auto deadline = std::chrono::steady_clock::now() + io_timeout;
    while (!done) {
        if (std::chrono::steady_clock::now() > deadline)
            throw PeerTimeout("PeerTimeout: open batch " + std::to_string(batch_id));
        pump(std::chrono::milliseconds(50));
    }
    return result;
}

std::vector<std::vector<uint32_t>> Session::exchange(MsgType t, uint64_t batch_id,
                                                     const std::vector<uint32_t>& payload) {
    if (n_ == 1) return {payload};
    GatherKey key{t, batch_id};
    {
        std::unique_lock lk(mu_);
        auto [it, fresh] = gathers_.try_emplace(key);
        if (!fresh)
            throw MalformedShareMessage("MalformedShareMessage: duplicate exchange batch-id");
        PendingGather& pg = it->second;
        pg.frames.assign(n_, {});
        pg.seen.assign(n_, false);
        pg.frames[party_] = payload;
        pg.seen[party_] = true;
        pg.remaining = n_ - 1;
        auto oit = orphan_gathers_.find(key);
        std::vector<std::pair<int, Frame>> replay;
        if (oit != orphan_gathers_.end()) {
            replay = std::move(oit->second);
            orphan_gathers_.erase(oit);
        }
        lk.unlock();
        for (auto& [peer, fr] : replay) absorb(peer, std::move(fr));
    }
    broadcast(t, batch_id, payload);
    auto deadline = std::chrono::steady_clock::now() + io_timeout;
    for (;;) {
        {
            std::lock_guard lk(mu_);
            auto it = gathers_.find(key);
            if (it != gathers_.end() && it->second.remaining == 0) {
                auto frames = std::move(it->second.frames);
                gathers_.erase(it);
                return frames;
            }
        }
        if (std::chrono::steady_clock::now() > deadline)
            throw PeerTimeout("PeerTimeout: exchange batch " + std::to_string(batch_id));
        pump(std::chrono::milliseconds(50));
    }
}

bool Session::has_pending() const { return pending_count_.load() > 0; }

void Session::deliver(int peer, Frame f) {
    {
        std::lock_guard lk(mu_);
        inbox_.emplace_back(peer, std::move(f));
    }
    cv_.notify_all();
}

bool Session::wait_inbox(std::chrono::milliseconds timeout) {
    std::unique_lock lk(mu_);
    return cv_.wait_for(lk, timeout, [&] { return !inbox_.empty(); });
}

std::function<void()> Session::absorb(int peer, Frame f) {
    account_received(kFrameHeaderSize + f.payload.size() * 4);
    std::unique_lock lk(mu_);
    if (f.type == MsgType::OpenShares) {
        auto it = opens_.find(f.batch_id);
        if (it == opens_.end()) {
            orphan_opens_[f.batch_id].emplace_back(peer, std::move(f));
            return {};
        }
        PendingOpen& po = it->second;
        if (f.payload.size() != po.acc.size())
            throw LaneCountMismatch("LaneCountMismatch: peer " + std::to_string(peer) + " sent " +
                                    std::to_string(f.payload.size()) + " lanes, expected " +
                                    std::to_string(po.acc.size()));
        if (po.seen[peer])
            throw MalformedShareMessage("MalformedShareMessage: duplicate frame from peer " +
                                        std::to_string(peer));
        po.seen[peer] = true;
        for (size_t i = 0; i < po.acc.size(); ++i)
            po.acc[i] = fp::add(po.acc[i], fp::reduce(f.payload[i]));
        if (--po.remaining == 0) {
            auto done = std::move(po.done);
            auto acc = std::move(po.acc);
            opens_.erase(it);
            pending_count_.fetch_sub(1);
            return [done = std::move(done), acc = std::move(acc)]() mutable {
                done(std::move(acc));
            };
        }
        return {};
    }
    GatherKey key{f.type, f.batch_id};
    auto it = gathers_.find(key);
    if (it == gathers_.end()) {
        orphan_gathers_[key].emplace_back(peer, std::move(f));
        return {};
    }
    PendingGather& pg = it->second;
    if (pg.seen[peer])
        throw MalformedShareMessage("MalformedShareMessage: duplicate frame from peer " +
                                    std::to_string(peer));
    pg.seen[peer] = true;
    pg.frames[peer] = std::move(f.payload);
    --pg.remaining;
    return {};
}

bool Session::pump(std::chrono::milliseconds timeout) {
    bool progressed = false;
    for (;;) {
        std::pair<int, Frame> item;
        {
            std::lock_guard lk(mu_);
            if (inbox_.empty()) break;
            item = std::move(inbox_.front());
            inbox_.pop_front();
        }
        if (auto cont = absorb(item.first, std::move(item.second))) cont();
        progressed = true;
    }
    if (progressed) return true;
    if (!wait_inbox(timeout)) return false;
    return pump(std::chrono::milliseconds(0));
}

// ---- simulated transport ----

class SimHub {
public:
    SimHub(int n, FaultPlan plan) : plan_(std::move(plan)), seen_(n) {}

    void route(int from, int to, Frame f, Session& dst) {
        std::vector<Frame> release;
        {
            std::lock_guard lk(mu_);
            uint64_t ord = seen_[to][uint8_t(f.type)]++;
            for (auto& fault : plan_.faults) {
                if (fault.receiver != to || fault.type != f.type ||
                    fault.frame_ordinal != ord)
                    continue;
                switch (fault.kind) {
                    case Fault::Kind::BitFlip:
                        if (!f.payload.empty())
                            f.payload[(fault.bit / 32) % f.payload.size()] ^=
                                1u << (fault.bit % 32);
                        break;
                    case Fault::Kind::Drop:
                        return;
                    case Fault::Kind::Delay: {
                        held_[to].push_back({std::move(f), ord + fault.delay_frames});
                        goto drain;
                    }
                }
            }
            release.push_back(std::move(f));
        drain:
            auto& held = held_[to];
            uint64_t now = seen_[to][uint8_t(MsgType::OpenShares)];
            for (auto it = held.begin(); it != held.end();) {
                if (it->release_at <= now) {
                    release.push_back(std::move(it->frame));
                    it = held.erase(it);
                } else {
                    ++it;
                }
            }
        }
        for (auto& fr : release) dst.deliver(from, std::move(fr));
    }

private:
    struct Held {
        Frame frame;
        uint64_t release_at;
    };
    std::mutex mu_;
    FaultPlan plan_;
    // per-receiver frame counts by msg type
    std::vector<std::array<uint64_t, 5>> seen_;
    std::map<int, std::vector<Held>> held_;
};

namespace {

class SimSession : public Session {
public:
    SimSession(int party, int n, std::shared_ptr<SimHub> hub) : Session(party, n), hub_(hub) {}

    void connect_peers(std::vector<std::weak_ptr<SimSession>> peers) { peers_ = std::move(peers); }

protected:
    void send_frame(int peer, const Frame& f) override {
        auto dst = peers_[peer].lock();
        if (!dst) throw PeerTimeout("PeerTimeout: peer " + std::to_string(peer) + " gone");
        hub_->route(party_, peer, f, *dst);
    }

private:
    std::shared_ptr<SimHub> hub_;
    std::vector<std::weak_ptr<SimSession>> peers_;
};

} // namespace

std::vector<std::shared_ptr<Session>> make_sim_sessions(int n, FaultPlan plan) {
    auto hub = std::make_shared<SimHub>(n, std::move(plan));
    std::vector<std::shared_ptr<SimSession>> sims;
    for (int i = 0; i < n; ++i) sims.push_back(std::make_shared<SimSession>(i, n, hub));
    std::vector<std::weak_ptr<SimSession>> weak(sims.begin(), sims.end());
    for (auto& s : sims) s->connect_peers(weak);
    return {sims.begin(), sims.end()};
}

} // namespace mpc::net
