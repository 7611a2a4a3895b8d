#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "mpc/field.hpp"

namespace mpc::net {

struct NetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConnectTimeout : NetError {
    using NetError::NetError;
};
struct PeerTimeout : NetError {
    using NetError::NetError;
};
struct IndexCollision : NetError {
    using NetError::NetError;
};
struct LaneCountMismatch : NetError {
    using NetError::NetError;
};
struct MalformedShareMessage : NetError {
    using NetError::NetError;
};

enum class MsgType : uint8_t { OpenShares = 0, Commit = 1, Reveal = 2, Nonce = 3, Control = 4 };

// 16-byte header {msg-type u8, pad[3], lane-count u32, batch-id u64} followed
// by lane-count u32 little-endian payload words.
struct Frame {
    MsgType type = MsgType::OpenShares;
    uint32_t lanes = 0;
    uint64_t batch_id = 0;
    std::vector<uint32_t> payload;
};

inline constexpr size_t kFrameHeaderSize = 16;

std::vector<uint8_t> encode_frame(const Frame& f);
// Header-only decode; callers append payload words separately.
Frame decode_header(const uint8_t* hdr);
Frame decode_frame(const uint8_t* data, size_t len);

// Transport-independent session core. A concrete transport implements
// send_bytes/pump_inbox; the core provides frame matching: asynchronous
// batched openings (send-at-issue, continuation on completion) and blocking
// all-to-all exchanges for the MAC-check rounds. Thread-safe.
class Session {
public:
    Session(int party, int n) : party_(party), n_(n) {}
    virtual ~Session() = default;

    int party() const { return party_; }
    int parties() const { return n_; }

    uint64_t bytes_sent() const { return bytes_sent_; }
    uint64_t bytes_received() const { return bytes_received_; }

    std::chrono::milliseconds io_timeout{5000};

    // Sends this party's shares to every peer immediately and registers a
    // continuation invoked (from the pumping thread) with the element-wise
    // sum of all n contributions once every peer's frame for `batch_id` has
    // arrived. With n == 1 the continuation runs inline.
    void async_open(uint64_t batch_id, std::vector<uint32_t> own_shares,
                    std::function<void(std::vector<uint32_t>)> done);

    // Convenience wrapper: async_open + pump until complete.
    std::vector<uint32_t> open(uint64_t batch_id, std::vector<uint32_t> own_shares);

    // Sends `payload` as msg-type `t` to every peer and blocks until one
    // frame of the same (type, batch-id) arrives from each; out[i] is party
    // i's payload (own contribution included).
    std::vector<std::vector<uint32_t>> exchange(MsgType t, uint64_t batch_id,
                                                const std::vector<uint32_t>& payload);

    // Drains inbound frames; blocks up to `timeout` when idle. Returns false
    // on timeout with no progress.
    bool pump(std::chrono::milliseconds timeout);

    // True while any async open is outstanding.
    bool has_pending() const;

    // Transport delivery entry point.
    void deliver(int peer, Frame f);

protected:
    virtual void send_frame(int peer, const Frame& f) = 0;
    // Blocks until deliver() was called or timeout; transports using
    // background reader threads can rely on the default cv wait.
    virtual bool wait_inbox(std::chrono::milliseconds timeout);

    void account_sent(size_t bytes) { bytes_sent_ += bytes; }
    void account_received(size_t bytes) { bytes_received_ += bytes; }

    int party_, n_;

private:
    struct PendingOpen {
        std::vector<uint32_t> acc;
        std::vector<bool> seen;
        int remaining = 0;
        std::function<void(std::vector<uint32_t>)> done;
    };
    struct GatherKey {
        MsgType type;
        uint64_t batch_id;
        bool operator<(const GatherKey& o) const {
            return type != o.type ? type < o.type : batch_id < o.batch_id;
        }
    };
    struct PendingGather {
        std::vector<std::vector<uint32_t>> frames;
        std::vector<bool> seen;
        int remaining = 0;
    };

    void broadcast(MsgType t, uint64_t batch_id, const std::vector<uint32_t>& payload);
    // Applies one inbound frame under lock; returns a continuation to run
    // unlocked, if the frame completed an open.
    std::function<void()> absorb(int peer, Frame f);

    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::pair<int, Frame>> inbox_;
    std::map<uint64_t, PendingOpen> opens_;
    std::map<GatherKey, PendingGather> gathers_;
    // frames that arrived before their open/gather was registered
    std::map<uint64_t, std::vector<std::pair<int, Frame>>> orphan_opens_;
    std::map<GatherKey, std::vector<std::pair<int, Frame>>> orphan_gathers_;
    std::atomic<uint64_t> bytes_sent_{0}, bytes_received_{0};
    std::atomic<int> pending_count_{0};
};

// ---- in-process simulated transport ----

// One injected fault. `frame_ordinal` counts frames of `type` delivered to
// `receiver` (from any peer, in delivery order, starting at 0).
struct Fault {
    enum class Kind { BitFlip, Drop, Delay } kind = Kind::BitFlip;
    int receiver = -1;
    MsgType type = MsgType::OpenShares;
    uint64_t frame_ordinal = 0;
    uint32_t bit = 0;          // BitFlip: payload bit index
    uint32_t delay_frames = 0; // Delay: deliver after this many later frames
};

struct FaultPlan {
    std::vector<Fault> faults;
};

class SimHub;

// Builds n sessions wired through in-memory queues. The hub outlives the
// sessions it created.
std::vector<std::shared_ptr<Session>> make_sim_sessions(int n, FaultPlan plan = {});

// ---- TCP transport ----

struct MeshConfig {
    int party = 0;
    std::vector<std::string> endpoints;  // "host:port" per party
    std::chrono::milliseconds connect_timeout{10000};
    std::chrono::milliseconds io_timeout{10000};
};

// Full pairwise mesh: party i listens for j > i and dials j < i.
std::shared_ptr<Session> connect_mesh(const MeshConfig& cfg);

} // namespace mpc::net
