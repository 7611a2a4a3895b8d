#pragma once

#include <functional>

#include "mpc/net.hpp"
#include "mpc/triple_store.hpp"

namespace mpc::linear {

struct SliceTooSmall : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Tile {
    uint32_t row_start = 0;
    uint32_t row_count = 0;
};

struct TilePlan {
    uint32_t din = 0, dout = 0;
    size_t slice = 0;
    std::vector<Tile> tiles;
};

// Contiguous row blocks of floor(slice / din) rows each (>= 1); the last
// tile may be short.
TilePlan plan_tiles(uint32_t din, uint32_t dout, size_t slice);

// Audit hook: called once per opening with the opened public values and this
// party's MAC shares of the opened quantity, for the deferred MAC check.
using OpenLog =
    std::function<void(uint64_t batch_id, const std::vector<uint32_t>& opened,
                       const std::vector<uint32_t>& mac_shares)>;

// One tile of y = W*x + b: opens D = W_tile - A and E = x - B as a single
// batched message, then combines locally. Synchronous (pumps the session).
spdz::ShareVec run_tile(const Tile& t, const spdz::ShareVec& x, const spdz::ShareVec& w_tile,
                        const spdz::ShareVec& b_slice, const spdz::MatrixTripleShares& mt,
                        net::Session& session, uint64_t batch_id, int party,
                        uint32_t alpha_share, const OpenLog& log);

// Supplies the matrix triple for tile `tile_idx`; parties must agree on the
// mapping (deterministic per-node layout or a store cursor in tests).
using TripleProvider =
    std::function<spdz::MatrixTripleShares(size_t tile_idx, uint32_t din, uint32_t rows)>;

// Full layer: all tile openings are issued up front (send-at-issue), results
// are combined in whatever order the opens complete, and assembled by row
// range. One matrix triple per tile.
spdz::ShareVec run_linear_layer(uint32_t din, uint32_t dout, const spdz::ShareVec& x,
                                const spdz::ShareVec& w, const spdz::ShareVec& b, size_t slice,
                                const TripleProvider& triples, net::Session& session,
                                uint64_t batch_base, int party, uint32_t alpha_share,
                                const OpenLog& log);

} // namespace mpc::linear
