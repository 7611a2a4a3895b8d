#include "mpc/linear.hpp"

#include <atomic>

namespace mpc::linear {

TilePlan plan_tiles(uint32_t din, uint32_t dout, size_t slice) {
    if (din == 0 || dout == 0) throw SliceTooSmall("SliceTooSmall: empty layer dimensions");
    if (slice < din)
        throw SliceTooSmall("SliceTooSmall: slice " + std::to_string(slice) +
                            " holds no full row of length " + std::to_string(din));
    uint32_t rows_per_tile = uint32_t(slice / din);
    if (rows_per_tile == 0) rows_per_tile = 1;
    TilePlan plan;
    plan.din = din;
    plan.dout = dout;
    plan.slice = slice;
    for (uint32_t r = 0; r < dout; r += rows_per_tile)
        plan.tiles.push_back({r, std::min(rows_per_tile, dout - r)});
    return plan;
}

namespace {

struct TileMasks {
    std::vector<uint32_t> de_vals;  // [D rows*din | E din] value shares
    std::vector<uint32_t> de_macs;  // matching MAC shares
};

TileMasks mask_tile(const Tile& t, const spdz::ShareVec& x, const spdz::ShareVec& w_tile,
                    const spdz::MatrixTripleShares& mt) {
    const size_t cells = size_t(t.row_count) * mt.din;
    if (mt.rows != t.row_count || w_tile.lanes() != cells)
        throw spdz::TripleShapeMismatch("TripleShapeMismatch: triple " + std::to_string(mt.rows) +
                                        "x" + std::to_string(mt.din) + " for tile of " +
                                        std::to_string(t.row_count) + " rows");
    TileMasks m;
    m.de_vals.resize(cells + mt.din);
    m.de_macs.resize(cells + mt.din);
    for (size_t i = 0; i < cells; ++i) {
        m.de_vals[i] = fp::sub(w_tile.vals[i], mt.a.vals[i]);
        m.de_macs[i] = fp::sub(w_tile.macs[i], mt.a.macs[i]);
    }
    for (size_t i = 0; i < mt.din; ++i) {
        m.de_vals[cells + i] = fp::sub(x.vals[i], mt.b.vals[i]);
        m.de_macs[cells + i] = fp::sub(x.macs[i], mt.b.macs[i]);
    }
    return m;
}

spdz::ShareVec combine_tile(const Tile& t, const spdz::ShareVec& b_slice,
                            const spdz::MatrixTripleShares& mt,
                            const std::vector<uint32_t>& opened, int party,
                            uint32_t alpha_share) {
    const size_t cells = size_t(t.row_count) * mt.din;
    std::vector<uint32_t> D(opened.begin(), opened.begin() + cells);
    std::vector<uint32_t> E(opened.begin() + cells, opened.end());
    spdz::ShareVec z = spdz::matrix_combine(mt, D, E, party, alpha_share);
    spdz::add_local(z, b_slice);
    return z;
}

} // namespace

spdz::ShareVec run_tile(const Tile& t, const spdz::ShareVec& x, const spdz::ShareVec& w_tile,
                        const spdz::ShareVec& b_slice, const spdz::MatrixTripleShares& mt,
                        net::Session& session, uint64_t batch_id, int party,
                        uint32_t alpha_share, const OpenLog& log) {
    TileMasks m = mask_tile(t, x, w_tile, mt);
    std::vector<uint32_t> opened = session.open(batch_id, m.de_vals);
    if (log) log(batch_id, opened, m.de_macs);
    return combine_tile(t, b_slice, mt, opened, party, alpha_share);
}

spdz::ShareVec run_linear_layer(uint32_t din, uint32_t dout, const spdz::ShareVec& x,
                                const spdz::ShareVec& w, const spdz::ShareVec& b, size_t slice,
                                const TripleProvider& triples, net::Session& session,
                                uint64_t batch_base, int party, uint32_t alpha_share,
                                const OpenLog& log) {
    TilePlan plan = plan_tiles(din, dout, slice);
    const uint32_t alpha = alpha_share;
    spdz::ShareVec out;
    out.resize(dout);
    std::atomic<size_t> pending{plan.tiles.size()};

    struct TileCtx {
        Tile tile;
        spdz::MatrixTripleShares mt;
        spdz::ShareVec w_tile, b_slice;
        std::vector<uint32_t> de_macs;
    };
    std::vector<std::shared_ptr<TileCtx>> ctxs;

    for (size_t ti = 0; ti < plan.tiles.size(); ++ti) {
        const Tile& t = plan.tiles[ti];
        auto ctx = std::make_shared<TileCtx>();
        ctx->tile = t;
        ctx->mt = triples(ti, din, t.row_count);
        const size_t base = size_t(t.row_start) * din;
        const size_t cells = size_t(t.row_count) * din;
        ctx->w_tile.vals.assign(w.vals.begin() + base, w.vals.begin() + base + cells);
        ctx->w_tile.macs.assign(w.macs.begin() + base, w.macs.begin() + base + cells);
        ctx->b_slice.vals.assign(b.vals.begin() + t.row_start,
                                 b.vals.begin() + t.row_start + t.row_count);
        ctx->b_slice.macs.assign(b.macs.begin() + t.row_start,
                                 b.macs.begin() + t.row_start + t.row_count);
        TileMasks m = mask_tile(t, x, ctx->w_tile, ctx->mt);
        ctx->de_macs = std::move(m.de_macs);
        uint64_t batch_id = batch_base + ti;
        ctxs.push_back(ctx);
        session.async_open(batch_id, std::move(m.de_vals),
                           [&, ctx, batch_id](std::vector<uint32_t> opened) {
                               if (log) log(batch_id, opened, ctx->de_macs);
                               spdz::ShareVec z = combine_tile(ctx->tile, ctx->b_slice, ctx->mt,
                                                              opened, party, alpha);
                               for (uint32_t r = 0; r < ctx->tile.row_count; ++r) {
                                   out.vals[ctx->tile.row_start + r] = z.vals[r];
                                   out.macs[ctx->tile.row_start + r] = z.macs[r];
                               }
                               pending.fetch_sub(1);
                           });
    }
    auto deadline = std::chrono::steady_clock::now() + session.io_timeout;
    while (pending.load() != 0) {
        if (std::chrono::steady_clock::now() > deadline)
            throw net::PeerTimeout("PeerTimeout: linear layer tiles incomplete");
        session.pump(std::chrono::milliseconds(20));
    }
    return out;
}

} // namespace mpc::linear
