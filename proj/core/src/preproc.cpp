#include "mpc/preproc.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace mpc::preproc {

namespace {
constexpr char kMagic[4] = {'M', 'P', 'C', 'I'};
constexpr uint32_t kVersion = 1;
} // namespace

void write_input_file(const Inputs& inputs, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    auto u32 = [&](uint32_t v) {
        char b[4];
        for (int i = 0; i < 4; ++i) b[i] = char(v >> (8 * i));
        os.write(b, 4);
    };
    auto u64 = [&](uint64_t v) {
        char b[8];
        for (int i = 0; i < 8; ++i) b[i] = char(v >> (8 * i));
        os.write(b, 8);
    };
    os.write(kMagic, 4);
    u32(kVersion);
    u32(uint32_t(inputs.size()));
    nlohmann::json sidecar;
    auto& params = sidecar["params"] = nlohmann::json::array();
    for (auto& [name, vals] : inputs) {
        u32(uint32_t(name.size()));
        os.write(name.data(), std::streamsize(name.size()));
        u64(vals.size());
        for (uint32_t v : vals) u32(v);
        params.push_back({{"name", name}, {"count", vals.size()}});
    }
    if (!os) throw std::runtime_error("write failed for '" + path + "'");
    std::ofstream js(path + ".json");
    js << sidecar.dump(2) << '\n';
}

Inputs read_input_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    auto u32 = [&] {
        char b[4];
        if (!is.read(b, 4)) throw circuit::CorruptPayload("CorruptPayload: truncated input file");
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(uint8_t(b[i])) << (8 * i);
        return v;
    };
    auto u64 = [&] {
        char b[8];
        if (!is.read(b, 8)) throw circuit::CorruptPayload("CorruptPayload: truncated input file");
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(uint8_t(b[i])) << (8 * i);
        return v;
    };
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw circuit::VersionMismatch("VersionMismatch: not an input file");
    uint32_t ver = u32();
    if (ver != kVersion)
        throw circuit::VersionMismatch("VersionMismatch: input file version " +
                                       std::to_string(ver));
    uint32_t count = u32();
    Inputs inputs;
    for (uint32_t i = 0; i < count; ++i) {
        uint32_t nl = u32();
        std::string name(nl, '\0');
        if (!is.read(name.data(), nl))
            throw circuit::CorruptPayload("CorruptPayload: truncated input file");
        uint64_t n = u64();
        std::vector<uint32_t> vals(n);
        for (auto& v : vals) v = u32();
        inputs[name] = std::move(vals);
    }
    return inputs;
}

TripleDemand compute_triple_demand(const circuit::CircuitGraph& g, size_t slice,
                                   size_t loop_iters) {
    TripleDemand d;
    for (auto& n : g.nodes) {
        size_t mult = 1;
        if (n.block != circuit::kNoNode)
            for (size_t i = g.loops_containing_block(n.block).size(); i > 0; --i)
                mult *= loop_iters;
        switch (n.kind) {
            case circuit::NodeKind::Multiplier:
            case circuit::NodeKind::MultBatch: {
                const auto& a = g.node(n.operands[0]);
                const auto& b = g.node(n.operands[1]);
                if (a.is_private && b.is_private) d.scalars += size_t(n.lanes) * mult;
                break;
            }
            case circuit::NodeKind::ReduceMul:
                if (g.node(n.operands[0]).is_private && n.lanes >= 1)
                    d.scalars += size_t(g.node(n.operands[0]).lanes - 1) * mult;
                break;
            case circuit::NodeKind::LinearLayer: {
                const auto& x = g.node(n.operands[0]);
                const auto& w = g.node(n.operands[1]);
                if (x.is_private && w.is_private) {
                    auto plan = linear::plan_tiles(n.din, n.dout, slice);
                    for (size_t rep = 0; rep < mult; ++rep)
                        for (auto& t : plan.tiles)
                            d.matrix_shapes.emplace_back(n.din, t.row_count);
                }
                break;
            }
            default:
                break;
        }
    }
    for (auto& in : g.inputs)
        if (in.is_private) d.input_masks += in.count;
    return d;
}

TripleLayout compute_triple_layout(const circuit::CircuitGraph& g, size_t slice,
                                   size_t loop_iters) {
    TripleLayout L;
    for (auto& n : g.nodes) {
        size_t mult = 1;
        if (n.block != circuit::kNoNode)
            for (size_t i = g.loops_containing_block(n.block).size(); i > 0; --i)
                mult *= loop_iters;
        switch (n.kind) {
            case circuit::NodeKind::Multiplier:
            case circuit::NodeKind::MultBatch: {
                if (g.node(n.operands[0]).is_private && g.node(n.operands[1]).is_private) {
                    L.scalar[n.id] = {L.scalar_total, n.lanes, mult};
                    L.scalar_total += size_t(n.lanes) * mult;
                }
                break;
            }
            case circuit::NodeKind::ReduceMul: {
                const auto& src = g.node(n.operands[0]);
                if (src.is_private && src.lanes >= 1) {
                    size_t stride = src.lanes - 1;
                    L.scalar[n.id] = {L.scalar_total, stride, mult};
                    L.scalar_total += stride * mult;
                }
                break;
            }
            case circuit::NodeKind::LinearLayer: {
                if (g.node(n.operands[0]).is_private && g.node(n.operands[1]).is_private) {
                    auto plan = linear::plan_tiles(n.din, n.dout, slice);
                    L.matrix[n.id] = {L.matrix_total, plan.tiles.size(), mult};
                    L.matrix_total += plan.tiles.size() * mult;
                }
                break;
            }
            default:
                break;
        }
    }
    return L;
}

RunBundle load_run_bundle(const std::string& circuit_path, const std::string& triples_path,
                          const std::string& inputs_path, size_t slice) {
    RunBundle b;
    b.graph = circuit::read_circuit_file(circuit_path);
    b.store = spdz::read_store_file(triples_path);
    b.inputs = read_input_file(inputs_path);

    for (auto& d : b.graph.inputs) {
        auto it = b.inputs.find(d.name);
        if (it == b.inputs.end())
            throw ShapeMismatch("ShapeMismatch: input file lacks parameter '" + d.name + "'");
        if (d.count != 0 && it->second.size() != d.count)
            throw ShapeMismatch("ShapeMismatch: parameter '" + d.name + "' has " +
                                std::to_string(it->second.size()) + " elements, circuit expects " +
                                std::to_string(d.count));
    }

    TripleDemand need = compute_triple_demand(b.graph, slice, b.store->loop_iters);
    if (b.store->scalar_remaining() < need.scalars)
        throw InsufficientTriples("InsufficientTriples: need " + std::to_string(need.scalars) +
                                  " scalar triples, store has " +
                                  std::to_string(b.store->scalar_remaining()) + " (deficit " +
                                  std::to_string(need.scalars - b.store->scalar_remaining()) +
                                  ")");
    if (b.store->matrix_remaining() < need.matrix_shapes.size())
        throw InsufficientTriples(
            "InsufficientTriples: need " + std::to_string(need.matrix_shapes.size()) +
            " matrix triples, store has " + std::to_string(b.store->matrix_remaining()) +
            " (deficit " +
            std::to_string(need.matrix_shapes.size() - b.store->matrix_remaining()) + ")");
    size_t mask_need = 0;
    for (auto& d : b.graph.inputs)
        if (d.is_private) mask_need += b.inputs.at(d.name).size();
    if (b.store->masks_remaining() < mask_need)
        throw InsufficientTriples("InsufficientTriples: need " + std::to_string(mask_need) +
                                  " input masks, store has " +
                                  std::to_string(b.store->masks_remaining()));
    return b;
}

std::map<std::string, spdz::ShareVec> share_inputs(const circuit::CircuitGraph& g,
                                                   spdz::TripleStore& store,
                                                   const Inputs& inputs, net::Session& session,
                                                   uint64_t batch_base) {
    std::map<std::string, spdz::ShareVec> out;
    const int party = store.party;
    uint64_t batch = batch_base;
    for (auto& d : g.inputs) {
        auto iit = inputs.find(d.name);
        if (iit == inputs.end())
            throw ShapeMismatch("ShapeMismatch: no values bound for parameter '" + d.name + "'");
        const auto& vals = iit->second;
        if (!d.is_private) {
            out[d.name] = {};
            continue;
        }
        auto masks = store.take_masks(vals.size());
        spdz::ShareVec share;
        share.resize(vals.size());
        std::vector<uint32_t> diff;
        if (party == 0) {
            diff.resize(vals.size());
            for (size_t i = 0; i < vals.size(); ++i)
                diff[i] = fp::sub(fp::reduce(vals[i]), masks[i].clear);
        }
        auto frames = session.exchange(net::MsgType::Control, batch++, diff);
        const auto& opened = frames[0];  // party 0 owns every private input
        if (opened.size() != vals.size())
            throw ShapeMismatch("ShapeMismatch: opened input difference for '" + d.name +
                                "' has wrong length");
        for (size_t i = 0; i < vals.size(); ++i) {
            share.vals[i] = masks[i].val;
            share.macs[i] = masks[i].mac;
        }
        spdz::add_public(share, opened, party, store.alpha_share);
        out[d.name] = std::move(share);
    }
    return out;
}

std::map<std::string, spdz::ShareVec> share_inputs(const RunBundle& bundle,
                                                   net::Session& session,
                                                   uint64_t batch_base) {
    return share_inputs(bundle.graph, *bundle.store, bundle.inputs, session, batch_base);
}

} // namespace mpc::preproc
