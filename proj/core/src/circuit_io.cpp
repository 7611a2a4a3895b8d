#include "mpc/circuit_io.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace mpc::circuit {

namespace {

constexpr uint32_t kFormatVersion = 1;
constexpr char kMagic[4] = {'M', 'P', 'C', 'G'};

struct Writer {
    std::vector<uint8_t> buf;
    void u8(uint8_t v) { buf.push_back(v); }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(uint8_t(v >> (8 * i)));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(uint8_t(v >> (8 * i)));
    }
    void str(const std::string& s) {
        u32(uint32_t(s.size()));
        buf.insert(buf.end(), s.begin(), s.end());
    }
    void ids(const std::vector<NodeId>& v) {
        u32(uint32_t(v.size()));
        for (NodeId x : v) u32(x);
    }
};

struct Reader {
    const std::vector<uint8_t>& buf;
    size_t pos = 0;
    void need(size_t n) const {
        if (pos + n > buf.size()) throw CorruptPayload("CorruptPayload: truncated circuit file");
    }
    uint8_t u8() {
        need(1);
        return buf[pos++];
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(buf[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(buf[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    std::string str() {
        uint32_t n = u32();
        need(n);
        std::string s(buf.begin() + pos, buf.begin() + pos + n);
        pos += n;
        return s;
    }
    std::vector<NodeId> ids() {
        uint32_t n = u32();
        std::vector<NodeId> v(n);
        for (auto& x : v) x = u32();
        return v;
    }
};

} // namespace

std::vector<uint8_t> serialize_circuit(const CircuitGraph& g) {
    Writer w;
    w.buf.insert(w.buf.end(), kMagic, kMagic + 4);
    w.u32(kFormatVersion);
    w.u64(kPrime);
    w.u64(g.nodes.size());
    for (auto& n : g.nodes) {
        w.u32(n.id);
        w.u8(uint8_t(n.kind));
        w.u8(uint8_t((n.is_private ? 1 : 0) | (n.is_bit ? 2 : 0)));
        w.u32(n.lanes);
        w.u32(n.block);
        w.u32(n.next);
        w.ids(n.operands);
        w.u32(uint32_t(n.cvals.size()));
        for (uint64_t v : n.cvals) w.u64(v);
        w.u8(uint8_t(n.pred));
        w.ids(n.phi_labels);
        w.ids(n.successors);
        w.u32(n.din);
        w.u32(n.dout);
        w.str(n.name);
    }
    w.ids(g.labels);
    w.u32(uint32_t(g.loops.size()));
    for (auto& [h, li] : g.loops) {
        w.u32(h);
        std::vector<NodeId> m(li.members.begin(), li.members.end());
        w.ids(m);
        w.ids(li.exits);
    }
    w.u32(uint32_t(g.inputs.size()));
    for (auto& d : g.inputs) {
        w.str(d.name);
        w.u8(uint8_t((d.is_private ? 1 : 0) | (d.is_pointer ? 2 : 0)));
        w.u64(d.count);
        w.u32(d.node);
    }
    w.u32(g.root);
    w.u32(g.entry_label);
    return std::move(w.buf);
}

CircuitGraph deserialize_circuit(const std::vector<uint8_t>& bytes) {
    Reader r{bytes};
    r.need(4);
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw VersionMismatch("VersionMismatch: bad magic, not a circuit file");
    r.pos = 4;
    uint32_t ver = r.u32();
    if (ver != kFormatVersion)
        throw VersionMismatch("VersionMismatch: circuit format version " + std::to_string(ver));
    uint64_t prime = r.u64();
    if (prime != kPrime)
        throw VersionMismatch("VersionMismatch: circuit built for a different prime");
    CircuitGraph g;
    uint64_t count = r.u64();
    g.nodes.resize(count);
    for (uint64_t i = 0; i < count; ++i) {
        Node& n = g.nodes[i];
        n.id = r.u32();
        n.kind = NodeKind(r.u8());
        uint8_t fl = r.u8();
        n.is_private = fl & 1;
        n.is_bit = fl & 2;
        n.lanes = r.u32();
        n.block = r.u32();
        n.next = r.u32();
        n.operands = r.ids();
        uint32_t cn = r.u32();
        n.cvals.resize(cn);
        for (auto& v : n.cvals) v = r.u64();
        n.pred = ir::CmpPred(r.u8());
        n.phi_labels = r.ids();
        n.successors = r.ids();
        n.din = r.u32();
        n.dout = r.u32();
        n.name = r.str();
        if (n.id != i) throw CorruptPayload("CorruptPayload: non-contiguous node ids");
        if (n.kind == NodeKind::Const) g.const_pool.emplace(n.cvals.empty() ? 0 : n.cvals[0], n.id);
    }
    g.labels = r.ids();
    uint32_t ln = r.u32();
    for (uint32_t i = 0; i < ln; ++i) {
        LoopInfo li;
        li.header = r.u32();
        auto m = r.ids();
        li.members.insert(m.begin(), m.end());
        li.exits = r.ids();
        g.loops[li.header] = std::move(li);
    }
    uint32_t in = r.u32();
    for (uint32_t i = 0; i < in; ++i) {
        InputDesc d;
        d.name = r.str();
        uint8_t fl = r.u8();
        d.is_private = fl & 1;
        d.is_pointer = fl & 2;
        d.count = r.u64();
        d.node = r.u32();
        g.inputs.push_back(std::move(d));
    }
    g.root = r.u32();
    g.entry_label = r.u32();
    if (r.pos != bytes.size()) throw CorruptPayload("CorruptPayload: trailing bytes");
    for (auto& n : g.nodes)
        for (NodeId op : n.operands)
            if (op >= g.nodes.size()) throw CorruptPayload("CorruptPayload: operand id out of range");
    return g;
}

void write_circuit_file(const CircuitGraph& g, const std::string& path) {
    auto bytes = serialize_circuit(g);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    os.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

CircuitGraph read_circuit_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                               std::istreambuf_iterator<char>());
    return deserialize_circuit(bytes);
}

std::string circuit_to_json(const CircuitGraph& g) {
    nlohmann::json j;
    j["prime"] = kPrime;
    j["version"] = kFormatVersion;
    j["root"] = g.root;
    j["entry"] = g.entry_label;
    auto& nodes = j["nodes"] = nlohmann::json::array();
    for (auto& n : g.nodes) {
        nlohmann::json nj;
        nj["id"] = n.id;
        nj["kind"] = kind_name(n.kind);
        nj["lanes"] = n.lanes;
        nj["operands"] = n.operands;
        if (n.block != kNoNode) nj["block"] = n.block;
        nj["private"] = n.is_private;
        if (!n.cvals.empty()) nj["values"] = n.cvals;
        if (!n.successors.empty()) nj["successors"] = n.successors;
        if (!n.phi_labels.empty()) nj["phi_labels"] = n.phi_labels;
        if (!n.name.empty()) nj["name"] = n.name;
        if (n.kind == NodeKind::LinearLayer) {
            nj["din"] = n.din;
            nj["dout"] = n.dout;
        }
        nodes.push_back(std::move(nj));
    }
    auto& loops = j["loops"] = nlohmann::json::array();
    for (auto& [h, li] : g.loops) {
        nlohmann::json lj;
        lj["header"] = h;
        lj["members"] = std::vector<NodeId>(li.members.begin(), li.members.end());
        lj["exits"] = li.exits;
        loops.push_back(std::move(lj));
    }
    auto& ins = j["inputs"] = nlohmann::json::array();
    for (auto& d : g.inputs) {
        nlohmann::json ij;
        ij["name"] = d.name;
        ij["private"] = d.is_private;
        ij["pointer"] = d.is_pointer;
        ij["count"] = d.count;
        ij["node"] = d.node;
        ins.push_back(std::move(ij));
    }
    return j.dump(2);
}

} // namespace mpc::circuit
