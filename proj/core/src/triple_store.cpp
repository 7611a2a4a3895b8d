#include "mpc/triple_store.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>

namespace mpc::spdz {

namespace {
constexpr char kMagic[4] = {'M', 'P', 'C', 'T'};
constexpr uint32_t kVersion = 1;

struct Writer {
    std::ofstream os;
    explicit Writer(const std::string& path) : os(path, std::ios::binary) {
        if (!os) throw StoreFormatError("cannot open '" + path + "' for writing");
    }
    void u32(uint32_t v) {
        char b[4];
        for (int i = 0; i < 4; ++i) b[i] = char(v >> (8 * i));
        os.write(b, 4);
    }
    void u64(uint64_t v) {
        char b[8];
        for (int i = 0; i < 8; ++i) b[i] = char(v >> (8 * i));
        os.write(b, 8);
    }
    void vec(const std::vector<uint32_t>& v) {
        for (uint32_t x : v) u32(x);
    }
};

struct Reader {
    std::ifstream is;
    explicit Reader(const std::string& path) : is(path, std::ios::binary) {
        if (!is) throw StoreFormatError("cannot open '" + path + "'");
    }
    uint32_t u32() {
        char b[4];
        if (!is.read(b, 4)) throw StoreFormatError("CorruptPayload: truncated triple store");
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(uint8_t(b[i])) << (8 * i);
        return v;
    }
    uint64_t u64() {
        char b[8];
        if (!is.read(b, 8)) throw StoreFormatError("CorruptPayload: truncated triple store");
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= uint64_t(uint8_t(b[i])) << (8 * i);
        return v;
    }
    std::vector<uint32_t> vec(size_t n) {
        std::vector<uint32_t> v(n);
        for (auto& x : v) x = u32();
        return v;
    }
};

} // namespace

size_t TripleStore::scalar_remaining() const {
    size_t c = scalar_cursor_.load();
    return c >= a_vals.size() ? 0 : a_vals.size() - c;
}

size_t TripleStore::matrix_remaining() const {
    size_t c = matrix_cursor_.load();
    return c >= matrix.size() ? 0 : matrix.size() - c;
}

size_t TripleStore::masks_remaining() const {
    size_t c = mask_cursor_.load();
    return c >= masks.size() ? 0 : masks.size() - c;
}

TripleShares TripleStore::take(size_t lanes) {
    size_t start = scalar_cursor_.fetch_add(lanes);
    if (start + lanes > a_vals.size())
        throw TripleExhausted("TripleExhausted: need " + std::to_string(lanes) +
                              " scalar triples, store has " +
                              std::to_string(start >= a_vals.size() ? 0 : a_vals.size() - start));
    TripleShares t;
    auto slice = [&](const std::vector<uint32_t>& v) {
        return std::vector<uint32_t>(v.begin() + start, v.begin() + start + lanes);
    };
    t.a.vals = slice(a_vals);
    t.a.macs = slice(a_macs);
    t.b.vals = slice(b_vals);
    t.b.macs = slice(b_macs);
    t.c.vals = slice(c_vals);
    t.c.macs = slice(c_macs);
    return t;
}

MatrixTripleShares TripleStore::take_matrix(uint32_t din, uint32_t rows) {
    size_t idx = matrix_cursor_.fetch_add(1);
    if (idx >= matrix.size())
        throw TripleExhausted("TripleExhausted: matrix triple pool empty");
    const MatrixTripleShares& t = matrix[idx];
    if (t.din != din || t.rows != rows)
        throw TripleShapeMismatch("TripleShapeMismatch: store has " + std::to_string(t.rows) +
                                  "x" + std::to_string(t.din) + ", tile needs " +
                                  std::to_string(rows) + "x" + std::to_string(din));
    return t;
}

TripleShares TripleStore::take_range(size_t offset, size_t lanes) {
    {
        std::lock_guard lk(consume_mu_);
        if (offset + lanes > a_vals.size())
            throw TripleExhausted("TripleExhausted: range [" + std::to_string(offset) + ", " +
                                  std::to_string(offset + lanes) + ") beyond pool of " +
                                  std::to_string(a_vals.size()));
        if (scalar_consumed_.size() < a_vals.size()) scalar_consumed_.resize(a_vals.size(), 0);
        for (size_t i = offset; i < offset + lanes; ++i) {
            if (scalar_consumed_[i])
                throw TripleExhausted("TripleExhausted: scalar triple " + std::to_string(i) +
                                      " consumed twice");
            scalar_consumed_[i] = 1;
        }
    }
    TripleShares t;
    auto slice = [&](const std::vector<uint32_t>& v) {
        return std::vector<uint32_t>(v.begin() + offset, v.begin() + offset + lanes);
    };
    t.a.vals = slice(a_vals);
    t.a.macs = slice(a_macs);
    t.b.vals = slice(b_vals);
    t.b.macs = slice(b_macs);
    t.c.vals = slice(c_vals);
    t.c.macs = slice(c_macs);
    return t;
}

MatrixTripleShares TripleStore::take_matrix_at(size_t index, uint32_t din, uint32_t rows) {
    {
        std::lock_guard lk(consume_mu_);
        if (index >= matrix.size())
            throw TripleExhausted("TripleExhausted: matrix triple index " + std::to_string(index) +
                                  " beyond pool of " + std::to_string(matrix.size()));
        if (matrix_consumed_.size() < matrix.size()) matrix_consumed_.resize(matrix.size(), 0);
        if (matrix_consumed_[index])
            throw TripleExhausted("TripleExhausted: matrix triple " + std::to_string(index) +
                                  " consumed twice");
        matrix_consumed_[index] = 1;
    }
    const MatrixTripleShares& t = matrix[index];
    if (t.din != din || t.rows != rows)
        throw TripleShapeMismatch("TripleShapeMismatch: store has " + std::to_string(t.rows) +
                                  "x" + std::to_string(t.din) + ", tile needs " +
                                  std::to_string(rows) + "x" + std::to_string(din));
    return t;
}

std::vector<InputMask> TripleStore::take_masks(size_t count) {
    size_t start = mask_cursor_.fetch_add(count);
    if (start + count > masks.size())
        throw MaskExhausted("MaskExhausted: need " + std::to_string(count) + " input masks");
    return std::vector<InputMask>(masks.begin() + start, masks.begin() + start + count);
}

void write_store_file(const TripleStore& s, const std::string& path) {
    Writer w(path);
    w.os.write(kMagic, 4);
    w.u32(kVersion);
    w.u64(kPrime);
    w.u32(uint32_t(s.party));
    w.u32(uint32_t(s.n_parties));
    w.u32(s.alpha_share);
    w.u64(s.loop_iters);
    w.u64(s.a_vals.size());
    w.vec(s.a_vals);
    w.vec(s.a_macs);
    w.vec(s.b_vals);
    w.vec(s.b_macs);
    w.vec(s.c_vals);
    w.vec(s.c_macs);
    w.u64(s.matrix.size());
    for (auto& m : s.matrix) {
        w.u32(m.rows);
        w.u32(m.din);
        w.vec(m.a.vals);
        w.vec(m.a.macs);
        w.vec(m.b.vals);
        w.vec(m.b.macs);
        w.vec(m.c.vals);
        w.vec(m.c.macs);
    }
    w.u64(s.masks.size());
    for (auto& m : s.masks) {
        w.u32(m.val);
        w.u32(m.mac);
        w.u32(m.clear);
    }
    if (!w.os) throw StoreFormatError("write failed for '" + path + "'");
}

std::shared_ptr<TripleStore> read_store_file(const std::string& path) {
    Reader r(path);
    char magic[4];
    if (!r.is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw StoreFormatError("VersionMismatch: not a triple store file");
    uint32_t ver = r.u32();
    if (ver != kVersion)
        throw StoreFormatError("VersionMismatch: triple store version " + std::to_string(ver));
    if (r.u64() != kPrime)
        throw StoreFormatError("VersionMismatch: triple store built for a different prime");
    auto s = std::make_shared<TripleStore>();
    s->party = int(r.u32());
    s->n_parties = int(r.u32());
    s->alpha_share = r.u32();
    s->loop_iters = r.u64();
    size_t n = r.u64();
    s->a_vals = r.vec(n);
    s->a_macs = r.vec(n);
    s->b_vals = r.vec(n);
    s->b_macs = r.vec(n);
    s->c_vals = r.vec(n);
    s->c_macs = r.vec(n);
    size_t mats = r.u64();
    for (size_t i = 0; i < mats; ++i) {
        MatrixTripleShares m;
        m.rows = r.u32();
        m.din = r.u32();
        size_t cells = size_t(m.rows) * m.din;
        m.a.vals = r.vec(cells);
        m.a.macs = r.vec(cells);
        m.b.vals = r.vec(m.din);
        m.b.macs = r.vec(m.din);
        m.c.vals = r.vec(m.rows);
        m.c.macs = r.vec(m.rows);
        s->matrix.push_back(std::move(m));
    }
    size_t nm = r.u64();
    for (size_t i = 0; i < nm; ++i) {
        InputMask m;
        m.val = r.u32();
        m.mac = r.u32();
        m.clear = r.u32();
        s->masks.push_back(m);
    }
    r.is.peek();
    if (!r.is.eof()) throw StoreFormatError("CorruptPayload: trailing bytes in triple store");
    return s;
}

std::vector<std::shared_ptr<TripleStore>> make_dealer_stores(
    Dealer& dealer, size_t scalar_triples,
    const std::vector<std::pair<uint32_t, uint32_t>>& matrix_shapes, size_t input_masks,
    uint64_t loop_iters) {
    int n = dealer.parties();
    std::vector<std::shared_ptr<TripleStore>> stores;
    for (int i = 0; i < n; ++i) {
        auto s = std::make_shared<TripleStore>();
        s->party = i;
        s->n_parties = n;
        s->alpha_share = dealer.alpha_share(i);
        s->loop_iters = loop_iters;
        stores.push_back(std::move(s));
    }
    auto trips = dealer.triples(scalar_triples);
    for (int i = 0; i < n; ++i) {
        stores[i]->a_vals = std::move(trips[i].a.vals);
        stores[i]->a_macs = std::move(trips[i].a.macs);
        stores[i]->b_vals = std::move(trips[i].b.vals);
        stores[i]->b_macs = std::move(trips[i].b.macs);
        stores[i]->c_vals = std::move(trips[i].c.vals);
        stores[i]->c_macs = std::move(trips[i].c.macs);
    }
    for (auto [din, rows] : matrix_shapes) {
        auto mt = dealer.matrix_triples(din, rows);
        for (int i = 0; i < n; ++i) stores[i]->matrix.push_back(std::move(mt[i]));
    }
    for (size_t j = 0; j < input_masks; ++j) {
        std::vector<uint32_t> clear;
        auto shares = dealer.share_random(1, &clear);
        for (int i = 0; i < n; ++i) {
            InputMask m;
            m.val = shares[i].vals[0];
            m.mac = shares[i].macs[0];
            m.clear = i == 0 ? clear[0] : 0;  // party 0 opens x - r for all inputs
            stores[i]->masks.push_back(m);
        }
    }
    return stores;
}

std::vector<std::string> write_dealer_stores(
    Dealer& dealer, size_t scalar_triples,
    const std::vector<std::pair<uint32_t, uint32_t>>& matrix_shapes, size_t input_masks,
    const std::string& out_dir, uint64_t loop_iters) {
    auto stores =
        make_dealer_stores(dealer, scalar_triples, matrix_shapes, input_masks, loop_iters);
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> paths;
    for (size_t i = 0; i < stores.size(); ++i) {
        std::string p = (std::filesystem::path(out_dir) /
                         ("triples_" + std::to_string(i) + ".bin")).string();
        write_store_file(*stores[i], p);
        paths.push_back(std::move(p));
    }
    return paths;
}

} // namespace mpc::spdz
