#include "mpc/spdz.hpp"

#include <algorithm>

#include "mpc/hash.hpp"

namespace mpc::spdz {

void add_local(ShareVec& acc, const ShareVec& x) {
    for (size_t i = 0; i < acc.vals.size(); ++i) {
        acc.vals[i] = fp::add(acc.vals[i], x.vals[i]);
        acc.macs[i] = fp::add(acc.macs[i], x.macs[i]);
    }
}

void sub_local(ShareVec& acc, const ShareVec& x) {
    for (size_t i = 0; i < acc.vals.size(); ++i) {
        acc.vals[i] = fp::sub(acc.vals[i], x.vals[i]);
        acc.macs[i] = fp::sub(acc.macs[i], x.macs[i]);
    }
}

ShareVec add(const ShareVec& x, const ShareVec& y) {
    ShareVec out = x;
    add_local(out, y);
    return out;
}

ShareVec sub(const ShareVec& x, const ShareVec& y) {
    ShareVec out = x;
    sub_local(out, y);
    return out;
}

void add_public(ShareVec& x, const std::vector<uint32_t>& k, int party, uint32_t alpha_share) {
    for (size_t i = 0; i < x.vals.size(); ++i) {
        if (party == 0) x.vals[i] = fp::add(x.vals[i], k[i]);
        x.macs[i] = fp::add(x.macs[i], fp::mul(alpha_share, k[i]));
    }
}

void sub_public(ShareVec& x, const std::vector<uint32_t>& k, int party, uint32_t alpha_share) {
    for (size_t i = 0; i < x.vals.size(); ++i) {
        if (party == 0) x.vals[i] = fp::sub(x.vals[i], k[i]);
        x.macs[i] = fp::sub(x.macs[i], fp::mul(alpha_share, k[i]));
    }
}

void rsub_public(ShareVec& x, const std::vector<uint32_t>& k, int party, uint32_t alpha_share) {
    for (size_t i = 0; i < x.vals.size(); ++i) {
        x.vals[i] = party == 0 ? fp::sub(k[i], x.vals[i]) : fp::neg(x.vals[i]);
        x.macs[i] = fp::sub(fp::mul(alpha_share, k[i]), x.macs[i]);
    }
}

void mul_public(ShareVec& x, const std::vector<uint32_t>& k) {
    for (size_t i = 0; i < x.vals.size(); ++i) {
        x.vals[i] = fp::mul(x.vals[i], k[i]);
        x.macs[i] = fp::mul(x.macs[i], k[i]);
    }
}

void mul_public_scalar(ShareVec& x, uint32_t k) {
    for (size_t i = 0; i < x.vals.size(); ++i) {
        x.vals[i] = fp::mul(x.vals[i], k);
        x.macs[i] = fp::mul(x.macs[i], k);
    }
}

ShareVec share_of_public(const std::vector<uint32_t>& k, int party, uint32_t alpha_share) {
    ShareVec out;
    out.resize(k.size());
    add_public(out, k, party, alpha_share);
    return out;
}

ShareVec beaver_combine(const TripleShares& t, const std::vector<uint32_t>& d,
                        const std::vector<uint32_t>& e, int party, uint32_t alpha_share) {
    size_t n = d.size();
    ShareVec z;
    z.resize(n);
    for (size_t i = 0; i < n; ++i) {
        uint32_t de = fp::mul(d[i], e[i]);
        uint32_t v = t.c.vals[i];
        v = fp::add(v, fp::mul(d[i], t.b.vals[i]));
        v = fp::add(v, fp::mul(e[i], t.a.vals[i]));
        if (party == 0) v = fp::add(v, de);
        uint32_t m = t.c.macs[i];
        m = fp::add(m, fp::mul(d[i], t.b.macs[i]));
        m = fp::add(m, fp::mul(e[i], t.a.macs[i]));
        m = fp::add(m, fp::mul(alpha_share, de));
        z.vals[i] = v;
        z.macs[i] = m;
    }
    return z;
}

ShareVec matrix_combine(const MatrixTripleShares& t, const std::vector<uint32_t>& D,
                        const std::vector<uint32_t>& E, int party, uint32_t alpha_share) {
    ShareVec z;
    z.resize(t.rows);
    for (uint32_t r = 0; r < t.rows; ++r) {
        uint64_t v = t.c.vals[r];
        uint64_t m = t.c.macs[r];
        uint64_t de = 0;  // row r of D * E, needed cleartext for party 0 / MAC
        const size_t base = size_t(r) * t.din;
        for (uint32_t cidx = 0; cidx < t.din; ++cidx) {
            v += uint64_t(fp::mul(D[base + cidx], t.b.vals[cidx]));
            v += uint64_t(fp::mul(t.a.vals[base + cidx], E[cidx]));
            m += uint64_t(fp::mul(D[base + cidx], t.b.macs[cidx]));
            m += uint64_t(fp::mul(t.a.macs[base + cidx], E[cidx]));
            de += uint64_t(fp::mul(D[base + cidx], E[cidx]));
            if (v >= (1ull << 60)) v %= kPrime;
            if (m >= (1ull << 60)) m %= kPrime;
            if (de >= (1ull << 60)) de %= kPrime;
        }
        uint32_t der = uint32_t(de % kPrime);
        uint32_t vr = uint32_t(v % kPrime);
        if (party == 0) vr = fp::add(vr, der);
        z.vals[r] = vr;
        z.macs[r] = fp::add(uint32_t(m % kPrime), fp::mul(alpha_share, der));
    }
    return z;
}

uint32_t mac_sigma(std::vector<OpenRecord>& records, uint64_t coin, uint32_t alpha_share) {
    std::sort(records.begin(), records.end(), [](const OpenRecord& a, const OpenRecord& b) {
        return a.batch_id != b.batch_id ? a.batch_id < b.batch_id : a.lane < b.lane;
    });
    uint64_t state = coin;
    uint32_t sigma = 0;
    for (auto& rec : records) {
        uint32_t r = fp::reduce(splitmix64(state));
        uint32_t diff = fp::sub(rec.mac_share, fp::mul(alpha_share, rec.value));
        sigma = fp::add(sigma, fp::mul(r, diff));
    }
    return sigma;
}

uint64_t commit_sigma(uint32_t sigma, uint64_t nonce) {
    uint8_t buf[12];
    for (int i = 0; i < 4; ++i) buf[i] = uint8_t(sigma >> (8 * i));
    for (int i = 0; i < 8; ++i) buf[4 + i] = uint8_t(nonce >> (8 * i));
    return fnv1a64(buf, sizeof buf);
}

void verify_sigmas(const std::vector<uint32_t>& sigmas, const std::vector<uint64_t>& nonces,
                   const std::vector<uint64_t>& commitments) {
    uint32_t total = 0;
    for (size_t i = 0; i < sigmas.size(); ++i) {
        if (commit_sigma(sigmas[i], nonces[i]) != commitments[i])
            throw MacCheckFailed("MacCheckFailed: commitment mismatch from party " +
                                 std::to_string(i));
        total = fp::add(total, sigmas[i]);
    }
    if (total != 0)
        throw MacCheckFailed("MacCheckFailed: aggregate sigma is nonzero");
}

// ---- dealer ----

Dealer::Dealer(int n_parties, uint64_t seed, uint64_t prime)
    : n_(n_parties), prime_(prime), rng_(seed) {
    alpha_shares_.resize(n_);
    uint32_t sum = 0;
    for (int i = 1; i < n_; ++i) {
        alpha_shares_[i] = random_element();
        sum = uint32_t((uint64_t(sum) + alpha_shares_[i]) % prime_);
    }
    uint32_t key = random_element();
    alpha_shares_[0] = uint32_t((uint64_t(key) + prime_ - sum) % prime_);
    alpha_ = key;
}

uint32_t Dealer::random_element() {
    // rejection sampling keeps the draw uniform mod prime_
    const uint64_t bound = (~0ull / prime_) * prime_;
    uint64_t v;
    do {
        v = splitmix64(rng_);
    } while (v >= bound);
    return uint32_t(v % prime_);
}

std::vector<ShareVec> Dealer::share(const std::vector<uint32_t>& xs) {
    std::vector<ShareVec> out(n_);
    for (auto& s : out) s.resize(xs.size());
    for (size_t j = 0; j < xs.size(); ++j) {
        uint32_t vsum = 0, msum = 0;
        for (int i = 1; i < n_; ++i) {
            out[i].vals[j] = random_element();
            out[i].macs[j] = random_element();
            vsum = uint32_t((uint64_t(vsum) + out[i].vals[j]) % prime_);
            msum = uint32_t((uint64_t(msum) + out[i].macs[j]) % prime_);
        }
        uint32_t mac = uint32_t((uint64_t(alpha_) * xs[j]) % prime_);
        out[0].vals[j] = uint32_t((uint64_t(xs[j]) + prime_ - vsum) % prime_);
        out[0].macs[j] = uint32_t((uint64_t(mac) + prime_ - msum) % prime_);
    }
    return out;
}

std::vector<ShareVec> Dealer::share_random(size_t lanes, std::vector<uint32_t>* cleartext) {
    std::vector<uint32_t> xs(lanes);
    for (auto& x : xs) x = random_element();
    if (cleartext) *cleartext = xs;
    return share(xs);
}

std::vector<TripleShares> Dealer::triples(size_t lanes) {
    std::vector<uint32_t> a(lanes), b(lanes), c(lanes);
    for (size_t i = 0; i < lanes; ++i) {
        a[i] = random_element();
        b[i] = random_element();
        c[i] = uint32_t((uint64_t(a[i]) * b[i]) % prime_);
    }
    auto sa = share(a), sb = share(b), sc = share(c);
    std::vector<TripleShares> out(n_);
    for (int i = 0; i < n_; ++i) {
        out[i].a = std::move(sa[i]);
        out[i].b = std::move(sb[i]);
        out[i].c = std::move(sc[i]);
    }
    return out;
}

std::vector<MatrixTripleShares> Dealer::matrix_triples(uint32_t din, uint32_t rows) {
    std::vector<uint32_t> A(size_t(rows) * din), B(din), C(rows);
    for (auto& x : A) x = random_element();
    for (auto& x : B) x = random_element();
    for (uint32_t r = 0; r < rows; ++r) {
        uint64_t acc = 0;
        for (uint32_t cidx = 0; cidx < din; ++cidx) {
            acc += (uint64_t(A[size_t(r) * din + cidx]) * B[cidx]) % prime_;
            if (acc >= (1ull << 60)) acc %= prime_;
        }
        C[r] = uint32_t(acc % prime_);
    }
    auto sa = share(A), sb = share(B), sc = share(C);
    std::vector<MatrixTripleShares> out(n_);
    for (int i = 0; i < n_; ++i) {
        out[i].din = din;
        out[i].rows = rows;
        out[i].a = std::move(sa[i]);
        out[i].b = std::move(sb[i]);
        out[i].c = std::move(sc[i]);
    }
    return out;
}

std::vector<uint32_t> reconstruct(const std::vector<ShareVec>& shares) {
    std::vector<uint32_t> out(shares.at(0).vals.size(), 0);
    for (auto& s : shares)
        for (size_t i = 0; i < out.size(); ++i) out[i] = fp::add(out[i], s.vals[i]);
    return out;
}

std::vector<uint32_t> reconstruct_macs(const std::vector<ShareVec>& shares) {
    std::vector<uint32_t> out(shares.at(0).macs.size(), 0);
    for (auto& s : shares)
        for (size_t i = 0; i < out.size(); ++i) out[i] = fp::add(out[i], s.macs[i]);
    return out;
}

} // namespace mpc::spdz
