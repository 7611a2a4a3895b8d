#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpc/field.hpp"

namespace mpc::spdz {

struct MacCheckFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One party's authenticated additive share of a lane vector: value shares
// plus MAC shares under the global key alpha. Sum of vals across parties is
// the secret x, sum of macs is alpha * x.
struct ShareVec {
    std::vector<uint32_t> vals;
    std::vector<uint32_t> macs;

    size_t lanes() const { return vals.size(); }
    void resize(size_t n) {
        vals.assign(n, 0);
        macs.assign(n, 0);
    }
};

// Beaver triple shares (a, b, c) with c = a * b lane-wise.
struct TripleShares {
    ShareVec a, b, c;
};

// Matrix triple for one linear-layer tile: A is a rows x din matrix
// (row-major, masks the W tile), B a din-vector (masks x), C = A * B a
// rows-vector.
struct MatrixTripleShares {
    uint32_t din = 0, rows = 0;
    ShareVec a;  // rows * din lanes
    ShareVec b;  // din lanes
    ShareVec c;  // rows lanes
};

// ---- local share arithmetic (no communication) ----

void add_local(ShareVec& acc, const ShareVec& x);
void sub_local(ShareVec& acc, const ShareVec& x);
ShareVec add(const ShareVec& x, const ShareVec& y);
ShareVec sub(const ShareVec& x, const ShareVec& y);

// x + k for a public vector k: party 0 adjusts the value plane, every party
// adjusts the MAC plane by alpha_i * k.
void add_public(ShareVec& x, const std::vector<uint32_t>& k, int party, uint32_t alpha_share);
void sub_public(ShareVec& x, const std::vector<uint32_t>& k, int party, uint32_t alpha_share);
// k - x.
void rsub_public(ShareVec& x, const std::vector<uint32_t>& k, int party, uint32_t alpha_share);

// x * k for public k: both planes scale.
void mul_public(ShareVec& x, const std::vector<uint32_t>& k);
void mul_public_scalar(ShareVec& x, uint32_t k);

// Trivial sharing of a public vector so it can enter share arithmetic.
ShareVec share_of_public(const std::vector<uint32_t>& k, int party, uint32_t alpha_share);

// Combine step of Beaver multiplication once d = x - a and e = y - b are
// open: z_i = c_i + d*b_i + e*a_i (+ d*e on party 0), with the matching MAC
// adjustment alpha_i * d * e on every party.
ShareVec beaver_combine(const TripleShares& t, const std::vector<uint32_t>& d,
                        const std::vector<uint32_t>& e, int party, uint32_t alpha_share);

// Tile combine for y = W * x given open D = W_tile - A (rows x din) and
// E = x - B (din): z_i = C_i + D*B_i + A_i*E (+ D*E on party 0).
ShareVec matrix_combine(const MatrixTripleShares& t, const std::vector<uint32_t>& D,
                        const std::vector<uint32_t>& E, int party, uint32_t alpha_share);

// ---- MAC checking ----

// One audited open: the reconstructed public value and this party's MAC
// share for that lane. batch_id/lane give a global order shared by all
// parties so coefficient streams line up.
struct OpenRecord {
    uint64_t batch_id = 0;
    uint32_t lane = 0;
    uint32_t value = 0;      // opened x_j
    uint32_t mac_share = 0;  // m_ij
};

// sigma_i = sum_j r_j * (m_ij - alpha_i * x_j) over the records sorted by
// (batch_id, lane); coefficients are drawn from `coin` via splitmix64.
uint32_t mac_sigma(std::vector<OpenRecord>& records, uint64_t coin, uint32_t alpha_share);

// Commitment to sigma for the commit-reveal round.
uint64_t commit_sigma(uint32_t sigma, uint64_t nonce);

// Final verdict: all commitments consistent and sum sigma == 0 mod p.
// Throws MacCheckFailed otherwise.
void verify_sigmas(const std::vector<uint32_t>& sigmas, const std::vector<uint64_t>& nonces,
                   const std::vector<uint64_t>& commitments);

// ---- dealer (test/preprocessing only; a real deployment would use an
// offline phase, this one knows alpha) ----

class Dealer {
public:
    Dealer(int n_parties, uint64_t seed, uint64_t prime = kPrime);

    int parties() const { return n_; }
    uint32_t alpha() const { return alpha_; }
    uint32_t alpha_share(int party) const { return alpha_shares_[party]; }
    const std::vector<uint32_t>& alpha_shares() const { return alpha_shares_; }

    // Authenticated sharing of a cleartext vector; out[i] is party i's share.
    std::vector<ShareVec> share(const std::vector<uint32_t>& xs);
    // Sharing of fresh uniform randomness; the cleartext is also returned
    // (input-mask generation needs it).
    std::vector<ShareVec> share_random(size_t lanes, std::vector<uint32_t>* cleartext = nullptr);

    std::vector<TripleShares> triples(size_t lanes);
    std::vector<MatrixTripleShares> matrix_triples(uint32_t din, uint32_t rows);

    uint32_t random_element();

private:
    int n_;
    uint64_t prime_;
    uint64_t rng_;
    uint32_t alpha_ = 0;
    std::vector<uint32_t> alpha_shares_;
};

// Reconstruction helpers for tests.
std::vector<uint32_t> reconstruct(const std::vector<ShareVec>& shares);
std::vector<uint32_t> reconstruct_macs(const std::vector<ShareVec>& shares);

} // namespace mpc::spdz
