#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "mpc/spdz.hpp"

namespace mpc::spdz {

struct TripleExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TripleShapeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MaskExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StoreFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One input mask: authenticated share of a dealer-chosen random r. The
// owning party's store additionally carries the cleartext r so it can open
// x - r.
struct InputMask {
    uint32_t val = 0, mac = 0;
    uint32_t clear = 0;  // meaningful only in the owner's store
};

// Preloaded per-party preprocessing material. Consumption is linearizable:
// concurrent takes hand out disjoint ranges, and every triple is used at
// most once.
class TripleStore {
public:
    TripleStore() = default;

    int party = 0;
    int n_parties = 0;
    uint32_t alpha_share = 0;
    // loop-iteration provisioning assumption the dealer sized the pools with;
    // runtimes derive the same per-node regions from it
    uint64_t loop_iters = 1;

    // flat scalar-triple pools, consumed front to back
    std::vector<uint32_t> a_vals, a_macs, b_vals, b_macs, c_vals, c_macs;
    std::vector<MatrixTripleShares> matrix;
    std::vector<InputMask> masks;

    size_t scalar_capacity() const { return a_vals.size(); }
    size_t scalar_remaining() const;
    size_t matrix_remaining() const;
    size_t masks_remaining() const;

    // Claims `lanes` consecutive scalar triples. Throws TripleExhausted.
    TripleShares take(size_t lanes);
    // Claims the next matrix triple; its shape must match exactly.
    MatrixTripleShares take_matrix(uint32_t din, uint32_t rows);
    // Claims the next `count` input masks.
    std::vector<InputMask> take_masks(size_t count);

    // Keyed variants for deterministic cross-party assignment: every party
    // must map the same node execution to the same offsets. Reuse of a
    // consumed triple throws TripleExhausted.
    TripleShares take_range(size_t offset, size_t lanes);
    MatrixTripleShares take_matrix_at(size_t index, uint32_t din, uint32_t rows);

private:
    std::atomic<size_t> scalar_cursor_{0};
    std::atomic<size_t> matrix_cursor_{0};
    std::atomic<size_t> mask_cursor_{0};
    std::mutex consume_mu_;
    std::vector<uint8_t> scalar_consumed_;
    std::vector<uint8_t> matrix_consumed_;
};

// Versioned little-endian container, magic "MPCT".
void write_store_file(const TripleStore& s, const std::string& path);
// The returned store is freshly loaded with all cursors at zero.
std::shared_ptr<TripleStore> read_store_file(const std::string& path);

// Builds fully populated in-memory stores for all parties.
std::vector<std::shared_ptr<TripleStore>> make_dealer_stores(
    Dealer& dealer, size_t scalar_triples,
    const std::vector<std::pair<uint32_t, uint32_t>>& matrix_shapes, size_t input_masks,
    uint64_t loop_iters = 1);

// Runs the dealer and writes one store file per party into out_dir
// (triples_<i>.bin). Returns the written paths.
std::vector<std::string> write_dealer_stores(Dealer& dealer, size_t scalar_triples,
                                             const std::vector<std::pair<uint32_t, uint32_t>>& matrix_shapes,
                                             size_t input_masks, const std::string& out_dir,
                                             uint64_t loop_iters = 1);

} // namespace mpc::spdz
