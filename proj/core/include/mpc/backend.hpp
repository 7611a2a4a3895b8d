#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mpc/spdz.hpp"

namespace mpc::backend {

struct LaneMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TripleShortage : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BackendUnavailable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BackendCapability {
    std::string name;
    // requests below this lane count are redirected to the CPU path
    size_t min_kernel_size = 1;
    uint32_t threads_per_block = 0;  // GPU-style backends only
    bool executable = true;
};

// Batched kernels over contiguous value/MAC buffers. Multiplication is split
// around the network round: mul_mask produces the d/e shares to open,
// mul_combine finishes with the opened values. Kernels are pure.
class Backend {
public:
    virtual ~Backend() = default;
    virtual const BackendCapability& capability() const = 0;

    virtual spdz::ShareVec add_batch(const spdz::ShareVec& x, const spdz::ShareVec& y) = 0;
    virtual spdz::ShareVec sub_batch(const spdz::ShareVec& x, const spdz::ShareVec& y) = 0;
    // d = x - a, e = y - b
    virtual void mul_mask(const spdz::ShareVec& x, const spdz::ShareVec& y,
                          const spdz::TripleShares& t, std::vector<uint32_t>& d_out,
                          std::vector<uint32_t>& e_out) = 0;
    virtual spdz::ShareVec mul_combine(const spdz::TripleShares& t,
                                       const std::vector<uint32_t>& d,
                                       const std::vector<uint32_t>& e, int party,
                                       uint32_t alpha_share) = 0;
    // local additive fold to a single lane
    virtual spdz::ShareVec reduce_add(const spdz::ShareVec& x) = 0;
};

std::shared_ptr<Backend> make_cpu_backend(size_t min_kernel_size = 1);
// Capability record only; every kernel throws BackendUnavailable.
std::shared_ptr<Backend> make_gpu_stub(size_t min_kernel_size);

// Routing per the fallback rule: lanes below the preferred backend's
// min-kernel-size go to the CPU backend, as do requests when the preferred
// backend is not executable.
class BackendRegistry {
public:
    explicit BackendRegistry(size_t min_kernel_size = 1)
        : cpu_(make_cpu_backend(min_kernel_size)) {}

    void register_preferred(std::shared_ptr<Backend> b) { preferred_ = std::move(b); }

    Backend& cpu() { return *cpu_; }
    Backend& select(size_t lanes) {
        if (!preferred_) return *cpu_;
        const auto& cap = preferred_->capability();
        if (!cap.executable || lanes < cap.min_kernel_size) return *cpu_;
        return *preferred_;
    }

private:
    std::shared_ptr<Backend> cpu_;
    std::shared_ptr<Backend> preferred_;
};

} // namespace mpc::backend
