#include "mpc/backend.hpp"

#include <algorithm>

namespace mpc::backend {

namespace {

constexpr size_t kChunkLanes = 1u << 16;  // cache-sized block per fused pass

void check_lanes(size_t a, size_t b) {
    if (a != b)
        throw LaneMismatch("LaneMismatch: " + std::to_string(a) + " vs " + std::to_string(b));
}

class CpuBackend : public Backend {
public:
    explicit CpuBackend(size_t min_kernel_size) {
        cap_.name = "cpu";
        cap_.min_kernel_size = min_kernel_size ? min_kernel_size : 1;
    }

    const BackendCapability& capability() const override { return cap_; }

    spdz::ShareVec add_batch(const spdz::ShareVec& x, const spdz::ShareVec& y) override {
        check_lanes(x.lanes(), y.lanes());
        spdz::ShareVec z;
        z.resize(x.lanes());
        for (size_t base = 0; base < x.lanes(); base += kChunkLanes) {
            size_t end = std::min(base + kChunkLanes, x.lanes());
            for (size_t i = base; i < end; ++i) {
                z.vals[i] = fp::add(x.vals[i], y.vals[i]);
                z.macs[i] = fp::add(x.macs[i], y.macs[i]);
            }
        }
        return z;
    }

    spdz::ShareVec sub_batch(const spdz::ShareVec& x, const spdz::ShareVec& y) override {
        check_lanes(x.lanes(), y.lanes());
        spdz::ShareVec z;
        z.resize(x.lanes());
        for (size_t base = 0; base < x.lanes(); base += kChunkLanes) {
            size_t end = std::min(base + kChunkLanes, x.lanes());
            for (size_t i = base; i < end; ++i) {
                z.vals[i] = fp::sub(x.vals[i], y.vals[i]);
                z.macs[i] = fp::sub(x.macs[i], y.macs[i]);
            }
        }
        return z;
    }

    void mul_mask(const spdz::ShareVec& x, const spdz::ShareVec& y, const spdz::TripleShares& t,
                  std::vector<uint32_t>& d_out, std::vector<uint32_t>& e_out) override {
        check_lanes(x.lanes(), y.lanes());
        if (t.a.lanes() != x.lanes())
            throw TripleShortage("TripleShortage: request carries " + std::to_string(t.a.lanes()) +
                                 " triples for " + std::to_string(x.lanes()) + " lanes");
        d_out.resize(x.lanes());
        e_out.resize(x.lanes());
        for (size_t i = 0; i < x.lanes(); ++i) {
            d_out[i] = fp::sub(x.vals[i], t.a.vals[i]);
            e_out[i] = fp::sub(y.vals[i], t.b.vals[i]);
        }
    }

    spdz::ShareVec mul_combine(const spdz::TripleShares& t, const std::vector<uint32_t>& d,
                               const std::vector<uint32_t>& e, int party,
                               uint32_t alpha_share) override {
        check_lanes(d.size(), e.size());
        if (t.a.lanes() != d.size())
            throw TripleShortage("TripleShortage: combine with mismatched triple count");
        return spdz::beaver_combine(t, d, e, party, alpha_share);
    }

    spdz::ShareVec reduce_add(const spdz::ShareVec& x) override {
        spdz::ShareVec z;
        z.resize(1);
        for (size_t i = 0; i < x.lanes(); ++i) {
            z.vals[0] = fp::add(z.vals[0], x.vals[i]);
            z.macs[0] = fp::add(z.macs[0], x.macs[i]);
        }
        return z;
    }

private:
    BackendCapability cap_;
};

class GpuStub : public Backend {
public:
    explicit GpuStub(size_t min_kernel_size) {
        cap_.name = "gpu-stub";
        cap_.min_kernel_size = min_kernel_size;
        cap_.threads_per_block = 1024;
        cap_.executable = false;
    }
    const BackendCapability& capability() const override { return cap_; }

    spdz::ShareVec add_batch(const spdz::ShareVec&, const spdz::ShareVec&) override {
        throw unavailable();
    }
    spdz::ShareVec sub_batch(const spdz::ShareVec&, const spdz::ShareVec&) override {
        throw unavailable();
    }
    void mul_mask(const spdz::ShareVec&, const spdz::ShareVec&, const spdz::TripleShares&,
                  std::vector<uint32_t>&, std::vector<uint32_t>&) override {
        throw unavailable();
    }
    spdz::ShareVec mul_combine(const spdz::TripleShares&, const std::vector<uint32_t>&,
                               const std::vector<uint32_t>&, int, uint32_t) override {
        throw unavailable();
    }
    spdz::ShareVec reduce_add(const spdz::ShareVec&) override { throw unavailable(); }

private:
    BackendUnavailable unavailable() const {
        return BackendUnavailable("BackendUnavailable: gpu-stub has no kernels");
    }
    BackendCapability cap_;
};

} // namespace

std::shared_ptr<Backend> make_cpu_backend(size_t min_kernel_size) {
    return std::make_shared<CpuBackend>(min_kernel_size);
}

std::shared_ptr<Backend> make_gpu_stub(size_t min_kernel_size) {
    return std::make_shared<GpuStub>(min_kernel_size);
}

} // namespace mpc::backend
