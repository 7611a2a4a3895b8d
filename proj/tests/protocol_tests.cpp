#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "mpc/backend.hpp"
#include "mpc/linear.hpp"
#include "mpc/preproc.hpp"
#include "mpc/triple_store.hpp"
#include "test_util.hpp"

using namespace mpc;
using spdz::Dealer;
using spdz::ShareVec;

namespace {

std::filesystem::path scratch_dir() {
    auto p = std::filesystem::temp_directory_path() / "llspdz_protocol_tests";
    std::filesystem::create_directories(p);
    return p;
}

void check_authenticated(const std::vector<ShareVec>& shares, const std::vector<uint32_t>& want,
                         uint32_t alpha) {
    auto vals = spdz::reconstruct(shares);
    auto macs = spdz::reconstruct_macs(shares);
    REQUIRE(vals == want);
    for (size_t i = 0; i < want.size(); ++i) CHECK(macs[i] == fp::mul(alpha, want[i]));
}

} // namespace

TEST_CASE("dealer sharing reconstructs with valid MACs") {
    for (int n : {2, 3, 5}) {
        Dealer d(n, 42);
        auto xs = testutil::rand_field_vec(37, n);
        check_authenticated(d.share(xs), xs, d.alpha());
        std::vector<uint32_t> clear;
        auto rs = d.share_random(19, &clear);
        check_authenticated(rs, clear, d.alpha());
        uint32_t asum = 0;
        for (int i = 0; i < n; ++i) asum = fp::add(asum, d.alpha_share(i));
        CHECK(asum == d.alpha());
    }
}

TEST_CASE("dealer randomness is roughly uniform over a small prime") {
    Dealer d(2, 9, 17);
    std::vector<int> counts(17, 0);
    for (int i = 0; i < 17000; ++i) ++counts[d.random_element()];
    for (int c : counts) {
        CHECK(c > 700);
        CHECK(c < 1300);
    }
}

TEST_CASE("scalar and matrix triples satisfy their defining relations") {
    Dealer d(3, 5);
    auto ts = d.triples(11);
    std::vector<ShareVec> as, bs, cs;
    for (auto& t : ts) {
        as.push_back(t.a);
        bs.push_back(t.b);
        cs.push_back(t.c);
    }
    auto av = spdz::reconstruct(as), bv = spdz::reconstruct(bs), cv = spdz::reconstruct(cs);
    for (size_t i = 0; i < 11; ++i) CHECK(cv[i] == fp::mul(av[i], bv[i]));
    check_authenticated(as, av, d.alpha());
    check_authenticated(cs, cv, d.alpha());

    auto ms = d.matrix_triples(5, 4);
    std::vector<ShareVec> A, B, C;
    for (auto& m : ms) {
        REQUIRE(m.din == 5);
        REQUIRE(m.rows == 4);
        A.push_back(m.a);
        B.push_back(m.b);
        C.push_back(m.c);
    }
    auto Av = spdz::reconstruct(A), Bv = spdz::reconstruct(B), Cv = spdz::reconstruct(C);
    for (uint32_t r = 0; r < 4; ++r) {
        uint32_t acc = 0;
        for (uint32_t c = 0; c < 5; ++c) acc = fp::add(acc, fp::mul(Av[r * 5 + c], Bv[c]));
        CHECK(Cv[r] == acc);
    }
    check_authenticated(C, Cv, d.alpha());
}

TEST_CASE("local share arithmetic tracks cleartext in both planes") {
    const int n = 3;
    Dealer d(n, 77);
    auto xs = testutil::rand_field_vec(8, 1), ys = testutil::rand_field_vec(8, 2);
    auto ks = testutil::rand_field_vec(8, 3);
    auto X = d.share(xs), Y = d.share(ys);

    std::vector<ShareVec> sum, diff, addk, subk, rsubk, mulk, pub;
    for (int i = 0; i < n; ++i) {
        sum.push_back(spdz::add(X[i], Y[i]));
        diff.push_back(spdz::sub(X[i], Y[i]));
        auto a = X[i];
        spdz::add_public(a, ks, i, d.alpha_share(i));
        addk.push_back(a);
        auto s = X[i];
        spdz::sub_public(s, ks, i, d.alpha_share(i));
        subk.push_back(s);
        auto r = X[i];
        spdz::rsub_public(r, ks, i, d.alpha_share(i));
        rsubk.push_back(r);
        auto m = X[i];
        spdz::mul_public(m, ks);
        mulk.push_back(m);
        pub.push_back(spdz::share_of_public(ks, i, d.alpha_share(i)));
    }
    std::vector<uint32_t> esum(8), ediff(8), eaddk(8), esubk(8), ersub(8), emulk(8);
    for (size_t i = 0; i < 8; ++i) {
        esum[i] = fp::add(xs[i], ys[i]);
        ediff[i] = fp::sub(xs[i], ys[i]);
        eaddk[i] = fp::add(xs[i], ks[i]);
        esubk[i] = fp::sub(xs[i], ks[i]);
        ersub[i] = fp::sub(ks[i], xs[i]);
        emulk[i] = fp::mul(xs[i], ks[i]);
    }
    check_authenticated(sum, esum, d.alpha());
    check_authenticated(diff, ediff, d.alpha());
    check_authenticated(addk, eaddk, d.alpha());
    check_authenticated(subk, esubk, d.alpha());
    check_authenticated(rsubk, ersub, d.alpha());
    check_authenticated(mulk, emulk, d.alpha());
    check_authenticated(pub, ks, d.alpha());
}

TEST_CASE("beaver combine multiplies") {
    const int n = 4;
    Dealer d(n, 13);
    auto xs = testutil::rand_field_vec(16, 4), ys = testutil::rand_field_vec(16, 5);
    auto X = d.share(xs), Y = d.share(ys);
    auto T = d.triples(16);
    // open d = x - a and e = y - b by direct reconstruction
    std::vector<uint32_t> dv(16, 0), ev(16, 0);
    for (int i = 0; i < n; ++i)
        for (size_t j = 0; j < 16; ++j) {
            dv[j] = fp::add(dv[j], fp::sub(X[i].vals[j], T[i].a.vals[j]));
            ev[j] = fp::add(ev[j], fp::sub(Y[i].vals[j], T[i].b.vals[j]));
        }
    std::vector<ShareVec> Z;
    for (int i = 0; i < n; ++i)
        Z.push_back(spdz::beaver_combine(T[i], dv, ev, i, d.alpha_share(i)));
    std::vector<uint32_t> want(16);
    for (size_t j = 0; j < 16; ++j) want[j] = fp::mul(xs[j], ys[j]);
    check_authenticated(Z, want, d.alpha());
}

TEST_CASE("matrix combine computes the tile product") {
    const int n = 2;
    Dealer d(n, 31);
    const uint32_t din = 6, rows = 3;
    auto w = testutil::rand_field_vec(din * rows, 6);
    auto x = testutil::rand_field_vec(din, 7);
    auto W = d.share(w), X = d.share(x);
    auto M = d.matrix_triples(din, rows);
    std::vector<uint32_t> D(din * rows, 0), E(din, 0);
    for (int i = 0; i < n; ++i) {
        for (size_t j = 0; j < din * rows; ++j)
            D[j] = fp::add(D[j], fp::sub(W[i].vals[j], M[i].a.vals[j]));
        for (size_t j = 0; j < din; ++j)
            E[j] = fp::add(E[j], fp::sub(X[i].vals[j], M[i].b.vals[j]));
    }
    std::vector<ShareVec> Z;
    for (int i = 0; i < n; ++i)
        Z.push_back(spdz::matrix_combine(M[i], D, E, i, d.alpha_share(i)));
    std::vector<uint32_t> want(rows);
    for (uint32_t r = 0; r < rows; ++r) {
        uint32_t acc = 0;
        for (uint32_t c = 0; c < din; ++c) acc = fp::add(acc, fp::mul(w[r * din + c], x[c]));
        want[r] = acc;
    }
    check_authenticated(Z, want, d.alpha());
}

TEST_CASE("mac sigma sums to zero for honest opens, nonzero under tampering") {
    const int n = 3;
    Dealer d(n, 99);
    auto xs = testutil::rand_field_vec(50, 8);
    auto X = d.share(xs);
    const uint64_t coin = 0xdeadbeef12345678ull;
    auto sigmas_for = [&](const std::vector<uint32_t>& opened) {
        std::vector<uint32_t> sig;
        for (int i = 0; i < n; ++i) {
            std::vector<spdz::OpenRecord> recs;
            // deliberately shuffled per party: sorting must canonicalize
            for (size_t j = 0; j < 50; ++j) {
                size_t k = i % 2 ? 49 - j : j;
                recs.push_back({k / 10, uint32_t(k % 10), opened[k], X[i].macs[k]});
            }
            sig.push_back(spdz::mac_sigma(recs, coin, d.alpha_share(i)));
        }
        return sig;
    };
    auto honest = sigmas_for(xs);
    uint32_t total = 0;
    for (uint32_t s : honest) total = fp::add(total, s);
    CHECK(total == 0);

    auto bad = xs;
    bad[17] = fp::add(bad[17], 1);
    auto forged = sigmas_for(bad);
    total = 0;
    for (uint32_t s : forged) total = fp::add(total, s);
    CHECK(total != 0);
}

TEST_CASE("commit-reveal verification") {
    std::vector<uint32_t> sigmas = {5, uint32_t(kPrime - 5)};
    std::vector<uint64_t> nonces = {111, 222};
    std::vector<uint64_t> commits = {spdz::commit_sigma(5, 111),
                                     spdz::commit_sigma(uint32_t(kPrime - 5), 222)};
    CHECK_NOTHROW(spdz::verify_sigmas(sigmas, nonces, commits));

    auto bad_sum = sigmas;
    bad_sum[0] = 6;
    std::vector<uint64_t> c2 = {spdz::commit_sigma(6, 111), commits[1]};
    CHECK_THROWS_AS(spdz::verify_sigmas(bad_sum, nonces, c2), spdz::MacCheckFailed);

    // equivocation: revealed sigma does not match the commitment
    CHECK_THROWS_AS(spdz::verify_sigmas({6, uint32_t(kPrime - 6)}, nonces, commits),
                    spdz::MacCheckFailed);
    CHECK(spdz::commit_sigma(5, 111) != spdz::commit_sigma(5, 112));
}

TEST_CASE("triple store consumption and reuse detection") {
    Dealer d(2, 3);
    auto stores = spdz::make_dealer_stores(d, 20, {{4, 2}, {4, 2}}, 6);
    REQUIRE(stores.size() == 2);
    auto& s = *stores[0];
    CHECK(s.scalar_remaining() == 20);
    auto t = s.take(5);
    CHECK(t.a.lanes() == 5);
    CHECK(s.scalar_remaining() == 15);

    auto r1 = s.take_range(10, 3);
    CHECK(r1.a.lanes() == 3);
    CHECK_THROWS_AS(s.take_range(11, 2), spdz::TripleExhausted);  // overlaps [10,13)
    CHECK_NOTHROW(s.take_range(13, 2));
    CHECK_THROWS_AS(s.take_range(18, 5), spdz::TripleExhausted);  // past capacity

    CHECK_THROWS_AS(s.take_matrix(3, 3), spdz::TripleShapeMismatch);
    auto m = s.take_matrix(4, 2);
    CHECK(m.din == 4);
    CHECK_NOTHROW(s.take_matrix_at(1, 4, 2));
    CHECK_THROWS_AS(s.take_matrix_at(1, 4, 2), spdz::TripleExhausted);  // reuse
    CHECK_THROWS_AS(s.take_matrix(4, 2), spdz::TripleExhausted);

    CHECK(s.masks_remaining() == 6);
    CHECK_NOTHROW(s.take_masks(6));
    CHECK_THROWS_AS(s.take_masks(1), spdz::MaskExhausted);
}

TEST_CASE("store files round-trip") {
    Dealer d(2, 8);
    auto stores = spdz::make_dealer_stores(d, 7, {{3, 2}}, 4, 16);
    auto path = (scratch_dir() / "store.bin").string();
    spdz::write_store_file(*stores[1], path);
    auto rt = spdz::read_store_file(path);
    CHECK(rt->party == 1);
    CHECK(rt->n_parties == 2);
    CHECK(rt->alpha_share == stores[1]->alpha_share);
    CHECK(rt->loop_iters == 16);
    CHECK(rt->a_vals == stores[1]->a_vals);
    CHECK(rt->c_macs == stores[1]->c_macs);
    CHECK(rt->matrix.size() == 1);
    CHECK(rt->matrix[0].c.vals == stores[1]->matrix[0].c.vals);
    CHECK(rt->masks.size() == 4);
    CHECK(rt->scalar_remaining() == 7);

    std::ofstream(path, std::ios::binary) << "MPCTgarbage";
    CHECK_THROWS_AS(spdz::read_store_file(path), spdz::StoreFormatError);
}

TEST_CASE("cpu backend kernels match scalar reference") {
    Dealer d(2, 12);
    auto be = backend::make_cpu_backend();
    auto xs = testutil::rand_field_vec(513, 9), ys = testutil::rand_field_vec(513, 10);
    auto X = d.share(xs), Y = d.share(ys);
    auto sum = be->add_batch(X[0], Y[0]);
    auto dif = be->sub_batch(X[0], Y[0]);
    for (size_t i = 0; i < 513; ++i) {
        CHECK(sum.vals[i] == fp::add(X[0].vals[i], Y[0].vals[i]));
        CHECK(sum.macs[i] == fp::add(X[0].macs[i], Y[0].macs[i]));
        CHECK(dif.vals[i] == fp::sub(X[0].vals[i], Y[0].vals[i]));
    }
    auto red = be->reduce_add(X[0]);
    REQUIRE(red.lanes() == 1);
    uint32_t accv = 0;
    for (uint32_t v : X[0].vals) accv = fp::add(accv, v);
    CHECK(red.vals[0] == accv);

    // masked multiply through the backend equals spdz::beaver_combine
    auto T = d.triples(513);
    std::vector<uint32_t> dv(513, 0), ev(513, 0);
    for (int i = 0; i < 2; ++i)
        for (size_t j = 0; j < 513; ++j) {
            dv[j] = fp::add(dv[j], fp::sub(X[i].vals[j], T[i].a.vals[j]));
            ev[j] = fp::add(ev[j], fp::sub(Y[i].vals[j], T[i].b.vals[j]));
        }
    std::vector<uint32_t> d0, e0;
    be->mul_mask(X[0], Y[0], T[0], d0, e0);
    for (size_t j = 0; j < 513; ++j)
        CHECK(d0[j] == fp::sub(X[0].vals[j], T[0].a.vals[j]));
    std::vector<spdz::ShareVec> Z = {be->mul_combine(T[0], dv, ev, 0, d.alpha_share(0)),
                                     spdz::beaver_combine(T[1], dv, ev, 1, d.alpha_share(1))};
    auto got = spdz::reconstruct(Z);
    for (size_t j = 0; j < 513; ++j) CHECK(got[j] == fp::mul(xs[j], ys[j]));
    CHECK_THROWS_AS(be->add_batch(X[0], spdz::ShareVec{}), backend::LaneMismatch);
}

TEST_CASE("backend registry routes by kernel size and executability") {
    backend::BackendRegistry reg;
    CHECK(reg.select(1).capability().name == reg.cpu().capability().name);
    auto stub = backend::make_gpu_stub(256);
    reg.register_preferred(stub);
    CHECK(&reg.select(100) == &reg.cpu());   // below min kernel size
    CHECK(&reg.select(1000) == &reg.cpu());  // stub is not executable: fall back
    CHECK_FALSE(stub->capability().executable);
    spdz::ShareVec a, b;
    a.resize(1000);
    b.resize(1000);
    CHECK_THROWS_AS(stub->add_batch(a, b), backend::BackendUnavailable);
    CHECK_NOTHROW(reg.select(1000).add_batch(a, b));
}

TEST_CASE("tile planning") {
    auto plan = linear::plan_tiles(8192, 8192, 262140);
    CHECK(plan.tiles.size() == 265);
    uint32_t covered = 0;
    for (size_t i = 0; i < plan.tiles.size(); ++i) {
        CHECK(plan.tiles[i].row_start == covered);
        CHECK(plan.tiles[i].row_count == (i + 1 < plan.tiles.size() ? 31 : 8));
        covered += plan.tiles[i].row_count;
    }
    CHECK(covered == 8192);

    auto one = linear::plan_tiles(10, 7, 100);
    REQUIRE(one.tiles.size() == 1);
    CHECK(one.tiles[0].row_count == 7);
    CHECK_THROWS_AS(linear::plan_tiles(1000, 4, 999), linear::SliceTooSmall);
    CHECK_THROWS_AS(linear::plan_tiles(0, 4, 100), linear::SliceTooSmall);
}

TEST_CASE("input files round-trip with a JSON sidecar") {
    preproc::Inputs in{{"x", testutil::rand_field_vec(40, 2)}, {"k", {7}}};
    auto path = (scratch_dir() / "inputs.bin").string();
    preproc::write_input_file(in, path);
    CHECK(preproc::read_input_file(path) == in);
    CHECK(std::filesystem::exists(path + ".json"));
}

TEST_CASE("triple demand scales loop bodies by loop-iters") {
    // nested_loop has exactly one private*private multiply, in the inner loop
    auto g = testutil::compile_fixture("nested_loop.ll");
    CHECK(preproc::compute_triple_demand(g, 262140, 1).scalars == 1);
    CHECK(preproc::compute_triple_demand(g, 262140, 8).scalars == 64);
    CHECK(preproc::compute_triple_demand(g, 262140, 8).matrix_shapes.empty());

    auto gl = testutil::compile_fixture("linear_64x32.ll");
    auto dl = preproc::compute_triple_demand(gl, 640, 1);
    CHECK(dl.matrix_shapes.size() == 4);  // 10 rows per tile over 32 rows
    for (size_t i = 0; i < 4; ++i) {
        CHECK(dl.matrix_shapes[i].first == 64);
        CHECK(dl.matrix_shapes[i].second == (i < 3 ? 10 : 2));
    }
    CHECK(dl.input_masks >= 64 + 64 * 32 + 32);
}

TEST_CASE("triple layout regions are disjoint and within the provisioned totals") {
    auto g = testutil::compile_fixture("nested_loop.ll");
    auto lay = preproc::compute_triple_layout(g, 262140, 8);
    auto dem = preproc::compute_triple_demand(g, 262140, 8);
    CHECK(lay.scalar_total == dem.scalars);
    REQUIRE(lay.scalar.size() == 1);
    // the doubly nested multiply is provisioned iters^2 executions
    CHECK(lay.scalar.begin()->second.max_execs == 64);
    CHECK(lay.scalar.begin()->second.stride == 1);

    auto gs = testutil::compile_fixture("straight_line.ll");
    auto ls = preproc::compute_triple_layout(gs, 262140, 4);
    std::vector<std::pair<size_t, size_t>> spans;
    for (auto& [id, r] : ls.scalar) {
        CHECK(r.stride >= 1);
        CHECK(r.max_execs == 1);  // no loops
        spans.push_back({r.base, r.base + r.stride * r.max_execs});
        CHECK(spans.back().second <= ls.scalar_total);
    }
    std::sort(spans.begin(), spans.end());
    for (size_t i = 1; i < spans.size(); ++i) CHECK(spans[i].first >= spans[i - 1].second);
}

TEST_CASE("run bundle cross-validation") {
    namespace fs = std::filesystem;
    auto dir = scratch_dir();
    auto g = testutil::compile_fixture("straight_line.ll");
    circuit::write_circuit_file(g, (dir / "c.mpcg").string());
    preproc::Inputs in{{"x", {3, 5, 4}}, {"k", {7}}};
    preproc::write_input_file(in, (dir / "in.mpci").string());

    Dealer d(2, 4);
    auto dem = preproc::compute_triple_demand(g, 262140, 1);
    spdz::write_dealer_stores(d, dem.scalars, dem.matrix_shapes, dem.input_masks,
                              dir.string(), 1);
    auto b = preproc::load_run_bundle((dir / "c.mpcg").string(), (dir / "triples_0.bin").string(),
                                      (dir / "in.mpci").string(), 262140);
    CHECK(b.store->party == 0);
    CHECK(circuit::graphs_equal(b.graph, g));

    preproc::Inputs bad{{"x", {3, 5}}, {"k", {7}}};  // x needs 3 elements
    preproc::write_input_file(bad, (dir / "bad.mpci").string());
    CHECK_THROWS_AS(preproc::load_run_bundle((dir / "c.mpcg").string(),
                                             (dir / "triples_0.bin").string(),
                                             (dir / "bad.mpci").string(), 262140),
                    preproc::ShapeMismatch);

    Dealer d2(2, 4);
    spdz::write_dealer_stores(d2, 0, {}, 1, (dir / "starved").string(), 1);
    CHECK_THROWS_AS(preproc::load_run_bundle((dir / "c.mpcg").string(),
                                             (dir / "starved" / "triples_0.bin").string(),
                                             (dir / "in.mpci").string(), 262140),
                    preproc::InsufficientTriples);
}
