#include <iostream>

#include <CLI11.hpp>

#include "mpc/circuit_io.hpp"
#include "mpc/preproc.hpp"

using namespace mpc;

// Fake preprocessing: this dealer knows the global MAC key and every secret
// it deals. It exists to exercise the online phase and must never be part of
// a deployment.
int main(int argc, char** argv) {
    CLI::App app{"INSECURE fake dealer: generates triple stores for the online phase"};

    std::string circuit_path, out_dir = ".";
    int parties = 2;
    size_t slice = 262140;
    uint64_t seed = 1, loop_iters = 64;
    app.add_option("--circuit", circuit_path, "circuit file to provision for")->required();
    app.add_option("--parties,-n", parties, "number of parties")->check(CLI::Range(2, 64));
    app.add_option("--slice", slice, "linear-layer slice size (must match the run)");
    app.add_option("--seed", seed, "dealer RNG seed");
    app.add_option("--loop-iters", loop_iters,
                   "provisioned iterations per loop nesting level");
    app.add_option("--out-dir", out_dir, "directory for triples_<i>.bin");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    std::cerr << "WARNING: fake dealer — knows the MAC key and all shared secrets; "
                 "test/benchmark use only\n";
    try {
        auto g = circuit::read_circuit_file(circuit_path);
        auto demand = preproc::compute_triple_demand(g, slice, loop_iters);
        spdz::Dealer dealer(parties, seed);
        auto paths = spdz::write_dealer_stores(dealer, demand.scalars, demand.matrix_shapes,
                                               demand.input_masks, out_dir, loop_iters);
        std::cout << "provisioned " << demand.scalars << " scalar triples, "
                  << demand.matrix_shapes.size() << " matrix triples, " << demand.input_masks
                  << " input masks\n";
        for (auto& p : paths) std::cout << "  " << p << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
