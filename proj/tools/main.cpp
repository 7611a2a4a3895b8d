#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mpc/circuit_io.hpp"
#include "mpc/oracle.hpp"
#include "mpc/runtime.hpp"

using namespace mpc;

namespace {

std::string read_text(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::chrono::milliseconds env_ms(const char* name, std::chrono::milliseconds dflt) {
    const char* v = std::getenv(name);
    return v ? std::chrono::milliseconds(std::atol(v)) : dflt;
}

// endpoints config: plain text "index host:port" lines, '#' comments
std::vector<std::string> read_endpoints(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open endpoints file '" + path + "'");
    std::map<int, std::string> by_index;
    std::string line;
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        int idx;
        std::string ep;
        if (!(ls >> idx >> ep)) continue;
        by_index[idx] = ep;
    }
    std::vector<std::string> eps(by_index.size());
    for (auto& [i, ep] : by_index) {
        if (i < 0 || size_t(i) >= eps.size())
            throw std::runtime_error("endpoints file has non-contiguous indices");
        eps[i] = ep;
    }
    if (eps.empty()) throw std::runtime_error("endpoints file '" + path + "' names no parties");
    return eps;
}

nlohmann::json report_json(const runtime::RunReport& r) {
    nlohmann::json j;
    j["frontend_ms"] = r.frontend_ms;
    j["setup_ms"] = r.setup_ms;
    j["online_ms"] = r.online_ms;
    j["bytes_sent"] = r.bytes_sent;
    j["bytes_received"] = r.bytes_received;
    j["scalar_triples_consumed"] = r.scalar_triples_consumed;
    j["matrix_triples_consumed"] = r.matrix_triples_consumed;
    j["output_digest"] = r.output_digest;
    j["workers"] = r.workers;
    j["slice"] = r.slice;
    j["parties"] = r.parties;
    j["outputs"] = r.outputs;
    return j;
}

void print_report(const runtime::RunReport& r) {
    std::cout << "stage timings: frontend " << r.frontend_ms << " ms, setup " << r.setup_ms
              << " ms, online " << r.online_ms << " ms\n"
              << "bytes: sent " << r.bytes_sent << ", received " << r.bytes_received << "\n"
              << "triples consumed: " << r.scalar_triples_consumed << " scalar, "
              << r.matrix_triples_consumed << " matrix\n"
              << "workers " << r.workers << ", slice " << r.slice << ", parties " << r.parties
              << "\n"
              << "output digest " << std::hex << r.output_digest << std::dec << " ("
              << r.outputs.size() << " lanes)\n";
}

circuit::CircuitGraph compile_file(const std::string& in, const std::string& entry) {
    auto parsed = ir::parse_module(read_text(in));
    if (!parsed.ok()) {
        for (auto& d : parsed.diagnostics) std::cerr << d.to_string(in) << "\n";
        throw std::runtime_error("parse failed with " +
                                 std::to_string(parsed.diagnostics.size()) + " diagnostics");
    }
    auto view = ir::validate_entry(parsed.module, entry);
    return circuit::compile_graph(view);
}

int cmd_compile(const std::string& in, const std::string& entry, const std::string& out,
                const std::string& emit_json) {
    auto t0 = std::chrono::steady_clock::now();
    auto g = compile_file(in, entry);
    circuit::write_circuit_file(g, out);
    if (!emit_json.empty()) {
        std::ofstream js(emit_json);
        js << circuit::circuit_to_json(g) << "\n";
    }
    auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0);
    std::cout << "compiled " << in << " -> " << out << " (" << g.nodes.size() << " nodes, "
              << g.loops.size() << " loops, " << ms.count() << " ms)\n";
    return 0;
}

runtime::RunReport run_one_party(const circuit::CircuitGraph& g, const std::string& triples,
                                 const std::string& inputs_path, int party,
                                 const std::string& config, runtime::RunOptions opts) {
    auto store = spdz::read_store_file(triples);
    if (store->party != party)
        throw std::runtime_error("triple store belongs to party " + std::to_string(store->party) +
                                 ", --party says " + std::to_string(party));
    auto inputs = preproc::read_input_file(inputs_path);

    net::MeshConfig mc;
    mc.party = party;
    mc.endpoints = read_endpoints(config);
    mc.connect_timeout = env_ms("LLSPDZ_CONNECT_TIMEOUT_MS", mc.connect_timeout);
    mc.io_timeout = env_ms("LLSPDZ_IO_TIMEOUT_MS", mc.io_timeout);
    if (int(mc.endpoints.size()) != store->n_parties)
        throw std::runtime_error("endpoints file names " + std::to_string(mc.endpoints.size()) +
                                 " parties, store expects " + std::to_string(store->n_parties));
    auto session = net::connect_mesh(mc);
    runtime::PartyRuntime rt(g, store, session, opts);
    return rt.run(inputs);
}

int cmd_run(const std::string& circuit_path, const std::string& triples,
            const std::string& inputs_path, int party, const std::string& config, int local,
            runtime::RunOptions opts, bool emit_json) {
    auto t0 = std::chrono::steady_clock::now();
    auto g = circuit::read_circuit_file(circuit_path);
    double frontend_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    runtime::RunReport rep;
    if (local > 0) {
        auto inputs = preproc::read_input_file(inputs_path);
        auto reports = runtime::run_local(g, local, inputs, opts);
        rep = reports[0];
    } else {
        rep = run_one_party(g, triples, inputs_path, party, config, opts);
    }
    rep.frontend_ms = frontend_ms;
    if (emit_json)
        std::cout << report_json(rep).dump(2) << "\n";
    else
        print_report(rep);
    return 0;
}

int cmd_bench(const std::string& circuit_path, const std::string& inputs_path,
              const std::vector<int>& parties, const std::vector<int>& threads,
              const std::vector<size_t>& slices, int repeat) {
    auto g = circuit::read_circuit_file(circuit_path);
    auto inputs = preproc::read_input_file(inputs_path);
    std::cout << "parties,threads,slice,rep,frontend_ms,setup_ms,online_ms,bytes_sent,"
                 "bytes_received,scalar_triples,matrix_triples,output_digest\n";
    for (int n : parties)
        for (int t : threads)
            for (size_t s : slices)
                for (int r = 0; r < repeat; ++r) {
                    runtime::RunOptions opts;
                    opts.threads = t;
                    opts.slice = s;
                    auto reports = runtime::run_local(g, n, inputs, opts);
                    const auto& rep = reports[0];
                    std::cout << n << "," << t << "," << s << "," << r << ","
                              << rep.frontend_ms << "," << rep.setup_ms << "," << rep.online_ms
                              << "," << rep.bytes_sent << "," << rep.bytes_received << ","
                              << rep.scalar_triples_consumed << ","
                              << rep.matrix_triples_consumed << "," << rep.output_digest << "\n";
                }
    return 0;
}

int cmd_inspect(const std::string& circuit_path, const std::string& eval_inputs) {
    auto g = circuit::read_circuit_file(circuit_path);
    std::map<std::string, size_t> by_kind;
    size_t priv = 0, pub = 0;
    for (auto& n : g.nodes) {
        if (n.removed) continue;
        ++by_kind[circuit::kind_name(n.kind)];
        (n.is_private ? priv : pub)++;
    }
    std::cout << "nodes: " << g.nodes.size() << " (root " << g.root << ")\n";
    for (auto& [k, c] : by_kind) std::cout << "  " << k << ": " << c << "\n";
    std::cout << "privacy: " << priv << " private, " << pub << " public\n";
    std::cout << "inputs:\n";
    for (auto& d : g.inputs)
        std::cout << "  " << d.name << " (" << (d.is_private ? "private" : "public") << ", "
                  << d.count << " lanes)\n";
    std::cout << "loops: " << g.loops.size() << "\n";
    for (auto& [h, li] : g.loops) {
        std::cout << "  header " << g.node(h).name << " members {";
        for (auto m : li.members) std::cout << " " << g.node(m).name;
        std::cout << " } exits {";
        for (auto e : li.exits) std::cout << " " << g.node(e).name;
        std::cout << " }\n";
    }
    if (!eval_inputs.empty()) {
        auto inputs = preproc::read_input_file(eval_inputs);
        auto out = oracle::interpret(g, inputs);
        std::cout << "oracle output (" << out.size() << " lanes):";
        for (size_t i = 0; i < out.size() && i < 16; ++i) std::cout << " " << out[i];
        if (out.size() > 16) std::cout << " ...";
        std::cout << "\n";
    }
    return 0;
}

int cmd_pack_inputs(const std::string& json_path, const std::string& out) {
    nlohmann::json j = nlohmann::json::parse(read_text(json_path));
    preproc::Inputs inputs;
    for (auto& [name, vals] : j.items())
        inputs[name] = vals.get<std::vector<uint32_t>>();
    preproc::write_input_file(inputs, out);
    std::cout << "wrote " << inputs.size() << " parameters to " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SSA-IR to SPDZ online-phase pipeline"};
    app.require_subcommand(1);

    std::string in, out, entry = "main", emit_json_path;
    auto* compile = app.add_subcommand("compile", "compile IR to a circuit file");
    compile->add_option("input", in, "IR source (.ll)")->required();
    compile->add_option("-o,--out", out, "output circuit file")->required();
    compile->add_option("--entry", entry, "entry function name");
    compile->add_option("--emit-json", emit_json_path, "also write a JSON mirror");

    std::string circuit_path, triples, inputs_path, config;
    int party = 0, local = 0;
    bool json_out = false;
    runtime::RunOptions opts;
    auto* run = app.add_subcommand("run", "run one party of the online phase");
    run->add_option("--circuit", circuit_path, "circuit file")->required();
    run->add_option("--inputs", inputs_path, "input file")->required();
    run->add_option("--triples", triples, "this party's triple store");
    run->add_option("--party", party, "party index");
    run->add_option("--config", config, "endpoints file: 'index host:port' lines");
    run->add_option("--local", local, "run all n parties in-process over simulated transport");
    run->add_option("--threads", opts.threads, "scheduler worker count");
    run->add_option("--slice", opts.slice, "linear-layer slice size");
    run->add_flag("--trace", opts.trace, "collect a scheduler trace");
    run->add_flag("--json", json_out, "emit the report as JSON");

    std::vector<int> bench_parties{2}, bench_threads{1};
    std::vector<size_t> bench_slices{262140};
    int repeat = 1;
    auto* bench = app.add_subcommand("bench", "sweep local runs, emit CSV");
    bench->add_option("--circuit", circuit_path, "circuit file")->required();
    bench->add_option("--inputs", inputs_path, "input file")->required();
    bench->add_option("--parties", bench_parties, "party counts");
    bench->add_option("--threads", bench_threads, "worker counts");
    bench->add_option("--slices", bench_slices, "slice sizes");
    bench->add_option("--repeat", repeat, "repetitions per cell");

    std::string eval_inputs;
    auto* inspect = app.add_subcommand("inspect", "dump a circuit file");
    inspect->add_option("--circuit", circuit_path, "circuit file")->required();
    inspect->add_option("--eval", eval_inputs, "run the cleartext oracle on these inputs");

    std::string pack_json;
    auto* pack = app.add_subcommand("pack-inputs", "convert a JSON input map to the binary format");
    pack->add_option("json", pack_json, "JSON file: {param: [values...]}")->required();
    pack->add_option("-o,--out", out, "output input file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (compile->parsed()) return cmd_compile(in, entry, out, emit_json_path);
        if (run->parsed()) {
            if (local == 0 && (triples.empty() || config.empty())) {
                std::cerr << "run: need --triples and --config (or --local n)\n";
                return 2;
            }
            return cmd_run(circuit_path, triples, inputs_path, party, config, local, opts,
                           json_out);
        }
        if (bench->parsed())
            return cmd_bench(circuit_path, inputs_path, bench_parties, bench_threads,
                             bench_slices, repeat);
        if (inspect->parsed()) return cmd_inspect(circuit_path, eval_inputs);
        if (pack->parsed()) return cmd_pack_inputs(pack_json, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
