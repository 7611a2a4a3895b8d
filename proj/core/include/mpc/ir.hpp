#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mpc::ir {

enum class TypeKind { ScalarInt, VectorInt, Pointer, Label, Void };

struct Type {
    TypeKind kind = TypeKind::Void;
    int bits = 0;   // scalar widths are 1 or 32; vector elements are 32
    int lanes = 1;  // >= 2 for vectors

    static Type scalar(int bits_) { return {TypeKind::ScalarInt, bits_, 1}; }
    static Type vector(int lanes_) { return {TypeKind::VectorInt, 32, lanes_}; }
    static Type pointer() { return {TypeKind::Pointer, 0, 1}; }
    static Type label() { return {TypeKind::Label, 0, 1}; }
    static Type void_() { return {TypeKind::Void, 0, 1}; }

    bool operator==(const Type&) const = default;
};

enum class ValueKind { Local, Global, ConstInt, ConstVector, LabelRef, Null };

struct Value {
    ValueKind kind = ValueKind::Null;
    std::string name;                  // local/global/label-ref
    uint64_t ival = 0;                 // constant-int
    std::vector<uint64_t> vvals;       // constant-vector
    Type type;

    static Value local(std::string n, Type t) { return {ValueKind::Local, std::move(n), 0, {}, t}; }
    static Value global(std::string n, Type t = Type::pointer()) { return {ValueKind::Global, std::move(n), 0, {}, t}; }
    static Value cint(uint64_t v, Type t) { return {ValueKind::ConstInt, {}, v, {}, t}; }
    static Value cvec(std::vector<uint64_t> v, Type t) { return {ValueKind::ConstVector, {}, 0, std::move(v), t}; }
    static Value labelref(std::string n) { return {ValueKind::LabelRef, std::move(n), 0, {}, Type::label()}; }
    static Value null() { return {ValueKind::Null, {}, 0, {}, Type::pointer()}; }

    bool operator==(const Value&) const = default;
};

enum class Opcode {
    Add, Sub, Mul, Shl, And, Or, Xor,
    Icmp, Select, Zext,
    Load, Store, Gep,
    Br, Ret, Phi, Call,
};

enum class CmpPred { Eq, Ne, Slt, Sgt, Sle, Sge };

struct Instruction {
    std::optional<std::string> result;  // local name without '%'
    Opcode opcode;
    Type type;                          // result type (or operand type for store/ret)
    std::vector<Value> operands;
    std::optional<CmpPred> pred;        // icmp only
    std::string callee;                 // call only
    // phi only: incoming block label per operand
    std::vector<std::string> phi_blocks;
    int line = 0, col = 0;

    // source positions are not part of structural identity
    bool operator==(const Instruction& o) const {
        return result == o.result && opcode == o.opcode && type == o.type &&
               operands == o.operands && pred == o.pred && callee == o.callee &&
               phi_blocks == o.phi_blocks;
    }
};

struct Param {
    std::string name;
    Type type;
    std::optional<std::string> annotation;  // "private" / "public", filled by validation

    bool operator==(const Param&) const = default;
};

struct BasicBlock {
    std::string label;
    std::vector<Instruction> insts;  // last one is the terminator

    bool operator==(const BasicBlock&) const = default;
};

struct Function {
    std::string name;
    Type return_type;
    std::vector<Param> params;
    std::vector<BasicBlock> blocks;

    bool operator==(const Function&) const = default;
};

struct Module {
    std::vector<Function> functions;
    // global string constants, e.g. @.str -> "private"
    std::map<std::string, std::string> global_strings;

    bool operator==(const Module&) const = default;

    const Function* find_function(const std::string& name) const {
        for (auto& f : functions)
            if (f.name == name) return &f;
        return nullptr;
    }
};

struct Diagnostic {
    int line = 0, col = 0;
    std::string message;
    std::string to_string(const std::string& file = "<input>") const;
};

struct ParseResult {
    Module module;
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return diagnostics.empty(); }
};

ParseResult parse_module(const std::string& text);

// Canonical printer; print-then-reparse yields a structurally identical module.
std::string print_module(const Module& m);

// Validated view of the MPC entry point. Annotations are resolved onto the
// params of the returned function copy.
struct EntryView {
    const Module* module = nullptr;
    Function entry;  // params carry resolved annotations
};

// Throws std::runtime_error with NoSuchEntry / MissingAnnotation messages.
EntryView validate_entry(const Module& m, const std::string& entry_name);

} // namespace mpc::ir
