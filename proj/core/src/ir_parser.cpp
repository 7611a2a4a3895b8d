#include "mpc/ir.hpp"

#include <cctype>
#include <cstdlib>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mpc::ir {

std::string Diagnostic::to_string(const std::string& file) const {
    std::ostringstream os;
    os << file << ":" << line << ":" << col << ": " << message;
    return os.str();
}

namespace {

struct Tok {
    std::string text;
    int col = 0;
};

// Splits one line into tokens. Punctuation chars are single tokens; c"..."
// string literals are one token including quotes.
std::vector<Tok> tokenize(const std::string& line) {
    std::vector<Tok> out;
    size_t i = 0;
    auto is_word = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
               c == '%' || c == '@' || c == '-' || c == '$' || c == '#';
    };
    while (i < line.size()) {
        char c = line[i];
        if (c == ' ' || c == '\t') { ++i; continue; }
        if (c == ';') break;  // trailing comment
        int col = static_cast<int>(i) + 1;
        if (c == 'c' && i + 1 < line.size() && line[i + 1] == '"') {
            size_t j = i + 2;
            while (j < line.size() && line[j] != '"') {
                if (line[j] == '\\') ++j;
                ++j;
            }
            out.push_back({line.substr(i, j + 1 - i), col});
            i = j + 1;
            continue;
        }
        if (c == '"') {
            size_t j = i + 1;
            while (j < line.size() && line[j] != '"') ++j;
            out.push_back({line.substr(i, j + 1 - i), col});
            i = j + 1;
            continue;
        }
        if (is_word(c)) {
            size_t j = i;
            while (j < line.size() && is_word(line[j])) ++j;
            out.push_back({line.substr(i, j - i), col});
            i = j;
            continue;
        }
        out.push_back({std::string(1, c), col});
        ++i;
    }
    return out;
}

bool is_integer(const std::string& s) {
    if (s.empty()) return false;
    size_t i = s[0] == '-' ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

struct ParseError {
    int line, col;
    std::string message;
};

class Cursor {
public:
    Cursor(const std::vector<Tok>& toks, int line) : toks_(toks), line_(line) {}

    bool done() const { return pos_ >= toks_.size(); }
    const Tok& peek() const {
        if (done()) fail("unexpected end of line");
        return toks_[pos_];
    }
    Tok next() {
        const Tok& t = peek();
        ++pos_;
        return t;
    }
    bool accept(const std::string& s) {
        if (!done() && toks_[pos_].text == s) { ++pos_; return true; }
        return false;
    }
    void expect(const std::string& s) {
        if (!accept(s)) fail("expected '" + s + "'");
    }
    [[noreturn]] void fail(const std::string& msg) const {
        int col = pos_ < toks_.size() ? toks_[pos_].col : (toks_.empty() ? 1 : toks_.back().col);
        throw ParseError{line_, col, msg};
    }
    int line() const { return line_; }
    int col() const { return pos_ < toks_.size() ? toks_[pos_].col : 1; }

private:
    const std::vector<Tok>& toks_;
    size_t pos_ = 0;
    int line_;
};

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    ParseResult run() {
        std::istringstream is(text_);
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            try {
                handle_line(line, lineno);
            } catch (ParseError& e) {
                diags_.push_back({e.line, e.col, e.message});
                // on malformed define, skip until closing brace
            }
        }
        if (in_function_) diags_.push_back({lineno, 1, "unexpected end of input inside function"});
        if (diags_.empty()) validate();
        return {std::move(module_), std::move(diags_)};
    }

private:
    void handle_line(const std::string& raw, int lineno) {
        auto toks = tokenize(raw);
        if (toks.empty()) return;
        const std::string& head = toks[0].text;
        if (!in_function_) {
            if (head == "source_filename" || head == "target" || head == "attributes" ||
                head[0] == '!' || head == "declare")
                return;
            if (head[0] == '@') { parse_global(toks, lineno); return; }
            if (head == "define") { parse_define(toks, lineno); return; }
            throw ParseError{lineno, toks[0].col, "unexpected token '" + head + "' at module scope"};
        }
        if (head == "}") {
            finish_function(lineno);
            return;
        }
        // block label: "name:"
        if (toks.size() >= 2 && toks[1].text == ":" && head[0] != '%') {
            cur_fn_.blocks.push_back({head, {}});
            return;
        }
        if (cur_fn_.blocks.empty()) cur_fn_.blocks.push_back({"entry", {}});
        Cursor c(toks, lineno);
        parse_instruction(c);
    }

    void parse_global(const std::vector<Tok>& toks, int lineno) {
        Cursor c(toks, lineno);
        std::string name = c.next().text.substr(1);
        c.expect("=");
        // qualifiers then "constant [N x i8] c"...""
        std::string str;
        bool is_const = false;
        while (!c.done()) {
            std::string t = c.next().text;
            if (t == "constant" || t == "global") is_const = true;
            if (t.size() >= 2 && t[0] == 'c' && t[1] == '"') {
                str = t.substr(2, t.size() - 3);
                break;
            }
        }
        if (!is_const) return;  // tolerated, non-string globals are ignored
        // decode \xx hex escapes, dropping NULs
        std::string decoded;
        for (size_t i = 0; i < str.size(); ++i) {
            if (str[i] == '\\' && i + 2 < str.size() + 1 && i + 2 <= str.size()) {
                std::string hex = str.substr(i + 1, 2);
                char v = static_cast<char>(std::strtol(hex.c_str(), nullptr, 16));
                if (v != 0) decoded.push_back(v);
                i += 2;
                continue;
            }
            decoded.push_back(str[i]);
        }
        module_.global_strings[name] = decoded;
    }

    Type parse_type(Cursor& c) {
        if (c.accept("<")) {
            const Tok& n = c.peek();
            if (!is_integer(n.text)) c.fail("expected vector lane count");
            int lanes = std::atoi(c.next().text.c_str());
            c.expect("x");
            std::string elem = c.next().text;
            if (elem != "i32") c.fail("malformed type: vector element must be i32");
            c.expect(">");
            if (lanes < 2) c.fail("malformed type: vector lanes must be >= 2");
            Type t = Type::vector(lanes);
            if (c.accept("*")) return Type::pointer();
            return t;
        }
        std::string w = c.next().text;
        Type t;
        if (w == "ptr") t = Type::pointer();
        else if (w == "void") t = Type::void_();
        else if (w == "label") t = Type::label();
        else if (w == "i1") t = Type::scalar(1);
        else if (w == "i8") t = Type::scalar(8);
        else if (w == "i32") t = Type::scalar(32);
        else if (w == "i64") t = Type::scalar(64);
        else c.fail("malformed type '" + w + "'");
        while (c.accept("*")) t = Type::pointer();
        return t;
    }

    Value parse_value(Cursor& c, const Type& t) {
        const Tok& tok = c.peek();
        if (tok.text == "null") { c.next(); return Value::null(); }
        if (tok.text[0] == '%') { return Value::local(c.next().text.substr(1), t); }
        if (tok.text[0] == '@') { return Value::global(c.next().text.substr(1), t); }
        if (is_integer(tok.text)) {
            long long v = std::atoll(c.next().text.c_str());
            if (v > 0xffffffffll || v < -0x80000000ll)
                c.fail("integer constant wider than 32 bits");
            uint64_t u = v < 0 ? static_cast<uint64_t>(static_cast<uint32_t>(v)) : static_cast<uint64_t>(v);
            return Value::cint(u, t);
        }
        if (tok.text == "<") {
            // constant vector: < i32 1, i32 2, ... >
            c.next();
            std::vector<uint64_t> vals;
            while (true) {
                Type et = parse_type(c);
                Value v = parse_value(c, et);
                if (v.kind != ValueKind::ConstInt) c.fail("vector constant element must be an integer");
                vals.push_back(v.ival);
                if (c.accept(">")) break;
                c.expect(",");
            }
            return Value::cvec(std::move(vals), t);
        }
        c.fail("expected value, found '" + tok.text + "'");
    }

    void skip_param_attrs(Cursor& c) {
        static const std::set<std::string> attrs = {
            "noundef", "nocapture", "readonly", "writeonly", "nonnull", "noalias",
            "nofree", "signext", "zeroext", "dereferenceable", "inbounds", "captures"};
        while (!c.done()) {
            const std::string& t = c.peek().text;
            if (attrs.count(t)) {
                c.next();
                if (c.accept("(")) {  // dereferenceable(N) etc.
                    while (!c.done() && !c.accept(")")) c.next();
                }
                continue;
            }
            if (t == "align") { c.next(); c.next(); continue; }
            break;
        }
    }

    void parse_define(const std::vector<Tok>& toks, int lineno) {
        Cursor c(toks, lineno);
        c.expect("define");
        // skip linkage / visibility words
        while (!c.done() && (c.peek().text == "dso_local" || c.peek().text == "internal" ||
                             c.peek().text == "private" || c.peek().text == "noundef"))
            c.next();
        Type ret = parse_type(c);
        std::string name = c.next().text;
        if (name[0] != '@') c.fail("expected function name");
        cur_fn_ = Function{};
        cur_fn_.name = name.substr(1);
        cur_fn_.return_type = ret;
        c.expect("(");
        if (!c.accept(")")) {
            while (true) {
                Type pt = parse_type(c);
                skip_param_attrs(c);
                std::string pn = c.next().text;
                if (pn[0] != '%') c.fail("expected parameter name");
                cur_fn_.params.push_back({pn.substr(1), pt, std::nullopt});
                if (c.accept(")")) break;
                c.expect(",");
            }
        }
        // attribute refs etc. until '{'
        while (!c.done() && c.peek().text != "{") c.next();
        c.expect("{");
        in_function_ = true;
    }

    void finish_function(int) {
        in_function_ = false;
        module_.functions.push_back(std::move(cur_fn_));
        cur_fn_ = Function{};
    }

    void add_inst(Instruction inst) { cur_fn_.blocks.back().insts.push_back(std::move(inst)); }

    void parse_instruction(Cursor& c) {
        Instruction inst;
        inst.line = c.line();
        inst.col = c.col();
        std::string first = c.peek().text;
        if (first[0] == '%') {
            inst.result = c.next().text.substr(1);
            c.expect("=");
        }
        std::string op = c.next().text;
        if (op == "tail") op = c.next().text;

        static const std::set<std::string> arith_flags = {"nsw", "nuw", "exact", "disjoint"};
        auto skip_flags = [&] { while (!c.done() && arith_flags.count(c.peek().text)) c.next(); };

        if (op == "add" || op == "sub" || op == "mul" || op == "shl" ||
            op == "and" || op == "or" || op == "xor") {
            inst.opcode = op == "add" ? Opcode::Add
                        : op == "sub" ? Opcode::Sub
                        : op == "mul" ? Opcode::Mul
                        : op == "shl" ? Opcode::Shl
                        : op == "and" ? Opcode::And
                        : op == "or"  ? Opcode::Or
                                      : Opcode::Xor;
            skip_flags();
            Type t = parse_type(c);
            check_int_type(c, t);
            inst.type = t;
            inst.operands.push_back(parse_value(c, t));
            c.expect(",");
            inst.operands.push_back(parse_value(c, t));
        } else if (op == "icmp") {
            std::string p = c.next().text;
            if (p == "eq") inst.pred = CmpPred::Eq;
            else if (p == "ne") inst.pred = CmpPred::Ne;
            else if (p == "slt") inst.pred = CmpPred::Slt;
            else if (p == "sgt") inst.pred = CmpPred::Sgt;
            else if (p == "sle") inst.pred = CmpPred::Sle;
            else if (p == "sge") inst.pred = CmpPred::Sge;
            else c.fail("unsupported icmp predicate '" + p + "'");
            inst.opcode = Opcode::Icmp;
            Type t = parse_type(c);
            check_int_type(c, t);
            inst.type = Type::scalar(1);
            inst.operands.push_back(parse_value(c, t));
            c.expect(",");
            inst.operands.push_back(parse_value(c, t));
        } else if (op == "select") {
            inst.opcode = Opcode::Select;
            Type ct = parse_type(c);
            inst.operands.push_back(parse_value(c, ct));
            c.expect(",");
            Type t = parse_type(c);
            inst.type = t;
            inst.operands.push_back(parse_value(c, t));
            c.expect(",");
            Type t2 = parse_type(c);
            inst.operands.push_back(parse_value(c, t2));
        } else if (op == "zext") {
            inst.opcode = Opcode::Zext;
            Type from = parse_type(c);
            inst.operands.push_back(parse_value(c, from));
            c.expect("to");
            Type to = parse_type(c);
            if (!(to == Type::scalar(32)))
                c.fail("malformed type: zext target must be i32");
            inst.type = to;
        } else if (op == "load") {
            inst.opcode = Opcode::Load;
            Type t = parse_type(c);
            inst.type = t;
            c.expect(",");
            Type pt = parse_type(c);
            (void)pt;
            inst.operands.push_back(parse_value(c, Type::pointer()));
            skip_tail(c);
        } else if (op == "store") {
            inst.opcode = Opcode::Store;
            Type t = parse_type(c);
            inst.type = t;
            inst.operands.push_back(parse_value(c, t));
            c.expect(",");
            parse_type(c);
            inst.operands.push_back(parse_value(c, Type::pointer()));
            skip_tail(c);
        } else if (op == "getelementptr") {
            inst.opcode = Opcode::Gep;
            c.accept("inbounds");
            Type elem = parse_type(c);
            if (!(elem.kind == TypeKind::ScalarInt && elem.bits == 32) &&
                elem.kind != TypeKind::VectorInt)
                c.fail("getelementptr restricted to i32 element type");
            inst.type = Type::pointer();
            c.expect(",");
            parse_type(c);
            inst.operands.push_back(parse_value(c, Type::pointer()));
            c.expect(",");
            Type it = parse_type(c);
            inst.operands.push_back(parse_value(c, it));
            if (!c.done() && c.peek().text == ",")
                c.fail("multi-dimensional getelementptr is not supported");
        } else if (op == "br") {
            inst.opcode = Opcode::Br;
            inst.type = Type::void_();
            if (c.accept("label")) {
                inst.operands.push_back(Value::labelref(strip_pct(c.next().text, c)));
            } else {
                Type ct = parse_type(c);
                if (!(ct == Type::scalar(1))) c.fail("branch condition must be i1");
                inst.operands.push_back(parse_value(c, ct));
                c.expect(",");
                c.expect("label");
                inst.operands.push_back(Value::labelref(strip_pct(c.next().text, c)));
                c.expect(",");
                c.expect("label");
                inst.operands.push_back(Value::labelref(strip_pct(c.next().text, c)));
            }
        } else if (op == "ret") {
            inst.opcode = Opcode::Ret;
            Type t = parse_type(c);
            inst.type = t;
            if (t.kind != TypeKind::Void) inst.operands.push_back(parse_value(c, t));
        } else if (op == "phi") {
            inst.opcode = Opcode::Phi;
            Type t = parse_type(c);
            inst.type = t;
            while (true) {
                c.expect("[");
                inst.operands.push_back(parse_value(c, t));
                c.expect(",");
                inst.phi_blocks.push_back(strip_pct(c.next().text, c));
                c.expect("]");
                if (!c.accept(",")) break;
            }
        } else if (op == "call") {
            parse_call(c, inst);
        } else {
            throw ParseError{c.line(), inst.col, "unsupported opcode '" + op + "'"};
        }
        add_inst(std::move(inst));
    }

    void parse_call(Cursor& c, Instruction& inst) {
        inst.opcode = Opcode::Call;
        Type ret = parse_type(c);
        inst.type = ret;
        std::string callee = c.next().text;
        if (callee[0] != '@') c.fail("expected callee name");
        inst.callee = callee.substr(1);
        bool accepted = inst.callee == "mark_linear_layer" ||
                        inst.callee == "llvm.var.annotation" ||
                        inst.callee.rfind("llvm.vector.reduce.add", 0) == 0 ||
                        inst.callee.rfind("llvm.vector.reduce.mul", 0) == 0;
        if (!accepted) c.fail("unsupported callee '@" + inst.callee + "'");
        c.expect("(");
        if (!c.accept(")")) {
            while (true) {
                Type at = parse_type(c);
                skip_param_attrs(c);
                inst.operands.push_back(parse_value(c, at));
                if (c.accept(")")) break;
                c.expect(",");
            }
        }
        skip_tail(c);
    }

    static std::string strip_pct(const std::string& s, Cursor& c) {
        if (s.empty() || s[0] != '%') c.fail("expected label reference");
        return s.substr(1);
    }

    void check_int_type(Cursor& c, const Type& t) {
        if (t.kind == TypeKind::ScalarInt) {
            if (t.bits != 1 && t.bits != 32) c.fail("malformed type: scalar width must be i1 or i32");
        } else if (t.kind != TypeKind::VectorInt) {
            c.fail("malformed type: expected integer type");
        }
    }

    // tolerate trailing ", align N" / metadata
    void skip_tail(Cursor& c) {
        while (!c.done()) c.next();
    }

    void validate() {
        for (auto& fn : module_.functions) {
            std::set<std::string> names;
            std::set<std::string> labels;
            for (auto& bb : fn.blocks) labels.insert(bb.label);
            for (auto& bb : fn.blocks) {
                if (bb.insts.empty()) {
                    diags_.push_back({0, 0, "unterminated block '" + bb.label + "' in @" + fn.name});
                    continue;
                }
                for (size_t i = 0; i < bb.insts.size(); ++i) {
                    auto& inst = bb.insts[i];
                    bool is_term = inst.opcode == Opcode::Br || inst.opcode == Opcode::Ret;
                    if (is_term && i + 1 != bb.insts.size())
                        diags_.push_back({inst.line, inst.col, "instruction after terminator in block '" + bb.label + "'"});
                    if (!is_term && i + 1 == bb.insts.size())
                        diags_.push_back({inst.line, inst.col, "unterminated block '" + bb.label + "' in @" + fn.name});
                    if (inst.result) {
                        if (!names.insert(*inst.result).second)
                            diags_.push_back({inst.line, inst.col, "duplicate SSA name '%" + *inst.result + "'"});
                    }
                    for (auto& v : inst.operands)
                        if (v.kind == ValueKind::LabelRef && !labels.count(v.name))
                            diags_.push_back({inst.line, inst.col, "unresolved label '%" + v.name + "'"});
                    for (auto& b : inst.phi_blocks)
                        if (!labels.count(b))
                            diags_.push_back({inst.line, inst.col, "unresolved label '%" + b + "'"});
                }
            }
        }
    }

    const std::string& text_;
    Module module_;
    std::vector<Diagnostic> diags_;
    Function cur_fn_;
    bool in_function_ = false;
};

} // namespace

ParseResult parse_module(const std::string& text) {
    return Parser(text).run();
}

EntryView validate_entry(const Module& m, const std::string& entry_name) {
    const Function* fn = m.find_function(entry_name);
    if (!fn) throw std::runtime_error("NoSuchEntry: function '" + entry_name + "' not found");

    EntryView view;
    view.module = &m;
    view.entry = *fn;

    // collect annotations from llvm.var.annotation calls
    std::map<std::string, std::string> anns;
    for (auto& bb : fn->blocks) {
        for (auto& inst : bb.insts) {
            if (inst.opcode != Opcode::Call || inst.callee != "llvm.var.annotation") continue;
            std::string param, str;
            for (auto& v : inst.operands) {
                if (v.kind == ValueKind::Local && param.empty()) param = v.name;
                if (v.kind == ValueKind::Global && str.empty()) str = v.name;
            }
            auto it = m.global_strings.find(str);
            if (!param.empty() && it != m.global_strings.end()) anns[param] = it->second;
        }
    }
    for (auto& p : view.entry.params) {
        auto it = anns.find(p.name);
        if (it != anns.end()) {
            if (it->second != "private" && it->second != "public")
                throw std::runtime_error("MissingAnnotation: parameter '" + p.name +
                                         "' has unrecognized annotation '" + it->second + "'");
            p.annotation = it->second;
        } else if (p.type.kind == TypeKind::Pointer) {
            throw std::runtime_error("MissingAnnotation: pointer parameter '" + p.name +
                                     "' lacks a privacy annotation");
        } else {
            p.annotation = "public";  // unannotated scalars default to public
        }
    }
    auto rt = fn->return_type;
    bool ok_ret = rt.kind == TypeKind::ScalarInt || rt.kind == TypeKind::VectorInt ||
                  rt.kind == TypeKind::Pointer;
    if (!ok_ret)
        throw std::runtime_error("entry '@" + entry_name + "' must return an int, vector or pointer");
    return view;
}

} // namespace mpc::ir
