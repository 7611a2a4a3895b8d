#include "mpc/ir.hpp"

#include <cctype>
#include <sstream>

namespace mpc::ir {

namespace {

std::string type_str(const Type& t) {
    switch (t.kind) {
        case TypeKind::ScalarInt: return "i" + std::to_string(t.bits);
        case TypeKind::VectorInt: return "<" + std::to_string(t.lanes) + " x i32>";
        case TypeKind::Pointer: return "ptr";
        case TypeKind::Label: return "label";
        case TypeKind::Void: return "void";
    }
    return "void";
}

std::string value_str(const Value& v) {
    switch (v.kind) {
        case ValueKind::Local: return "%" + v.name;
        case ValueKind::Global: return "@" + v.name;
        case ValueKind::ConstInt: return std::to_string(v.ival);
        case ValueKind::LabelRef: return "%" + v.name;
        case ValueKind::Null: return "null";
        case ValueKind::ConstVector: {
            std::string s = "<";
            for (size_t i = 0; i < v.vvals.size(); ++i) {
                if (i) s += ", ";
                s += "i32 " + std::to_string(v.vvals[i]);
            }
            return s + ">";
        }
    }
    return "null";
}

std::string pred_str(CmpPred p) {
    switch (p) {
        case CmpPred::Eq: return "eq";
        case CmpPred::Ne: return "ne";
        case CmpPred::Slt: return "slt";
        case CmpPred::Sgt: return "sgt";
        case CmpPred::Sle: return "sle";
        case CmpPred::Sge: return "sge";
    }
    return "eq";
}

void print_inst(std::ostringstream& os, const Instruction& in) {
    os << "  ";
    if (in.result) os << "%" << *in.result << " = ";
    switch (in.opcode) {
        case Opcode::Add: case Opcode::Sub: case Opcode::Mul: case Opcode::Shl:
        case Opcode::And: case Opcode::Or: case Opcode::Xor: {
            const char* name = in.opcode == Opcode::Add ? "add"
                             : in.opcode == Opcode::Sub ? "sub"
                             : in.opcode == Opcode::Mul ? "mul"
                             : in.opcode == Opcode::Shl ? "shl"
                             : in.opcode == Opcode::And ? "and"
                             : in.opcode == Opcode::Or  ? "or" : "xor";
            os << name << " " << type_str(in.type) << " " << value_str(in.operands[0])
               << ", " << value_str(in.operands[1]);
            break;
        }
        case Opcode::Icmp:
            os << "icmp " << pred_str(*in.pred) << " " << type_str(in.operands[0].type)
               << " " << value_str(in.operands[0]) << ", " << value_str(in.operands[1]);
            break;
        case Opcode::Select:
            os << "select " << type_str(in.operands[0].type) << " " << value_str(in.operands[0])
               << ", " << type_str(in.type) << " " << value_str(in.operands[1])
               << ", " << type_str(in.type) << " " << value_str(in.operands[2]);
            break;
        case Opcode::Zext:
            os << "zext " << type_str(in.operands[0].type) << " " << value_str(in.operands[0])
               << " to " << type_str(in.type);
            break;
        case Opcode::Load:
            os << "load " << type_str(in.type) << ", ptr " << value_str(in.operands[0]);
            break;
        case Opcode::Store:
            os << "store " << type_str(in.type) << " " << value_str(in.operands[0])
               << ", ptr " << value_str(in.operands[1]);
            break;
        case Opcode::Gep:
            os << "getelementptr i32, ptr " << value_str(in.operands[0]) << ", "
               << type_str(in.operands[1].type) << " " << value_str(in.operands[1]);
            break;
        case Opcode::Br:
            if (in.operands.size() == 1) {
                os << "br label " << value_str(in.operands[0]);
            } else {
                os << "br i1 " << value_str(in.operands[0]) << ", label "
                   << value_str(in.operands[1]) << ", label " << value_str(in.operands[2]);
            }
            break;
        case Opcode::Ret:
            if (in.type.kind == TypeKind::Void) os << "ret void";
            else os << "ret " << type_str(in.type) << " " << value_str(in.operands[0]);
            break;
        case Opcode::Phi: {
            os << "phi " << type_str(in.type) << " ";
            for (size_t i = 0; i < in.operands.size(); ++i) {
                if (i) os << ", ";
                os << "[ " << value_str(in.operands[i]) << ", %" << in.phi_blocks[i] << " ]";
            }
            break;
        }
        case Opcode::Call: {
            os << "call " << type_str(in.type) << " @" << in.callee << "(";
            for (size_t i = 0; i < in.operands.size(); ++i) {
                if (i) os << ", ";
                os << type_str(in.operands[i].type) << " " << value_str(in.operands[i]);
            }
            os << ")";
            break;
        }
    }
    os << "\n";
}

std::string escape_str(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_') out.push_back(c);
        else {
            static const char* hex = "0123456789ABCDEF";
            out.push_back('\\');
            out.push_back(hex[(c >> 4) & 0xf]);
            out.push_back(hex[c & 0xf]);
        }
    }
    return out + "\\00";
}

} // namespace

std::string print_module(const Module& m) {
    std::ostringstream os;
    for (auto& [name, str] : m.global_strings) {
        os << "@" << name << " = private unnamed_addr constant ["
           << str.size() + 1 << " x i8] c\"" << escape_str(str) << "\"\n";
    }
    for (auto& fn : m.functions) {
        os << "define " << type_str(fn.return_type) << " @" << fn.name << "(";
        for (size_t i = 0; i < fn.params.size(); ++i) {
            if (i) os << ", ";
            os << type_str(fn.params[i].type) << " %" << fn.params[i].name;
        }
        os << ") {\n";
        for (auto& bb : fn.blocks) {
            os << bb.label << ":\n";
            for (auto& in : bb.insts) print_inst(os, in);
        }
        os << "}\n";
    }
    return os.str();
}

} // namespace mpc::ir
