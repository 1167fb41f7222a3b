// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace watc::wat {

enum class ValueType { I32, I64, F32, F64 };

inline const char* to_wat(ValueType t) {
    switch (t) {
    case ValueType::I32: return "i32";
    case ValueType::I64: return "i64";
    case ValueType::F32: return "f32";
    case ValueType::F64: return "f64";
    }
    return "i32";
}

/// The fixed wat -> C type map. Pointer-ness is never inferred.
inline const char* to_c_type(ValueType t) {
    switch (t) {
    case ValueType::I32: return "int";
    case ValueType::I64: return "long long";
    case ValueType::F32: return "float";
    case ValueType::F64: return "double";
    }
    return "int";
}

struct FunctionSignature {
    std::string name;  // without the leading '$'
    std::vector<ValueType> params;
    std::vector<ValueType> results;  // length 0 or 1

    bool operator==(const FunctionSignature&) const = default;
};

/// Renders a signature as a C-style declaration with positional parameters,
/// e.g. "int add(int, int);".
inline std::string signature_to_declaration(const FunctionSignature& sig) {
    std::string out = sig.results.empty() ? "void" : to_c_type(sig.results.front());
    out += ' ';
    out += sig.name;
    out += '(';
    if (sig.params.empty()) {
        out += "void";
    } else {
        for (std::size_t i = 0; i < sig.params.size(); ++i) {
            if (i) out += ", ";
            out += to_c_type(sig.params[i]);
        }
    }
    out += ");";
    return out;
}

struct DataSegment {
    long base_offset = 0;    // literal constant from the segment's offset expression
    std::string raw_bytes;   // after escape decoding
};

/// (start_line, end_line) pairs are 0-based indices into WatFunction::body_lines.
struct LoopExtent {
    int start_line = 0;
    int end_line = 0;
};

struct WatFunction {
    int index = 0;  // position in the module's function index space (imports first)
    std::string name;
    FunctionSignature signature;
    std::vector<std::string> body_lines;        // verbatim source lines of the (func ...) form
    std::vector<LoopExtent> loop_extents;       // sorted by start_line
    std::set<int> callees;                      // function-space indices
    std::vector<std::string> param_names;       // "$a" names without '$', or "p{i}"
    int first_source_line = 0;                  // 0-based line in the original file
};

struct WatModule {
    std::vector<WatFunction> functions;           // module-defined functions only
    std::vector<FunctionSignature> imports;       // occupy indices 0..imports.size()-1
    std::vector<DataSegment> data_segments;
    std::vector<FunctionSignature> types;         // the (type ...) table, by index
    std::map<std::string, int> type_names;        // $name -> type table index

    std::size_t import_count() const { return imports.size(); }

    /// Function-space index for a wat name (imports included), or -1.
    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < imports.size(); ++i)
            if (imports[i].name == name) return static_cast<int>(i);
        for (const auto& fn : functions)
            if (fn.name == name) return fn.index;
        return -1;
    }
    std::size_t func_count() const { return functions.size(); }

    bool is_import(int index) const {
        return index >= 0 && static_cast<std::size_t>(index) < imports.size();
    }

    const FunctionSignature* signature_of(int index) const {
        if (is_import(index)) return &imports[static_cast<std::size_t>(index)];
        std::size_t defined = static_cast<std::size_t>(index) - imports.size();
        if (index >= 0 && defined < functions.size()) return &functions[defined].signature;
        return nullptr;
    }

    const WatFunction* function_at(int index) const {
        if (index < 0 || is_import(index)) return nullptr;
        std::size_t defined = static_cast<std::size_t>(index) - imports.size();
        if (defined >= functions.size()) return nullptr;
        return &functions[defined];
    }
};

struct OffsetStringMap {
    std::map<long, std::string> entries;  // byte offset -> decoded NUL-free text

    bool empty() const { return entries.empty(); }
    std::size_t size() const { return entries.size(); }
};

}  // namespace watc::wat

namespace watc {
using wat::DataSegment;
using wat::FunctionSignature;
using wat::LoopExtent;
using wat::OffsetStringMap;
using wat::ValueType;
using wat::WatFunction;
}  // namespace watc
