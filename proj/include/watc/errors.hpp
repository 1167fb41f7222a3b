// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace watc {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line, int col)
        : Error(msg + " at line " + std::to_string(line) + ", column " + std::to_string(col)),
          line(line),
          col(col) {}
    int line;
    int col;
};

class UnsupportedConstruct : public Error {
public:
    UnsupportedConstruct(const std::string& construct, int line)
        : Error("unsupported construct '" + construct + "' at line " + std::to_string(line)),
          construct(construct),
          line(line) {}
    std::string construct;
    int line;
};

class BadEscape : public Error {
public:
    explicit BadEscape(const std::string& msg) : Error("bad escape: " + msg) {}
};

class OverlapError : public Error {
public:
    explicit OverlapError(const std::string& msg) : Error("overlapping loop extents: " + msg) {}
};

class UnresolvedMarker : public Error {
public:
    explicit UnresolvedMarker(const std::string& block_id)
        : Error("unresolved marker: no block named '" + block_id + "'"), block_id(block_id) {}
    std::string block_id;
};

class CyclicMarker : public Error {
public:
    explicit CyclicMarker(const std::string& block_id)
        : Error("cyclic marker reference through block '" + block_id + "'"), block_id(block_id) {}
    std::string block_id;
};

class UnknownCallee : public Error {
public:
    explicit UnknownCallee(const std::string& target)
        : Error("call target '" + target + "' has no resolvable signature"), target(target) {}
    std::string target;
};

class FormatError : public Error {
public:
    explicit FormatError(const std::string& msg) : Error("format error: " + msg) {}
};

class DuplicateOffset : public Error {
public:
    DuplicateOffset(const std::string& function, long offset)
        : Error("duplicate offset " + std::to_string(offset) + " in function '" + function + "'"),
          function(function),
          offset(offset) {}
    std::string function;
    long offset;
};

class UnmappedCollision : public Error {
public:
    explicit UnmappedCollision(const std::string& target)
        : Error("rename target '" + target + "' already occurs with a different meaning"),
          target(target) {}
    std::string target;
};

class PromptTooLong : public Error {
public:
    PromptTooLong(std::size_t measured, std::size_t budget)
        : Error("prompt is " + std::to_string(measured) + " tokens, budget is " +
                std::to_string(budget)),
          measured(measured),
          budget(budget) {}
    std::size_t measured;
    std::size_t budget;
};

/// Backend failures carry the block id of the snippet being decompiled.
class BackendError : public Error {
public:
    BackendError(const std::string& msg, const std::string& block_id)
        : Error(msg + " (block " + block_id + ")"), block_id(block_id) {}
    std::string block_id;
};

class BackendUnavailable : public BackendError {
public:
    BackendUnavailable(const std::string& msg, const std::string& block_id)
        : BackendError("backend unavailable: " + msg, block_id) {}
};

class EmptyCompletion : public BackendError {
public:
    explicit EmptyCompletion(const std::string& block_id)
        : BackendError("backend returned an empty completion", block_id) {}
};

class BudgetExhausted : public BackendError {
public:
    BudgetExhausted(const std::string& msg, const std::string& block_id)
        : BackendError("retry budget exhausted: " + msg, block_id) {}
};

class ToolchainMissing : public Error {
public:
    explicit ToolchainMissing(const std::string& cmd)
        : Error("toolchain command not found: " + cmd) {}
};

class RuntimeMissing : public Error {
public:
    explicit RuntimeMissing(const std::string& cmd)
        : Error("runtime command not found: " + cmd) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error("config: " + msg) {}
};

class EmptyText : public Error {
public:
    explicit EmptyText(const std::string& what) : Error(what + " tokenizes to zero tokens") {}
};

}  // namespace watc
