#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fedcmfs {

// Exit codes the CLI maps these to: 1 config, 2 data, 3 internal.
enum class ErrorKind { Config = 1, Data = 2, Internal = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void throw_config(const std::string& msg) { throw Error(ErrorKind::Config, msg); }
[[noreturn]] inline void throw_data(const std::string& msg) { throw Error(ErrorKind::Data, msg); }
[[noreturn]] inline void throw_internal(const std::string& msg) { throw Error(ErrorKind::Internal, msg); }

enum class DataKind { Discrete, Continuous };

enum class VarKind { Feature, Label };

// Global variable indexing over V = F ∪ Y: features occupy [0, m),
// labels occupy [m, m+q). Identity is the index; kind is carried for
// convenience so callers never need to re-derive it from m.
struct VariableId {
    int32_t index = -1;
    VarKind kind = VarKind::Feature;

    friend bool operator==(const VariableId& a, const VariableId& b) { return a.index == b.index; }
    friend bool operator!=(const VariableId& a, const VariableId& b) { return a.index != b.index; }
    friend bool operator<(const VariableId& a, const VariableId& b) { return a.index < b.index; }
};

} // namespace fedcmfs
