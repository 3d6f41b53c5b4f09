#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pmad {

// Error taxonomy mirrored by the CLI exit codes:
//   Usage   -> 1 (bad arguments, violated operation contracts)
//   Data    -> 2 (malformed or inconsistent input documents/models)
//   Numeric -> 3 (search caps, solver failures, simulation dead ends)
class Error : public std::runtime_error {
public:
    enum class Kind { Usage, Data, Numeric };

    Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Malformed input (CSV/XES/PNML/JSON documents, persisted models).
class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error(Kind::Data, what) {}
};

// Violated precondition or type invariant.
class ContractError : public Error {
public:
    explicit ContractError(const std::string& what) : Error(Kind::Usage, what) {}
};

// Invalid argument value (out of range, unsupported mode).
class ArgumentError : public Error {
public:
    explicit ArgumentError(const std::string& what) : Error(Kind::Usage, what) {}
};

// State-space cap exceeded during a search.
class SearchError : public Error {
public:
    explicit SearchError(const std::string& what) : Error(Kind::Numeric, what) {}
};

// Structural model problem (e.g. unreachable final marking).
class ModelError : public Error {
public:
    explicit ModelError(const std::string& what) : Error(Kind::Data, what) {}
};

// Solver failure (non-convergence, non-finite loss).
class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(Kind::Numeric, what) {}
};

// Random-walk failure; carries the partial trace produced so far.
class SimulationError : public Error {
public:
    SimulationError(const std::string& what, std::vector<std::string> partial_trace)
        : Error(Kind::Numeric, what), partial_trace_(std::move(partial_trace)) {}
    const std::vector<std::string>& partial_trace() const { return partial_trace_; }

private:
    std::vector<std::string> partial_trace_;
};

}  // namespace pmad
