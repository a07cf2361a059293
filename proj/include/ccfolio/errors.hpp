#pragma once

#include <stdexcept>
#include <string>

namespace ccfolio {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class MalformedCsv : public Error {
public:
    explicit MalformedCsv(const std::string& what) : Error("malformed CSV: " + what) {}
};

class NonPositivePrice : public Error {
public:
    explicit NonPositivePrice(const std::string& what) : Error("non-positive price: " + what) {}
};

class DuplicateTimestamp : public Error {
public:
    explicit DuplicateTimestamp(const std::string& what) : Error("duplicate timestamp: " + what) {}
};

class TooFewRows : public Error {
public:
    explicit TooFewRows(const std::string& what) : Error("too few rows: " + what) {}
};

class EmptyReturns : public Error {
public:
    explicit EmptyReturns(const std::string& what) : Error("empty returns: " + what) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& what) : Error("dimension mismatch: " + what) {}
};

class OutOfDomain : public Error {
public:
    explicit OutOfDomain(const std::string& what) : Error("out of domain: " + what) {}
};

class DegenerateCoefficients : public Error {
public:
    explicit DegenerateCoefficients(const std::string& what)
        : Error("degenerate coefficients: " + what) {}
};

class TooManyAssets : public Error {
public:
    explicit TooManyAssets(const std::string& what) : Error("too many assets: " + what) {}
};

class ConfigInvalid : public Error {
public:
    explicit ConfigInvalid(const std::string& what) : Error("invalid config: " + what) {}
};

class UnsortedTaus : public Error {
public:
    explicit UnsortedTaus(const std::string& what) : Error("unsorted taus: " + what) {}
};

class LengthMismatch : public Error {
public:
    explicit LengthMismatch(const std::string& what) : Error("length mismatch: " + what) {}
};

class InvalidModel : public Error {
public:
    explicit InvalidModel(const std::string& what) : Error("invalid model: " + what) {}
};

}  // namespace ccfolio
