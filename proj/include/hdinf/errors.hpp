#pragma once

#include <stdexcept>
#include <string>

namespace hdinf {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

class NotPositiveDefinite : public Error {
public:
    explicit NotPositiveDefinite(const std::string& msg) : Error(msg) {}
};

class SparsityExceedsDim : public Error {
public:
    explicit SparsityExceedsDim(const std::string& msg) : Error(msg) {}
};

class DegenerateNoise : public Error {
public:
    explicit DegenerateNoise(const std::string& msg) : Error(msg) {}
};

class InconsistentDimensions : public Error {
public:
    explicit InconsistentDimensions(const std::string& msg) : Error(msg) {}
};

class NegativeVariance : public Error {
public:
    explicit NegativeVariance(const std::string& msg) : Error(msg) {}
};

class InvalidLevel : public Error {
public:
    explicit InvalidLevel(const std::string& msg) : Error(msg) {}
};

class IndexOutOfRange : public Error {
public:
    explicit IndexOutOfRange(const std::string& msg) : Error(msg) {}
};

class ZeroGradient : public Error {
public:
    explicit ZeroGradient(const std::string& msg) : Error(msg) {}
};

class TooFewSamples : public Error {
public:
    explicit TooFewSamples(const std::string& msg) : Error(msg) {}
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

class ConfigParseError : public Error {
public:
    explicit ConfigParseError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

} // namespace hdinf
