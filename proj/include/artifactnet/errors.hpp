#pragma once

#include <stdexcept>
#include <string>

namespace artifactnet {

// Base class for all toolkit errors. CLI maps these onto exit codes:
// config/environment problems exit 2, evaluation failures exit 1.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed container or file header.
class FormatError : public Error {
public:
    using Error::Error;
};

// Recognized container but an encoding we do not decode in-process.
class UnsupportedCodecError : public Error {
public:
    using Error::Error;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

// Input shorter than the operation's minimum; message carries the length seen.
class TooShortError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// Weight set incompatible with the requested model configuration.
class WeightError : public Error {
public:
    using Error::Error;
};

// Weight file parses but its payload is inconsistent or truncated.
class CorruptionError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& msg, long step) : Error(msg), step(step) {}
    long step;
};

// A training phase mutated parameters it promised to leave frozen.
class FrozenViolationError : public Error {
public:
    using Error::Error;
};

class IncompleteBankError : public Error {
public:
    using Error::Error;
};

// External encoder process exited nonzero; message carries its output.
class EncoderError : public Error {
public:
    using Error::Error;
};

// External tool not found / not runnable.
class EnvError : public Error {
public:
    using Error::Error;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

class NoSegmentsError : public Error {
public:
    using Error::Error;
};

class UndefinedAucError : public Error {
public:
    using Error::Error;
};

class UndefinedBandwidthError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace artifactnet
