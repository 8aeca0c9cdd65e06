#pragma once

#include <stdexcept>
#include <string>

namespace spingw {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// --- packet codec ---

struct IllegalLength : Error {
    explicit IllegalLength(const std::string& what = "packet bit length must be 40 or 72")
        : Error(what) {}
};

struct ParityError : Error {
    explicit ParityError(const std::string& what = "packet parity check failed") : Error(what) {}
};

struct UnsupportedPacketType : Error {
    explicit UnsupportedPacketType(const std::string& what = "packet type is not multicast")
        : Error(what) {}
};

// --- routing ---

struct UnroutableEvent : Error {
    explicit UnroutableEvent(const std::string& what = "no routing key for event address")
        : Error(what) {}
};

struct UnroutableKey : Error {
    explicit UnroutableKey(const std::string& what = "no address for routing key") : Error(what) {}
};

// --- link layer ---

struct InvalidTransition : Error {
    explicit InvalidTransition(const std::string& what = "wire transition is not a 2-of-7 symbol")
        : Error(what) {}
};

struct FramingError : Error {
    explicit FramingError(const std::string& what = "frame is not 10 or 18 data symbols")
        : Error(what) {}
};

struct MissingEop : Error {
    explicit MissingEop(const std::string& what = "symbol stream ended without end-of-packet")
        : Error(what) {}
};

// --- rate codec ---

struct ValueOutOfRange : Error {
    explicit ValueOutOfRange(const std::string& what = "sensor value outside configured range")
        : Error(what) {}
};

struct FrequencyCapExceeded : Error {
    explicit FrequencyCapExceeded(const std::string& what = "frequency above the 1 kHz cap")
        : Error(what) {}
};

struct ZeroPeriod : Error {
    explicit ZeroPeriod(const std::string& what = "spike period must be at least one tick")
        : Error(what) {}
};

struct NotEnoughSpikes : Error {
    explicit NotEnoughSpikes(const std::string& what = "too few spikes for the requested window")
        : Error(what) {}
};

// --- virtual board ---

struct UnknownKey : Error {
    explicit UnknownKey(const std::string& what = "routing key not mapped to any input neuron")
        : Error(what) {}
};

// --- PC control channel ---

struct PayloadTooLong : Error {
    explicit PayloadTooLong(const std::string& what = "control frame payload exceeds 255 bytes")
        : Error(what) {}
};

struct ChecksumMismatch : Error {
    explicit ChecksumMismatch(const std::string& what = "control frame checksum mismatch")
        : Error(what) {}
};

struct TruncatedFrame : Error {
    explicit TruncatedFrame(const std::string& what = "control frame truncated") : Error(what) {}
};

// --- configuration ---

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(what) {}
};

} // namespace spingw
