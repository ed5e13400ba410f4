// Domain error hierarchy shared by all matmech modules.
//
// Every recoverable failure of a core operation is reported by throwing a
// subclass of DomainError. The CLI maps these to exit code 1 and prints
// name() on stderr; anything else escaping a command is a bug.

#pragma once

#include <stdexcept>
#include <string>

namespace matmech {

class DomainError : public std::runtime_error {
public:
    DomainError(std::string name, const std::string& what)
        : std::runtime_error(name + ": " + what), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define MATMECH_DEFINE_ERROR(Type, tag)                                      \
    class Type : public DomainError {                                        \
    public:                                                                  \
        explicit Type(const std::string& what) : DomainError(tag, what) {}   \
    }

MATMECH_DEFINE_ERROR(FrequencyMismatchError, "frequency-mismatch");
MATMECH_DEFINE_ERROR(DisconnectedGraphError, "disconnected-graph");
MATMECH_DEFINE_ERROR(LevelError, "invalid-level");
MATMECH_DEFINE_ERROR(JumpRangeError, "jump-out-of-range");
MATMECH_DEFINE_ERROR(NonOscillatoryError, "non-oscillatory");
MATMECH_DEFINE_ERROR(InvalidStepError, "invalid-step");
MATMECH_DEFINE_ERROR(UnknownObservableError, "unknown-observable");
MATMECH_DEFINE_ERROR(UnknownMapError, "unknown-map");
MATMECH_DEFINE_ERROR(BandError, "band-exceeds-size");
MATMECH_DEFINE_ERROR(GridMismatchError, "grid-mismatch");
MATMECH_DEFINE_ERROR(SizeError, "size");
MATMECH_DEFINE_ERROR(InvalidArgumentError, "invalid-argument");
MATMECH_DEFINE_ERROR(PotentialSpecError, "bad-potential-spec");
MATMECH_DEFINE_ERROR(IoError, "io");
MATMECH_DEFINE_ERROR(FormatError, "format");

#undef MATMECH_DEFINE_ERROR

}  // namespace matmech
