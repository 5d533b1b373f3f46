#pragma once

#include <stdexcept>
#include <string>

namespace carboneq {

/// Base for every error raised by the library. `code()` is a stable
/// machine-readable tag (used verbatim in CLI `ERROR <code>: ...` lines).
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define CARBONEQ_DEFINE_ERROR(Name)                                        \
    class Name : public Error {                                            \
    public:                                                                \
        explicit Name(const std::string& message) : Error(#Name, message) {} \
    }

CARBONEQ_DEFINE_ERROR(DimensionMismatch);
CARBONEQ_DEFINE_ERROR(NumericalBreakdown);
CARBONEQ_DEFINE_ERROR(MissingGenerator);
CARBONEQ_DEFINE_ERROR(InvalidConfig);
CARBONEQ_DEFINE_ERROR(InfeasibleMarket);
CARBONEQ_DEFINE_ERROR(NoFixedPointFound);
CARBONEQ_DEFINE_ERROR(TooLarge);
CARBONEQ_DEFINE_ERROR(MismatchedNetworks);
CARBONEQ_DEFINE_ERROR(SchemaVersionUnsupported);
CARBONEQ_DEFINE_ERROR(ValidationFailed);
CARBONEQ_DEFINE_ERROR(MissingFile);
CARBONEQ_DEFINE_ERROR(UnknownFuel);
CARBONEQ_DEFINE_ERROR(ConsumerCountMismatch);
CARBONEQ_DEFINE_ERROR(InvalidRange);
CARBONEQ_DEFINE_ERROR(UnknownScenario);

#undef CARBONEQ_DEFINE_ERROR

/// Malformed scenario input. `line` is 1-based, 0 when the location is a
/// field path rather than a text position.
class ParseError : public Error {
public:
    ParseError(std::size_t line, std::string field, const std::string& message)
        : Error("ParseError", format(line, field, message)), line_(line), field_(std::move(field)), message_(message) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }
    const std::string& message() const noexcept { return message_; }

private:
    static std::string format(std::size_t line, const std::string& field, const std::string& message) {
        std::string out;
        if (line > 0) out += "line " + std::to_string(line) + ": ";
        if (!field.empty()) out += field + ": ";
        return out + message;
    }

    std::size_t line_;
    std::string field_;
    std::string message_;
};

}  // namespace carboneq
