#pragma once

#include <stdexcept>
#include <string>

namespace semcom {

// One code per contract violation named in the module interfaces.
enum class Errc {
    duplicate_id,
    dangling_endpoint,
    duplicate_triple,
    unknown_entity,
    disconnected_terminals,
    empty_salt,
    sequence_gap,
    no_entities_matched,
    width_too_small,
    unknown_token,
    misaligned_frame,
    parse_error,
    validation_error,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& msg) {
    throw Error(code, msg);
}

} // namespace semcom
