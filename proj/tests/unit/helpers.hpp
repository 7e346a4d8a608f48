#pragma once

#include <optional>
#include <utility>

#include "semcom/errors.hpp"

namespace testutil {

template <typename F>
std::optional<semcom::Errc> error_code_of(F&& f) {
    try {
        std::forward<F>(f)();
    } catch (const semcom::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

// True when f() throws semcom::Error with exactly this code.
template <typename F>
bool raises(semcom::Errc code, F&& f) {
    return error_code_of(std::forward<F>(f)) == code;
}

} // namespace testutil
