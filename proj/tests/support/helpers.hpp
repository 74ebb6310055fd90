#pragma once

#include "emdscale/error.hpp"

#include <optional>

/// The library error code thrown by `f`, or nullopt when it returns normally.
template <typename F>
std::optional<emdscale::Errc> error_code(F&& f) {
    try {
        f();
    } catch (const emdscale::Error& e) {
        return e.code();
    }
    return std::nullopt;
}
