#pragma once

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>
#include <system_error>

namespace vigls {

inline constexpr const char* kToolVersion = "0.3.0";

/// Shortest round-trip decimal form of `v`; stable across runs and platforms.
inline std::string format_double(double v) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument("format_double: non-finite value");
    }
    if (v == 0.0) {
        return "0";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{}) {
        throw std::runtime_error("format_double: conversion failed");
    }
    return std::string(buf, res.ptr);
}

} // namespace vigls
