#pragma once

#include <cstddef>
#include <string>

#include "vigls/core.hpp"
#include "vigls/rng.hpp"

namespace vigls::testing {

inline BitString random_bits(std::size_t n, Rng& rng) {
    BitString x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x.set(i, rng.uniform_index(2) == 1);
    }
    return x;
}

inline BitString bits(const std::string& s) { return BitString::from_string(s); }

} // namespace vigls::testing
