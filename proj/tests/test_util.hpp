#pragma once

#include <random>
#include <string>

#include "dtrot/map_model.hpp"

namespace dtrot::testing {

inline MapSpec spec_from(const std::string& text) { return parse_map_spec(text); }

/// Chirikov standard map in unit-period coordinates: k = 1, h = 0, v = (K / 2 pi) sin(2 pi x).
inline MapSpec chirikov(double K) {
    MapSpec s;
    s.k_dehn = 1;
    s.v.set(1, true, K / two_pi);
    return s;
}

/// Random spec: k in [1,3], up to 3 harmonics in h and v, optional drift.
inline MapSpec random_spec(std::mt19937_64& rng, bool with_drift = true) {
    std::uniform_int_distribution<int> kd(1, 3), nh(0, 3), freq(1, 4);
    std::uniform_real_distribution<double> amp(-0.6, 0.6), drift(-0.4, 0.4);
    MapSpec s;
    s.k_dehn = kd(rng);
    for (int i = nh(rng); i > 0; --i) s.h.set(freq(rng), (rng() & 1) != 0, amp(rng));
    for (int i = nh(rng); i > 0; --i) s.v.set(freq(rng), (rng() & 1) != 0, amp(rng));
    if (with_drift) s.v_const = drift(rng);
    return s;
}

}  // namespace dtrot::testing
