#pragma once

#include <cmath>
#include <memory>
#include <random>

#include "hwb/runner.hpp"

namespace testing {

// Reference profiles shared by every test in a binary.
inline std::shared_ptr<const hwb::ProfileBank> bank() { return hwb::reference_bank(1024, 1.0, 1e-12, 1e-11); }

inline double q_mass() { return std::pow(hwb::line_norm(bank()->profiles().q), 2); }

inline hwb::SpectralField random_band_limited(const hwb::Grid1D& g, std::mt19937_64& rng, long modes) {
  std::normal_distribution<double> nd;
  hwb::CVec spec(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (std::abs(g.mode(j)) <= modes) spec[j] = hwb::cplx(nd(rng), nd(rng)) * static_cast<double>(g.size()) / std::sqrt(double(modes));
  }
  return hwb::SpectralField::from_spectrum(g, spec);
}

}  // namespace testing
