#pragma once

#include <array>
#include <cmath>

#include "ius/pfm/decompose.hpp"

namespace ius::scoring {

using ProfileVector = std::array<double, pfm::kNumMaps>;

// Per-image vector of sub-network responses, in PFM config order.
struct ContributionProfile {
  pfm::PfmConfig config = pfm::PfmConfig::Color;
  ProfileVector components{};

  double norm() const {
    double s = 0.0;
    for (double c : components) s += c * c;
    return std::sqrt(s);
  }

  friend bool operator==(const ContributionProfile&, const ContributionProfile&) = default;
};

}  // namespace ius::scoring
