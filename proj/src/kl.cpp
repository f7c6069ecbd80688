// Copyright 2026 The gsbandit Authors
// SPDX-License-Identifier: Apache-2.0

#include "gsb/kl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gsb {

namespace {

void require_probability(double x, const char* name) {
  if (!std::isfinite(x) || x < 0.0 || x > 1.0)
    throw std::domain_error(std::string("kl: ") + name + " = " + std::to_string(x) + " is not in [0, 1]");
}

// x * log(x / y) with 0 * log(0 / y) = 0; y > 0 whenever x > 0 here.
double xlogxy(double x, double y) { return x == 0.0 ? 0.0 : x * std::log(x / y); }

}  // namespace

ExtReal kl_bernoulli(double p, double q) {
  require_probability(p, "p");
  require_probability(q, "q");
  if (p == q) return ExtReal{};
  if (q == 0.0 || q == 1.0) return ExtReal::infinity();
  const double v = xlogxy(p, q) + xlogxy(1.0 - p, 1.0 - q);
  // Cancellation for p close to q can leave a tiny negative residue.
  return ExtReal(std::max(v, 0.0));
}

ExtReal kl_plus(double p, double q) {
  require_probability(p, "p");
  if (std::isnan(q)) throw std::domain_error("kl_plus: q is NaN");
  if (q <= p) return ExtReal{};
  return kl_bernoulli(p, std::min(q, 1.0));
}

}  // namespace gsb
