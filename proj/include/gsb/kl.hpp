// Copyright 2026 The gsbandit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gsb/ext_real.hpp"

namespace gsb {

/// Kullback-Leibler divergence kl(Bern(p) | Bern(q)) in nats.
///
/// Conventions: 0 * log(0 / x) = 0, kl(p, p) = 0, and kl(p, q) = +inf when
/// q is 0 or 1 and p != q. Throws std::domain_error when p or q is outside
/// [0, 1] or not finite.
ExtReal kl_bernoulli(double p, double q);

/// Truncated divergence: kl(p, min(q, 1)) when p < q, and 0 when q <= p.
/// q may be any finite real (targets of the form mu* - w can be negative).
ExtReal kl_plus(double p, double q);

}  // namespace gsb
