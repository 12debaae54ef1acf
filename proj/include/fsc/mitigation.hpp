// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "fsc/trace.hpp"

namespace fsc {

enum class MitigationKind { Quantize, DoubleScheme };

struct MitigationScheme {
  MitigationKind kind = MitigationKind::Quantize;
  double q = 1.0;  // slot width, quantize only
  double t0 = 4.0; // first epoch start, double scheme only

  void validate() const;
};

std::string to_string(MitigationKind kind);
MitigationKind parse_mitigation(const std::string &text);

/// Smallest positive multiple of q that is >= t.
double quantize(double t, double q);

/// Slots per epoch before a miss doubles the slot spacing.
inline constexpr std::size_t kSlotBudget = 64;

/*
 * Predictive release schedule. Epoch N releases at t_N + i * 2^N for
 * i < kSlotBudget; a time past the last slot starts epoch N + 1 at the
 * smallest multiple of 2^(N+1) that is >= t.
 */
std::vector<double> double_scheme(std::span<const double> times, double t0);

/// Replaces every time by its mitigated release time. The double scheme runs
/// once per secret over its records in ascending public order.
TraceSet mitigate_traces(const TraceSet &traces,
                         const MitigationScheme &scheme);

} // namespace fsc
