// SPDX-License-Identifier: Apache-2.0

#include "fsc/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fsc/errors.hpp"

namespace fsc {

void MitigationScheme::validate() const {
  if (kind == MitigationKind::Quantize && !(q > 0.0 && std::isfinite(q)))
    throw InvalidSpecError("quantization slot width must be positive");
  if (kind == MitigationKind::DoubleScheme && !(t0 > 0.0 && std::isfinite(t0)))
    throw InvalidSpecError("double-scheme start time must be positive");
}

std::string to_string(MitigationKind kind) {
  return kind == MitigationKind::Quantize ? "quantize" : "double";
}

MitigationKind parse_mitigation(const std::string &text) {
  if (text == "quantize")
    return MitigationKind::Quantize;
  if (text == "double" || text == "double-scheme")
    return MitigationKind::DoubleScheme;
  throw InvalidSpecError("unknown mitigation scheme '" + text + "'");
}

double quantize(double t, double q) {
  if (!(q > 0.0))
    throw InvalidSpecError("quantization slot width must be positive");
  if (!(t >= 0.0))
    throw DomainError("negative time");
  return q * std::max(1.0, std::ceil(t / q));
}

std::vector<double> double_scheme(std::span<const double> times, double t0) {
  if (!(t0 > 0.0))
    throw InvalidSpecError("double-scheme start time must be positive");
  std::vector<double> out;
  out.reserve(times.size());
  double start = t0;
  double width = 1.0; // 2^N
  for (double t : times) {
    if (!(t >= 0.0))
      throw DomainError("negative time");
    const double last = start + width * static_cast<double>(kSlotBudget - 1);
    if (t <= last) {
      const double i = std::ceil(std::max(0.0, t - start) / width);
      out.push_back(start + i * width);
      continue;
    }
    width *= 2.0;
    start = width * std::ceil(t / width);
    out.push_back(start);
  }
  return out;
}

TraceSet mitigate_traces(const TraceSet &traces,
                         const MitigationScheme &scheme) {
  scheme.validate();
  TraceSet out = traces;
  if (scheme.kind == MitigationKind::Quantize) {
    for (auto &r : out.records)
      r.time = quantize(r.time, scheme.q);
    return out;
  }
  std::map<std::vector<double>, std::vector<std::size_t>> by_secret;
  for (std::size_t i = 0; i < out.records.size(); ++i)
    by_secret[out.records[i].secret].push_back(i);
  for (auto &[secret, idx] : by_secret) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return out.records[a].pub[0] < out.records[b].pub[0];
    });
    std::vector<double> seq;
    seq.reserve(idx.size());
    for (std::size_t i : idx)
      seq.push_back(out.records[i].time);
    const auto released = double_scheme(seq, scheme.t0);
    for (std::size_t k = 0; k < idx.size(); ++k)
      out.records[idx[k]].time = released[k];
  }
  return out;
}

} // namespace fsc
