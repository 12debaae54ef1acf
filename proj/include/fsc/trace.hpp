// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fsc/bspline.hpp"

namespace fsc {

/// One program execution: secret and public inputs, auxiliary counters and
/// the measured running time in seconds.
struct ExecutionTrace {
  std::vector<double> secret;
  std::vector<double> pub;
  std::vector<double> aux;
  double time = 0.0;
};

/*
 * A set of execution traces with a fixed layout. Structural invariants
 * (arity, finite non-negative times, aux determinism per (secret, public))
 * are checked by validate(); fit-related minimums are checked when the
 * traces are turned into hyper-traces.
 */
struct TraceSet {
  std::vector<std::string> secret_names;
  std::string public_name = "y";
  std::vector<std::string> aux_names;
  std::string time_name = "t";
  std::vector<ExecutionTrace> records;

  std::size_t secret_dim() const { return secret_names.size(); }
  std::size_t public_dim() const { return 1; }
  std::size_t aux_dim() const { return aux_names.size(); }

  void validate() const;

  /// Distinct secret vectors in ascending lexicographic order.
  std::vector<std::vector<double>> distinct_secrets() const;
  /// Distinct public values in ascending order.
  std::vector<double> distinct_publics() const;
};

enum class TraceFormat { Delimited, Records };

/// Picks the format from the extension: .json is structured records,
/// anything else delimited text.
TraceFormat format_for(const std::filesystem::path &path);

TraceSet parse_delimited(const std::string &text);
TraceSet parse_records(const std::string &text);
std::string to_delimited(const TraceSet &traces);
std::string to_records(const TraceSet &traces);

TraceSet load_traces(const std::filesystem::path &path, TraceFormat format);
TraceSet load_traces(const std::filesystem::path &path);
void save_traces(const TraceSet &traces, const std::filesystem::path &path,
                 TraceFormat format);
void save_traces(const TraceSet &traces, const std::filesystem::path &path);

/// Per-secret functional view of the traces: time and every aux variable as
/// functions of the public input.
struct HyperTrace {
  std::vector<double> secret;
  std::vector<FunctionalCurve> aux_curves;
  FunctionalCurve timing_curve;
  std::size_t sample_count = 0;
};

/// Smallest / largest public value over the whole set.
std::pair<double, double> public_domain(const TraceSet &traces);

/// The default smoothing basis for a trace set (shared public domain).
BasisSpec default_basis(const TraceSet &traces);

/// Groups traces by secret, averages repeated timing samples per public
/// value and fits every series on `basis`. Output order is ascending
/// lexicographic in the secret.
std::vector<HyperTrace> build_hypertraces(const TraceSet &traces,
                                          const BasisSpec &basis);

std::string secret_label(const std::vector<double> &secret);

} // namespace fsc
