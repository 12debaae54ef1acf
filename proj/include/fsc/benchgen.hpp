// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fsc/trace.hpp"

namespace fsc {

enum class BenchKind {
  Zigzag,
  ProcessBid,
  GuessSecret1,
  GuessSecret2,
  BranchLoop,
  StrcmpJetty,
  ModpowGabfeed,
  FilterSnapbuddy,
};

std::string to_string(BenchKind kind);
BenchKind parse_bench_kind(const std::string &text);

/*
 * A synthetic benchmark program. `params` holds per-kind numeric settings;
 * missing keys take the defaults listed by default_params().
 *
 *   zigzag            (none)
 *   process-bid       t_fast, t_record
 *   guess-secret-1    t_fast, t_slow
 *   guess-secret-2    (none)
 *   branch-loop       variants, unit
 *   strcmp-jetty      a, b
 *   modpow-gabfeed    a, b
 *   filter-snapbuddy  base, b, filters
 */
struct BenchModel {
  BenchKind kind = BenchKind::Zigzag;
  std::map<std::string, double> params;
  double noise_sigma = 1e-4;
  std::uint64_t seed = 0;
  /// Timing samples per (secret, public) pair.
  std::size_t repeats = 1;

  double param(const std::string &key) const;
  void validate() const;
};

std::map<std::string, double> default_params(BenchKind kind);

/// `key = value` lines, '#' comments. Recognised keys: kind, noise_sigma,
/// seed, repeats, secrets, publics_from, publics_to, publics_step, plus the
/// per-kind parameters. Secret/public range keys are returned separately.
struct BenchConfig {
  BenchModel model;
  std::size_t secret_count = 0; // 0 = canonical
  std::vector<double> publics;  // empty = canonical
};
BenchConfig parse_bench_config(const std::string &text);
std::string to_config_text(const BenchConfig &config);

/// Canonical secret set of a model; `count` = 0 picks the default size.
std::vector<std::vector<double>> canonical_secrets(const BenchModel &model,
                                                   std::size_t count = 0);
std::vector<double> canonical_publics(const BenchModel &model);

/// Noise-free time and aux values of one execution.
struct BaseExecution {
  double time = 0.0;
  std::vector<double> aux;
};
BaseExecution base_execution(const BenchModel &model,
                             const std::vector<double> &secret, double y);

std::vector<std::string> secret_names(const BenchModel &model);
std::vector<std::string> aux_names(const BenchModel &model);

/// Base model plus Gaussian noise (clamped at 0). Each secret draws from its
/// own stream seeded by (seed, secret position), so the output does not
/// depend on evaluation order.
TraceSet generate(const BenchModel &model,
                  const std::vector<std::vector<double>> &secrets,
                  const std::vector<double> &publics);
TraceSet generate(const BenchConfig &config);

int popcount16(double secret);

} // namespace fsc
