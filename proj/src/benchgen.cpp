// SPDX-License-Identifier: Apache-2.0

#include "fsc/benchgen.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <random>
#include <set>

#include "fsc/errors.hpp"
#include "fsc/format.hpp"

namespace fsc {

namespace {

struct KindName {
  BenchKind kind;
  const char *name;
};

constexpr KindName kKindNames[] = {
    {BenchKind::Zigzag, "zigzag"},
    {BenchKind::ProcessBid, "process-bid"},
    {BenchKind::GuessSecret1, "guess-secret-1"},
    {BenchKind::GuessSecret2, "guess-secret-2"},
    {BenchKind::BranchLoop, "branch-loop"},
    {BenchKind::StrcmpJetty, "strcmp-jetty"},
    {BenchKind::ModpowGabfeed, "modpow-gabfeed"},
    {BenchKind::FilterSnapbuddy, "filter-snapbuddy"},
};

constexpr double kBranchThresholds[] = {100.0, 195.0, 290.0, 400.0};
constexpr const char *kArmNames[] = {"log", "linear", "nlogn", "quadratic"};

std::vector<double> range(double from, double to, double step) {
  std::vector<double> out;
  for (int j = 0;; ++j) {
    const double v = from + step * j;
    if (v > to + 1e-9 * std::abs(step))
      break;
    out.push_back(v);
  }
  return out;
}

std::size_t variants(const BenchModel &m) {
  return static_cast<std::size_t>(m.param("variants"));
}

/// floor(log2 N) + 1 halvings for N > 0, matching `for (i = N; i > 0; i /= 2)`.
double halvings(double n) {
  if (n < 1.0)
    return 0.0;
  return std::floor(std::log2(n)) + 1.0;
}

} // namespace

std::string to_string(BenchKind kind) {
  for (const auto &k : kKindNames)
    if (k.kind == kind)
      return k.name;
  return "unknown";
}

BenchKind parse_bench_kind(const std::string &text) {
  for (const auto &k : kKindNames)
    if (text == k.name)
      return k.kind;
  throw InvalidSpecError("unknown benchmark kind '" + text + "'");
}

std::map<std::string, double> default_params(BenchKind kind) {
  switch (kind) {
  case BenchKind::Zigzag:
  case BenchKind::GuessSecret2:
    return {};
  case BenchKind::ProcessBid:
    return {{"t_fast", 0.001}, {"t_record", 0.002}};
  case BenchKind::GuessSecret1:
    return {{"t_fast", 0.001}, {"t_slow", 0.002}};
  case BenchKind::BranchLoop:
    return {{"variants", 1.0}, {"unit", 0.001}};
  case BenchKind::StrcmpJetty:
    return {{"a", 0.001}, {"b", 0.003}, {"lengths", 20.0}};
  case BenchKind::ModpowGabfeed:
    return {{"a", 0.5}, {"b", 0.01}};
  case BenchKind::FilterSnapbuddy:
    return {{"base", 0.5}, {"b", 0.02}, {"filters", 24.0}};
  }
  return {};
}

double BenchModel::param(const std::string &key) const {
  if (auto it = params.find(key); it != params.end())
    return it->second;
  const auto defaults = default_params(kind);
  if (auto it = defaults.find(key); it != defaults.end())
    return it->second;
  throw InvalidSpecError("benchmark " + to_string(kind) +
                         " has no parameter '" + key + "'");
}

void BenchModel::validate() const {
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw InvalidSpecError("noise_sigma must be a finite value >= 0");
  if (repeats < 1)
    throw InvalidSpecError("repeats must be at least 1");
  const auto defaults = default_params(kind);
  for (const auto &[key, value] : params) {
    if (!defaults.count(key))
      throw InvalidSpecError("benchmark " + to_string(kind) +
                             " has no parameter '" + key + "'");
    if (!std::isfinite(value) || value < 0.0)
      throw InvalidSpecError("parameter '" + key + "' must be finite and >= 0");
  }
  if (kind == BenchKind::BranchLoop) {
    const double v = param("variants");
    if (v < 1.0 || v > 12.0 || v != std::floor(v))
      throw InvalidSpecError("branch-loop variants must be an integer in 1..12");
  }
  if (kind == BenchKind::StrcmpJetty) {
    const double l = param("lengths");
    if (l < 1.0 || l != std::floor(l))
      throw InvalidSpecError("strcmp-jetty lengths must be a positive integer");
  }
  if (kind == BenchKind::FilterSnapbuddy) {
    const double f = param("filters");
    if (f < 1.0 || f != std::floor(f))
      throw InvalidSpecError("filter-snapbuddy filters must be a positive integer");
  }
}

std::vector<std::string> secret_names(const BenchModel &model) {
  switch (model.kind) {
  case BenchKind::GuessSecret2:
    return {"secret", "t"};
  case BenchKind::StrcmpJetty:
    return {"length", "id"};
  case BenchKind::FilterSnapbuddy:
    return {"user"};
  default:
    return {"secret"};
  }
}

std::vector<std::string> aux_names(const BenchModel &model) {
  switch (model.kind) {
  case BenchKind::Zigzag:
    return {"branch_secret_even"};
  case BenchKind::ProcessBid:
    return {"recordBid_calls"};
  case BenchKind::GuessSecret1:
    return {"branch_low_le_secret"};
  case BenchKind::GuessSecret2:
    return {"branch_low_le_secret", "t_arm"};
  case BenchKind::BranchLoop: {
    std::vector<std::string> names;
    for (const char *arm : kArmNames)
      for (std::size_t v = 1; v <= variants(model); ++v)
        names.push_back(std::string("loop_") + arm + "_" + std::to_string(v));
    return names;
  }
  case BenchKind::StrcmpJetty:
    return {"stringEquals_bblock_118"};
  case BenchKind::ModpowGabfeed:
    return {"standardMultiply_bblock_18"};
  case BenchKind::FilterSnapbuddy:
    return {"applyFilter_bblock_7"};
  }
  return {};
}

std::vector<std::vector<double>> canonical_secrets(const BenchModel &model,
                                                   std::size_t count) {
  model.validate();
  std::vector<std::vector<double>> out;
  switch (model.kind) {
  case BenchKind::Zigzag:
  case BenchKind::ProcessBid:
  case BenchKind::GuessSecret1:
    for (std::size_t s = 1; s <= (count ? count : 100); ++s)
      out.push_back({static_cast<double>(s)});
    break;
  case BenchKind::GuessSecret2:
    for (std::size_t j = 1; j <= (count ? count : 100); ++j)
      out.push_back({4.0 * static_cast<double>(j),
                     static_cast<double>(1 + j % 3)});
    break;
  case BenchKind::BranchLoop: {
    const std::size_t n = count ? count : 36u << (variants(model) - 1);
    for (std::size_t j = 0; j < n; ++j)
      out.push_back({400.0 * static_cast<double>(j) / static_cast<double>(n)});
    break;
  }
  case BenchKind::StrcmpJetty: {
    const auto lengths = static_cast<std::size_t>(model.param("lengths"));
    const std::size_t per = count ? std::max<std::size_t>(1, count / lengths) : 10;
    for (std::size_t len = 1; len <= lengths; ++len)
      for (std::size_t id = 0; id < per; ++id)
        out.push_back({static_cast<double>(len), static_cast<double>(id)});
    break;
  }
  case BenchKind::ModpowGabfeed: {
    const std::size_t n = count ? count : 200;
    if (n > 65535)
      throw InvalidSpecError("at most 65535 distinct 16-bit secrets");
    // 40503 is odd, so j -> 40503 j + 12345 permutes Z/65536.
    for (std::uint32_t j = 0; out.size() < n; ++j) {
      const std::uint32_t s = (40503u * j + 12345u) & 0xFFFFu;
      if (s != 0)
        out.push_back({static_cast<double>(s)});
    }
    break;
  }
  case BenchKind::FilterSnapbuddy:
    for (std::size_t u = 0; u < (count ? count : 240); ++u)
      out.push_back({static_cast<double>(u)});
    break;
  }
  return out;
}

std::vector<double> canonical_publics(const BenchModel &model) {
  switch (model.kind) {
  case BenchKind::Zigzag:
    return range(1, 20, 1);
  case BenchKind::ProcessBid:
  case BenchKind::GuessSecret1:
  case BenchKind::StrcmpJetty:
    return range(1, 100, 1);
  case BenchKind::GuessSecret2:
    return range(1, 400, 1);
  case BenchKind::BranchLoop:
    return range(0, 200, 10);
  case BenchKind::ModpowGabfeed:
    return range(1, 65, 1);
  case BenchKind::FilterSnapbuddy:
    return range(1, 14, 1);
  }
  return {};
}

int popcount16(double secret) {
  if (secret < 0.0 || secret > 65535.0 || secret != std::floor(secret))
    throw InvalidSpecError("modpow secret must be an integer in 0..65535");
  return std::popcount(static_cast<std::uint32_t>(secret));
}

BaseExecution base_execution(const BenchModel &m,
                             const std::vector<double> &secret, double y) {
  const std::size_t want = secret_names(m).size();
  if (secret.size() != want)
    throw InvalidSpecError(to_string(m.kind) + " expects " +
                           std::to_string(want) + " secret component(s)");
  const double s = secret[0];
  BaseExecution e;
  switch (m.kind) {
  case BenchKind::Zigzag: {
    const bool s_even = std::fmod(s, 2.0) == 0.0;
    const bool y_even = std::fmod(y, 2.0) == 0.0;
    e.time = s_even ? (y_even ? 0.003 : 0.001) : 0.002;
    e.aux = {s_even ? 1.0 : 0.0};
    break;
  }
  case BenchKind::ProcessBid: {
    const bool record = !(y < s);
    e.time = m.param("t_fast") + (record ? m.param("t_record") : 0.0);
    e.aux = {record ? 1.0 : 0.0};
    break;
  }
  case BenchKind::GuessSecret1: {
    const bool low = y <= s;
    e.time = low ? m.param("t_fast") : m.param("t_slow");
    e.aux = {low ? 1.0 : 0.0};
    break;
  }
  case BenchKind::GuessSecret2: {
    const double t = secret[1];
    const bool low = y <= s;
    double ms = 1000.0;
    if (t == 1.0)
      ms = 1.0;
    else if (t == 2.0)
      ms = low ? 10.0 : 100.0;
    e.time = ms * 1e-3;
    e.aux = {low ? 1.0 : 0.0, t};
    break;
  }
  case BenchKind::BranchLoop: {
    const std::size_t nv = variants(m);
    e.aux.assign(4 * nv, 0.0);
    if (y < 0.0)
      throw InvalidSpecError("branch-loop public input must be >= 0");
    double lo = 0.0;
    for (std::size_t arm = 0; arm < 4; ++arm) {
      const double hi = kBranchThresholds[arm];
      if (s < hi && s >= lo) {
        const auto band = std::min<std::size_t>(
            nv - 1,
            static_cast<std::size_t>(std::floor((s - lo) / (hi - lo) * nv)));
        const double factor = static_cast<double>(band + 1);
        const double iters[] = {halvings(y), y, y * halvings(y), y * y};
        const double count = factor * iters[arm];
        e.aux[arm * nv + band] = count;
        e.time = count * m.param("unit");
        break;
      }
      lo = hi;
    }
    break;
  }
  case BenchKind::StrcmpJetty: {
    const double loops = std::min(s, y);
    e.time = m.param("a") + m.param("b") * loops;
    e.aux = {loops};
    break;
  }
  case BenchKind::ModpowGabfeed: {
    const int pc = popcount16(s);
    e.time = m.param("a") + m.param("b") * pc * y;
    e.aux = {(pc - 1) * y};
    break;
  }
  case BenchKind::FilterSnapbuddy: {
    const auto filters = static_cast<long long>(m.param("filters"));
    const double filter =
        static_cast<double>((static_cast<long long>(s) * 7) % filters);
    e.time = m.param("base") + m.param("b") * filter * y;
    e.aux = {filter * y};
    break;
  }
  }
  return e;
}

TraceSet generate(const BenchModel &model,
                  const std::vector<std::vector<double>> &secrets,
                  const std::vector<double> &publics) {
  model.validate();
  if (secrets.empty() || publics.empty())
    throw InvalidSpecError("secrets and publics must be non-empty");
  TraceSet out;
  out.secret_names = secret_names(model);
  out.aux_names = aux_names(model);
  out.records.reserve(secrets.size() * publics.size() * model.repeats);
  for (std::size_t k = 0; k < secrets.size(); ++k) {
    std::seed_seq seq{static_cast<std::uint32_t>(model.seed),
                      static_cast<std::uint32_t>(model.seed >> 32),
                      static_cast<std::uint32_t>(k),
                      static_cast<std::uint32_t>(k >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, model.noise_sigma);
    for (double y : publics) {
      const BaseExecution base = base_execution(model, secrets[k], y);
      for (std::size_t r = 0; r < model.repeats; ++r) {
        double t = base.time;
        if (model.noise_sigma > 0.0)
          t = std::max(0.0, t + noise(rng));
        out.records.push_back({secrets[k], {y}, base.aux, t});
      }
    }
  }
  out.validate();
  return out;
}

TraceSet generate(const BenchConfig &config) {
  const auto publics =
      config.publics.empty() ? canonical_publics(config.model) : config.publics;
  return generate(config.model,
                  canonical_secrets(config.model, config.secret_count),
                  publics);
}

BenchConfig parse_bench_config(const std::string &text) {
  BenchConfig config;
  std::map<std::string, double> values;
  std::string kind;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("expected 'key = value'", line_no);
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key == "kind") {
      kind = std::string(value);
      continue;
    }
    try {
      values[key] = parse_double(value);
    } catch (const std::invalid_argument &) {
      throw ParseError("bad number for '" + key + "'", line_no);
    }
  }
  if (kind.empty())
    throw InvalidSpecError("benchmark config lacks 'kind'");
  config.model.kind = parse_bench_kind(kind);

  auto take = [&](const std::string &key) -> std::optional<double> {
    auto it = values.find(key);
    if (it == values.end())
      return std::nullopt;
    const double v = it->second;
    values.erase(it);
    return v;
  };
  auto whole = [](const std::string &key, double v) {
    if (v < 0.0 || v != std::floor(v))
      throw InvalidSpecError("'" + key + "' must be a non-negative integer");
    return v;
  };
  if (auto v = take("noise_sigma"))
    config.model.noise_sigma = *v;
  if (auto v = take("seed"))
    config.model.seed = static_cast<std::uint64_t>(whole("seed", *v));
  if (auto v = take("repeats"))
    config.model.repeats = static_cast<std::size_t>(whole("repeats", *v));
  if (auto v = take("secrets"))
    config.secret_count = static_cast<std::size_t>(whole("secrets", *v));
  const auto from = take("publics_from"), to = take("publics_to"),
             step = take("publics_step");
  if (from || to || step) {
    if (!from || !to)
      throw InvalidSpecError("publics_from and publics_to go together");
    const double st = step.value_or(1.0);
    if (!(st > 0.0) || *to < *from)
      throw InvalidSpecError("bad public range");
    config.publics = range(*from, *to, st);
  }
  config.model.params = std::move(values);
  config.model.validate();
  return config;
}

std::string to_config_text(const BenchConfig &config) {
  std::string out = "kind = " + to_string(config.model.kind) + "\n";
  out += "noise_sigma = " + format_roundtrip(config.model.noise_sigma) + "\n";
  out += "seed = " + std::to_string(config.model.seed) + "\n";
  out += "repeats = " + std::to_string(config.model.repeats) + "\n";
  if (config.secret_count)
    out += "secrets = " + std::to_string(config.secret_count) + "\n";
  if (!config.publics.empty()) {
    out += "publics_from = " + format_roundtrip(config.publics.front()) + "\n";
    out += "publics_to = " + format_roundtrip(config.publics.back()) + "\n";
    if (config.publics.size() > 1)
      out += "publics_step = " +
             format_roundtrip(config.publics[1] - config.publics[0]) + "\n";
  }
  for (const auto &[key, value] : config.model.params)
    out += key + " = " + format_roundtrip(value) + "\n";
  return out;
}

} // namespace fsc
