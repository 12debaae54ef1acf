// SPDX-License-Identifier: Apache-2.0

#include "fsc/trace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "fsc/format.hpp"

namespace fsc {

namespace {

std::string public_label(double y) { return format_roundtrip(y); }

} // namespace

std::string secret_label(const std::vector<double> &secret) {
  std::string out = "[";
  for (std::size_t j = 0; j < secret.size(); ++j) {
    if (j)
      out += ", ";
    out += format_roundtrip(secret[j]);
  }
  return out + "]";
}

void TraceSet::validate() const {
  if (secret_names.empty())
    throw ValidationError("trace set declares no secret variable");
  std::map<std::pair<std::vector<double>, double>, const ExecutionTrace *>
      seen;
  for (const auto &r : records) {
    if (r.secret.size() != secret_names.size() || r.pub.size() != 1 ||
        r.aux.size() != aux_names.size())
      throw ValidationError("record arity does not match the declared columns");
    if (!std::isfinite(r.time) || r.time < 0.0)
      throw ValidationError("time must be finite and >= 0");
    auto [it, inserted] = seen.try_emplace({r.secret, r.pub[0]}, &r);
    if (!inserted && it->second->aux != r.aux)
      throw ValidationError("auxiliary values are not deterministic: secret " +
                            secret_label(r.secret) + " at public " +
                            public_label(r.pub[0]) +
                            " carries different aux vectors");
  }
}

std::vector<std::vector<double>> TraceSet::distinct_secrets() const {
  std::set<std::vector<double>> s;
  for (const auto &r : records)
    s.insert(r.secret);
  return {s.begin(), s.end()};
}

std::vector<double> TraceSet::distinct_publics() const {
  std::set<double> s;
  for (const auto &r : records)
    s.insert(r.pub.at(0));
  return {s.begin(), s.end()};
}

TraceFormat format_for(const std::filesystem::path &path) {
  return path.extension() == ".json" ? TraceFormat::Records
                                     : TraceFormat::Delimited;
}

TraceSet parse_delimited(const std::string &text) {
  TraceSet out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  enum class Role { Secret, Public, Aux, Time };
  std::vector<Role> roles;
  bool have_header = false;
  std::size_t public_cols = 0, time_cols = 0;

  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty())
      continue;
    const auto fields = split(body, ',');
    if (!have_header) {
      for (auto f : fields) {
        f = trim(f);
        const auto colon = f.find(':');
        if (colon == std::string_view::npos)
          throw ParseError("header column '" + std::string(f) +
                               "' lacks a role prefix",
                           line_no);
        const auto role = f.substr(0, colon);
        const std::string name(f.substr(colon + 1));
        if (role == "secret") {
          roles.push_back(Role::Secret);
          out.secret_names.push_back(name);
        } else if (role == "public") {
          roles.push_back(Role::Public);
          out.public_name = name;
          ++public_cols;
        } else if (role == "aux") {
          roles.push_back(Role::Aux);
          out.aux_names.push_back(name);
        } else if (role == "time") {
          roles.push_back(Role::Time);
          out.time_name = name;
          ++time_cols;
        } else {
          throw ParseError("unknown column role '" + std::string(role) + "'",
                           line_no);
        }
      }
      if (public_cols != 1)
        throw UnsupportedDimensionError(
            "exactly one public column is supported, header declares " +
            std::to_string(public_cols));
      if (time_cols != 1)
        throw ParseError("header must declare exactly one time column",
                         line_no);
      if (out.secret_names.empty())
        throw ParseError("header must declare at least one secret column",
                         line_no);
      have_header = true;
      continue;
    }

    if (fields.size() != roles.size())
      throw ParseError("expected " + std::to_string(roles.size()) +
                           " fields, got " + std::to_string(fields.size()),
                       line_no);
    ExecutionTrace rec;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v = 0.0;
      try {
        v = parse_double(fields[c]);
      } catch (const std::invalid_argument &e) {
        throw ParseError(e.what(), line_no);
      }
      switch (roles[c]) {
      case Role::Secret:
        rec.secret.push_back(v);
        break;
      case Role::Public:
        rec.pub.push_back(v);
        break;
      case Role::Aux:
        rec.aux.push_back(v);
        break;
      case Role::Time:
        rec.time = v;
        break;
      }
    }
    if (!std::isfinite(rec.time) || rec.time < 0.0)
      throw ParseError("time must be finite and >= 0", line_no);
    out.records.push_back(std::move(rec));
  }
  if (!have_header)
    throw ParseError("missing header line", 0);
  out.validate();
  return out;
}

TraceSet parse_records(const std::string &text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw ParseError(e.what(), 0);
  }
  if (!doc.is_array())
    throw ParseError("structured trace file must be an array of records", 0);

  TraceSet out;
  bool first = true;
  std::size_t index = 0;
  for (const auto &obj : doc) {
    ++index;
    const std::string where = "record " + std::to_string(index) + ": ";
    try {
      if (!obj.is_object())
        throw ParseError(where + "not an object", 0);
      if (obj.contains("public") && obj.at("public").is_array())
        throw UnsupportedDimensionError(
            where + "vector-valued public inputs are not supported");
      ExecutionTrace rec;
      rec.secret = obj.at("secret").get<std::vector<double>>();
      rec.pub = {obj.at("public").get<double>()};
      rec.time = obj.at("time").get<double>();
      std::vector<std::string> names;
      if (obj.contains("aux"))
        for (const auto &[name, value] : obj.at("aux").items()) {
          names.push_back(name);
          rec.aux.push_back(value.get<double>());
        }
      if (first) {
        out.aux_names = names;
        if (rec.secret.size() == 1)
          out.secret_names = {"s"};
        else
          for (std::size_t j = 0; j < rec.secret.size(); ++j)
            out.secret_names.push_back("s" + std::to_string(j));
        first = false;
      } else if (names != out.aux_names) {
        throw ParseError(where + "aux keys differ from the first record", 0);
      }
      if (!std::isfinite(rec.time) || rec.time < 0.0)
        throw ParseError(where + "time must be finite and >= 0", 0);
      out.records.push_back(std::move(rec));
    } catch (const nlohmann::json::exception &e) {
      throw ParseError(where + e.what(), 0);
    }
  }
  if (first)
    throw ParseError("structured trace file holds no records", 0);
  out.validate();
  return out;
}

std::string to_delimited(const TraceSet &traces) {
  std::string out;
  for (const auto &name : traces.secret_names)
    out += "secret:" + name + ",";
  out += "public:" + traces.public_name;
  for (const auto &name : traces.aux_names)
    out += ",aux:" + name;
  out += ",time:" + traces.time_name + "\n";
  for (const auto &r : traces.records) {
    for (double s : r.secret)
      out += format_roundtrip(s) + ",";
    out += format_roundtrip(r.pub[0]);
    for (double a : r.aux)
      out += "," + format_roundtrip(a);
    out += "," + format_roundtrip(r.time) + "\n";
  }
  return out;
}

std::string to_records(const TraceSet &traces) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto &r : traces.records) {
    nlohmann::ordered_json aux = nlohmann::ordered_json::object();
    for (std::size_t j = 0; j < r.aux.size(); ++j)
      aux[traces.aux_names[j]] = r.aux[j];
    doc.push_back({{"secret", r.secret},
                   {"public", r.pub[0]},
                   {"aux", aux},
                   {"time", r.time}});
  }
  return doc.dump(1) + "\n";
}

TraceSet load_traces(const std::filesystem::path &path, TraceFormat format) {
  const std::string text = read_file(path);
  return format == TraceFormat::Records ? parse_records(text)
                                        : parse_delimited(text);
}

TraceSet load_traces(const std::filesystem::path &path) {
  return load_traces(path, format_for(path));
}

void save_traces(const TraceSet &traces, const std::filesystem::path &path,
                 TraceFormat format) {
  write_file(path, format == TraceFormat::Records ? to_records(traces)
                                                  : to_delimited(traces));
}

void save_traces(const TraceSet &traces, const std::filesystem::path &path) {
  save_traces(traces, path, format_for(path));
}

std::pair<double, double> public_domain(const TraceSet &traces) {
  if (traces.records.empty())
    throw ValidationError("trace set is empty");
  double lo = traces.records[0].pub[0], hi = lo;
  for (const auto &r : traces.records) {
    lo = std::min(lo, r.pub[0]);
    hi = std::max(hi, r.pub[0]);
  }
  return {lo, hi};
}

BasisSpec default_basis(const TraceSet &traces) {
  const auto [lo, hi] = public_domain(traces);
  if (!(lo < hi))
    throw UnderDeterminedError("all traces share one public value");
  // The fit count follows the densest secret, which for rectangular
  // experiments is simply the number of distinct publics.
  std::map<std::vector<double>, std::set<double>> per_secret;
  for (const auto &r : traces.records)
    per_secret[r.secret].insert(r.pub[0]);
  std::size_t most = 0;
  for (const auto &[s, ys] : per_secret)
    most = std::max(most, ys.size());
  return fsc::default_basis<double>(lo, hi, most);
}

std::vector<HyperTrace> build_hypertraces(const TraceSet &traces,
                                          const BasisSpec &basis) {
  traces.validate();
  struct Cell {
    std::vector<double> times;
    const std::vector<double> *aux = nullptr;
  };
  std::map<std::vector<double>, std::map<double, Cell>> grouped;
  std::map<std::vector<double>, std::size_t> counts;
  for (const auto &r : traces.records) {
    auto &cell = grouped[r.secret][r.pub[0]];
    cell.times.push_back(r.time);
    cell.aux = &r.aux;
    ++counts[r.secret];
  }

  const std::size_t r_dim = traces.aux_dim();
  std::map<std::vector<double>, CurveFitter<double>> fitters;
  std::vector<HyperTrace> out;
  out.reserve(grouped.size());
  for (auto &[secret, cells] : grouped) {
    if (static_cast<int>(cells.size()) < basis.n_basis)
      throw UnderDeterminedError(
          "secret " + secret_label(secret) + " has " +
          std::to_string(cells.size()) + " distinct public values, fit needs " +
          std::to_string(basis.n_basis));

    std::vector<double> ys;
    ys.reserve(cells.size());
    VectorX<double> times(cells.size());
    MatrixX<double> aux(cells.size(), r_dim);
    Eigen::Index row = 0;
    for (auto &[y, cell] : cells) {
      ys.push_back(y);
      // Sorted summation keeps the mean independent of record order.
      std::sort(cell.times.begin(), cell.times.end());
      double sum = 0.0;
      for (double t : cell.times)
        sum += t;
      times[row] = sum / static_cast<double>(cell.times.size());
      for (std::size_t j = 0; j < r_dim; ++j)
        aux(row, j) = (*cell.aux)[j];
      ++row;
    }

    auto it = fitters.find(ys);
    if (it == fitters.end()) {
      try {
        it = fitters
                 .emplace(ys, CurveFitter<double>(
                                  Eigen::Map<const VectorX<double>>(
                                      ys.data(), ys.size()),
                                  basis))
                 .first;
      } catch (const UnderDeterminedError &e) {
        throw UnderDeterminedError("secret " + secret_label(secret) + ": " +
                                   e.what());
      }
    }
    const auto &fitter = it->second;

    HyperTrace ht;
    ht.secret = secret;
    ht.sample_count = counts[secret];
    ht.timing_curve = fitter.fit(times);
    ht.aux_curves.reserve(r_dim);
    for (std::size_t j = 0; j < r_dim; ++j)
      ht.aux_curves.push_back(fitter.fit(aux.col(j)));
    out.push_back(std::move(ht));
  }
  return out;
}

} // namespace fsc
