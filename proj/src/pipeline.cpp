// SPDX-License-Identifier: Apache-2.0

#include "fsc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>

#include "fsc/format.hpp"

namespace fsc {

using nlohmann::json;
using nlohmann::ordered_json;

void PipelineConfig::validate() const {
  if (input.has_value() == bench.has_value())
    throw InvalidSpecError("exactly one of an input file or a model is needed");
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw InvalidSpecError("eps must be positive");
  if (eps_aux && !(*eps_aux > 0.0))
    throw InvalidSpecError("eps_aux must be positive");
  if (max_k && *max_k < 1)
    throw InvalidSpecError("max clusters must be at least 1");
  if (folds < 2)
    throw InvalidSpecError("cross-validation needs at least 2 folds");
  if (n_basis && *n_basis < 4)
    throw InvalidSpecError("n_basis must be at least the spline order 4");
  if (mitigation)
    mitigation->validate();
  fsc::validate(spec);
}

int exit_status(const std::exception &e) {
  if (auto s = dynamic_cast<const StageError *>(&e))
    return s->status();
  if (dynamic_cast<const InfeasibleError *>(&e))
    return kExitInfeasible;
  if (dynamic_cast<const Error *>(&e) ||
      dynamic_cast<const std::filesystem::filesystem_error *>(&e))
    return kExitInput;
  return kExitFailure;
}

std::size_t PipelineResult::public_count() const {
  return traces.distinct_publics().size();
}

namespace {

class Stopwatch {
public:
  explicit Stopwatch(std::vector<StageTiming> &sink, std::string stage)
      : sink_(sink), stage_(std::move(stage)),
        start_(std::chrono::steady_clock::now()) {}
  ~Stopwatch() {
    const auto d = std::chrono::steady_clock::now() - start_;
    sink_.push_back({stage_, std::chrono::duration<double>(d).count()});
  }

private:
  std::vector<StageTiming> &sink_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

template <typename F> auto stage(const char *name, F &&body) {
  try {
    return body();
  } catch (const StageError &) {
    throw;
  } catch (const std::exception &e) {
    throw StageError(name, e.what(), exit_status(e));
  }
}

ordered_json spec_json(const DistanceSpec &spec) {
  return {{"deriv_order", spec.deriv_order},
          {"norm", to_string(spec.norm)},
          {"grid_n", spec.grid_n}};
}

ordered_json curve_json(const FunctionalCurve &c) {
  return {{"order", c.basis.order},
          {"knots", std::vector<double>(c.basis.knots.data(),
                                        c.basis.knots.data() +
                                            c.basis.knots.size())},
          {"coefficients",
           std::vector<double>(c.coefficients.data(),
                               c.coefficients.data() + c.coefficients.size())}};
}

FunctionalCurve curve_from_json(const json &j) {
  const auto knots = j.at("knots").get<std::vector<double>>();
  const auto coef = j.at("coefficients").get<std::vector<double>>();
  const int order = j.at("order").get<int>();
  if (knots.size() != coef.size() + static_cast<std::size_t>(order))
    throw ValidationError("curve knots and coefficients disagree");
  FunctionalCurve c;
  c.basis.order = order;
  c.basis.n_basis = static_cast<int>(coef.size());
  c.basis.lo = knots.front();
  c.basis.hi = knots.back();
  c.basis.knots = Eigen::Map<const Eigen::VectorXd>(
      knots.data(), static_cast<Eigen::Index>(knots.size()));
  validate_basis(c.basis);
  c.coefficients = Eigen::Map<const Eigen::VectorXd>(
      coef.data(), static_cast<Eigen::Index>(coef.size()));
  return c;
}

json nullable(const std::optional<double> &v) {
  return v ? json(round9(*v)) : json(nullptr);
}

} // namespace

PipelineResult run_pipeline(const PipelineConfig &config) {
  stage("config", [&] {
    config.validate();
    return 0;
  });
  PipelineResult r;
  {
    Stopwatch w(r.timings, "load");
    r.traces = stage("load", [&] {
      return config.input ? load_traces(*config.input) : generate(*config.bench);
    });
  }
  if (config.mitigation) {
    Stopwatch w(r.timings, "mitigate");
    r.traces = stage("mitigate", [&] {
      return mitigate_traces(r.traces, *config.mitigation);
    });
  }

  if (config.algo == Algorithm::NonFunctional) {
    Stopwatch w(r.timings, "cluster");
    r.clusters.k = stage("cluster", [&] {
      return nonfunctional_cluster(r.traces, config.eps);
    });
    r.clusters.algorithm = Algorithm::NonFunctional;
    r.clusters.epsilon = config.eps;
    r.clusters.spec = config.spec;
    r.note = "pointwise baseline: cluster count only";
    return r;
  }

  {
    Stopwatch w(r.timings, "fit");
    r.basis = stage("fit", [&] {
      if (!config.n_basis)
        return default_basis(r.traces);
      const auto [lo, hi] = public_domain(r.traces);
      return make_basis(lo, hi, *config.n_basis, 4);
    });
    r.hypertraces = stage("fit", [&] {
      return build_hypertraces(r.traces, r.basis);
    });
  }
  {
    Stopwatch w(r.timings, "cluster");
    const std::size_t max_k = config.max_k.value_or(r.hypertraces.size());
    r.clusters = stage("cluster", [&] {
      return fd_clustering(r.hypertraces, max_k, config.spec, config.eps,
                           config.algo, config.seed);
    });
  }
  if (r.clusters.k == 1) {
    r.note = "noninterference holds for the given inputs";
    return r;
  }
  {
    Stopwatch w(r.timings, "label");
    const DistanceSpec aux_spec{0, config.spec.norm, config.spec.grid_n};
    r.labels = stage("label", [&] {
      return label_hypertraces(r.hypertraces, r.traces.aux_names, r.clusters,
                               config.eps_aux.value_or(config.eps),
                               r.hypertraces.size(), aux_spec);
    });
  }
  {
    Stopwatch w(r.timings, "tree");
    stage("tree", [&] {
      r.tree = learn_tree(r.labels->rows, r.labels->features);
      r.training_accuracy = training_accuracy(*r.tree, r.labels->rows);
      r.discriminant_error = discriminant_error(
          r.hypertraces, r.labels->rows, Discriminant{r.clusters, *r.tree},
          config.spec);
      return 0;
    });
  }
  {
    Stopwatch w(r.timings, "cross_validate");
    r.folds_used = std::min(config.folds, r.labels->rows.size());
    r.accuracy = stage("cross_validate", [&] {
      return cross_validate(r.labels->rows, r.labels->features, r.folds_used,
                            config.seed);
    });
  }
  return r;
}

ordered_json make_report(const PipelineResult &r, const PipelineConfig &config) {
  ordered_json j;
  j["k"] = r.clusters.k;
  j["epsilon"] = round9(config.eps);
  j["eps_aux"] = round9(config.eps_aux.value_or(config.eps));
  j["spec"] = spec_json(config.spec);
  j["algorithm"] = to_string(config.algo);
  j["max_clusters"] = config.max_k ? json(*config.max_k) : json(nullptr);
  j["seed"] = config.seed;
  j["secrets"] = r.hypertraces.empty() ? r.traces.distinct_secrets().size()
                                       : r.hypertraces.size();
  j["publics"] = r.public_count();
  j["records"] = r.traces.records.size();
  if (r.hypertraces.empty())
    j["n_basis"] = nullptr;
  else
    j["n_basis"] = r.basis.n_basis;
  if (config.mitigation) {
    ordered_json m;
    m["kind"] = to_string(config.mitigation->kind);
    if (config.mitigation->kind == MitigationKind::Quantize)
      m["q"] = round9(config.mitigation->q);
    else
      m["t0"] = round9(config.mitigation->t0);
    j["mitigation"] = m;
  } else {
    j["mitigation"] = nullptr;
  }
  j["accuracy"] = nullable(r.accuracy);
  j["training_accuracy"] = nullable(r.training_accuracy);
  j["folds"] = r.accuracy ? json(r.folds_used) : json(nullptr);
  if (r.tree) {
    j["tree_height"] = r.tree->height();
    j["leaf_count"] = r.tree->leaf_count();
    const auto &root = r.tree->nodes.front();
    j["root_feature"] = root.leaf ? json(nullptr)
                                  : json(r.tree->features[root.feature].name);
  } else {
    j["tree_height"] = nullptr;
    j["leaf_count"] = nullptr;
    j["root_feature"] = nullptr;
  }
  j["discriminant_error"] = nullable(r.discriminant_error);
  j["leakage_bits"] = round9(leakage_bits(std::max<std::size_t>(1, r.clusters.k)));
  j["kd_bound"] =
      round9(kd_bound(std::max<std::size_t>(1, r.clusters.k), r.public_count()));
  std::vector<std::size_t> sizes;
  if (!r.clusters.assignment.empty())
    for (const auto &m : r.clusters.members())
      sizes.push_back(m.size());
  j["cluster_sizes"] = sizes;
  j["note"] = r.note;
  j["timings_file"] = "timings.json";
  return j;
}

std::string clusters_csv(const PipelineResult &r) {
  std::string out;
  for (const auto &name : r.traces.secret_names)
    out += "secret:" + name + ",";
  out += "cluster\n";
  for (std::size_t i = 0; i < r.hypertraces.size(); ++i) {
    for (double v : r.hypertraces[i].secret)
      out += format_roundtrip(v) + ",";
    out += std::to_string(r.clusters.assignment[i]) + "\n";
  }
  return out;
}

ordered_json centroids_json(const ClusterResult &c) {
  ordered_json j;
  j["k"] = c.k;
  j["epsilon"] = c.epsilon;
  j["algorithm"] = to_string(c.algorithm);
  j["spec"] = spec_json(c.spec);
  j["assignment"] = c.assignment;
  ordered_json list = ordered_json::array();
  for (std::size_t id = 0; id < c.centroids.size(); ++id) {
    ordered_json e = curve_json(c.centroids[id]);
    e["id"] = id;
    list.push_back(std::move(e));
  }
  j["centroids"] = std::move(list);
  return j;
}

ClusterResult clusters_from_json(const json &j) {
  try {
    ClusterResult c;
    c.k = j.at("k").get<std::size_t>();
    c.epsilon = j.at("epsilon").get<double>();
    c.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    const auto &s = j.at("spec");
    c.spec.deriv_order = s.at("deriv_order").get<int>();
    c.spec.norm = parse_norm(s.at("norm").get<std::string>());
    c.spec.grid_n = s.at("grid_n").get<int>();
    c.assignment = j.at("assignment").get<std::vector<int>>();
    for (const auto &e : j.at("centroids"))
      c.centroids.push_back(curve_from_json(e));
    if (c.centroids.size() != c.k)
      throw ValidationError("centroid count does not match k");
    for (const auto &curve : c.centroids)
      require_same_domain(curve, c.centroids.front());
    return c;
  } catch (const json::exception &e) {
    throw ParseError(std::string("bad clusters file: ") + e.what(), 0);
  }
}

namespace {

Eigen::VectorXd plot_nodes(const PipelineResult &r, std::size_t points) {
  const double lo = r.basis.lo, hi = r.basis.hi;
  Eigen::VectorXd ys(static_cast<Eigen::Index>(points));
  for (std::size_t j = 0; j < points; ++j)
    ys[j] = j + 1 == points ? hi : lo + (hi - lo) * j / (points - 1);
  return ys;
}

} // namespace

std::string curves_csv(const PipelineResult &r, std::size_t points) {
  const Eigen::VectorXd ys = plot_nodes(r, points);
  std::vector<Eigen::VectorXd> samples;
  std::string out = "y";
  for (const auto &h : r.hypertraces) {
    out += ",\"" + secret_label(h.secret) + "\"";
    samples.push_back(sample_curve(h.timing_curve, ys, 0));
  }
  out += "\ncluster";
  for (int c : r.clusters.assignment)
    out += "," + std::to_string(c);
  out += "\n";
  for (Eigen::Index j = 0; j < ys.size(); ++j) {
    out += format_roundtrip(ys[j]);
    for (const auto &s : samples)
      out += "," + format_roundtrip(s[j]);
    out += "\n";
  }
  return out;
}

std::string curves_svg(const PipelineResult &r, std::size_t points) {
  constexpr double W = 800, H = 500, M = 50;
  const Eigen::VectorXd ys = plot_nodes(r, points);
  std::vector<Eigen::VectorXd> samples;
  double vmin = 0.0, vmax = 0.0;
  for (const auto &h : r.hypertraces) {
    samples.push_back(sample_curve(h.timing_curve, ys, 0));
    if (samples.size() == 1) {
      vmin = samples.back().minCoeff();
      vmax = samples.back().maxCoeff();
    }
    vmin = std::min(vmin, samples.back().minCoeff());
    vmax = std::max(vmax, samples.back().maxCoeff());
  }
  if (vmax <= vmin)
    vmax = vmin + 1.0;
  const double lo = r.basis.lo, hi = r.basis.hi;
  auto px = [&](double y) { return M + (W - 2 * M) * (y - lo) / (hi - lo); };
  auto py = [&](double v) {
    return H - M - (H - 2 * M) * (v - vmin) / (vmax - vmin);
  };
  char buf[128];
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" "
                    "height=\"500\" viewBox=\"0 0 800 500\">\n"
                    "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%g\" y=\"%g\" font-size=\"12\">%.4g s</text>\n", 4.0,
                M - 8, vmax);
  out += buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%g\" y=\"%g\" font-size=\"12\">%.4g s</text>\n", 4.0,
                H - M + 16, vmin);
  out += buf;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const int c = r.clusters.assignment[i];
    const double hue = std::fmod(c * 137.508, 360.0);
    std::snprintf(buf, sizeof(buf),
                  "<polyline fill=\"none\" stroke=\"hsl(%.1f,70%%,45%%)\" "
                  "stroke-width=\"1\" data-cluster=\"%d\" points=\"",
                  hue, c);
    out += buf;
    for (Eigen::Index j = 0; j < ys.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%s%.2f,%.2f", j ? " " : "", px(ys[j]),
                    py(samples[i][j]));
      out += buf;
    }
    out += "\"/>\n";
  }
  return out + "</svg>\n";
}

void write_bundle(const PipelineResult &r, const PipelineConfig &config,
                  const std::filesystem::path &dir) {
  stage("write", [&] {
    write_file(dir / "report.json", make_report(r, config).dump(2) + "\n");
    ordered_json t = ordered_json::object();
    for (const auto &s : r.timings)
      t[s.stage] = t.contains(s.stage) ? t[s.stage].get<double>() + s.seconds
                                       : s.seconds;
    write_file(dir / "timings.json", t.dump(2) + "\n");
    if (r.clusters.assignment.empty())
      return 0;
    write_file(dir / "clusters.csv", clusters_csv(r));
    write_file(dir / "centroids.json", centroids_json(r.clusters).dump(2) + "\n");
    if (r.tree) {
      write_file(dir / "tree.txt", tree_to_text(*r.tree));
      write_file(dir / "tree.dot", tree_to_dot(*r.tree));
    } else {
      write_file(dir / "tree.txt", r.note + "\n");
      write_file(dir / "tree.dot", "digraph tree {\n}\n");
    }
    write_file(dir / "curves.csv", curves_csv(r));
    write_file(dir / "curves.svg", curves_svg(r));
    return 0;
  });
}

RemoteObservation load_observation(const std::filesystem::path &path) {
  const std::string text = read_file(path);
  RemoteObservation obs;
  std::size_t line_no = 0, y_col = 0, t_col = 1, width = 0;
  bool header = true;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = trim(std::string_view(text).substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty())
      continue;
    const auto cells = split(line, ',');
    if (header) {
      header = false;
      width = cells.size();
      const bool numeric = std::all_of(cells.begin(), cells.end(), [](auto c) {
        try {
          parse_double(c);
          return true;
        } catch (const std::invalid_argument &) {
          return false;
        }
      });
      if (numeric && width >= 2) {
        obs.samples.push_back({parse_double(cells[0]), parse_double(cells[1])});
        continue;
      }
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto name = trim(cells[c]);
        if (name.starts_with("public:") || name == "y")
          y_col = c;
        if (name.starts_with("time:") || name == "t")
          t_col = c;
      }
      if (width < 2 || y_col == t_col)
        throw ParseError("observation header needs a public and a time column",
                         line_no);
      continue;
    }
    if (cells.size() != width)
      throw ParseError("expected " + std::to_string(width) + " columns",
                       line_no);
    try {
      obs.samples.push_back(
          {parse_double(cells[y_col]), parse_double(cells[t_col])});
    } catch (const std::invalid_argument &e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (obs.samples.empty())
    throw ValidationError("observation file has no samples");
  return obs;
}

ordered_json match_report(const MatchResult &m) {
  ordered_json j;
  j["cluster_id"] = m.cluster;
  j["ambiguous"] = m.ambiguous;
  std::vector<double> d;
  for (double v : m.distances)
    d.push_back(round9(v));
  j["distances"] = d;
  j["leakage_bits"] = round9(m.leakage_bits);
  j["kd_bound"] = round9(m.kd_bound);
  return j;
}

} // namespace fsc
