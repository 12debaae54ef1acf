// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

#include "fsc/format.hpp"
#include "fsc/pipeline.hpp"

namespace {

using namespace fsc;

struct AnalysisFlags {
  std::string input, model;
  double eps = 0.001;
  double eps_aux = 0.0;
  int deriv_order = 1;
  std::string norm = "2";
  int grid_n = 512;
  std::size_t max_k = 0;
  std::string algo = "hierarchical";
  std::size_t folds = 20;
  std::uint64_t seed = 0;
  int n_basis = 0;
  double quantize_q = 0.0;
  double double_t0 = 0.0;
  std::string out;
};

void add_spec_flags(CLI::App *cmd, AnalysisFlags &f) {
  cmd->add_option("--deriv-order", f.deriv_order, "derivative order i (0..2)")
      ->capture_default_str();
  cmd->add_option("--norm", f.norm, "norm p: 1, 2 or inf")->capture_default_str();
  cmd->add_option("--grid-n", f.grid_n, "quadrature grid intervals")
      ->capture_default_str();
}

BenchConfig bench_from_file(const std::string &path) {
  return parse_bench_config(read_file(path));
}

PipelineConfig pipeline_config(const AnalysisFlags &f) {
  PipelineConfig c;
  if (!f.input.empty())
    c.input = f.input;
  if (!f.model.empty())
    c.bench = bench_from_file(f.model);
  c.eps = f.eps;
  if (f.eps_aux > 0.0)
    c.eps_aux = f.eps_aux;
  c.spec.deriv_order = f.deriv_order;
  c.spec.norm = parse_norm(f.norm);
  c.spec.grid_n = f.grid_n;
  if (f.max_k > 0)
    c.max_k = f.max_k;
  c.algo = parse_algorithm(f.algo);
  c.folds = f.folds;
  c.seed = f.seed;
  if (f.n_basis > 0)
    c.n_basis = f.n_basis;
  if (f.quantize_q > 0.0 && f.double_t0 > 0.0)
    throw InvalidSpecError("choose one mitigation scheme");
  if (f.quantize_q > 0.0)
    c.mitigation = MitigationScheme{MitigationKind::Quantize, f.quantize_q};
  if (f.double_t0 > 0.0)
    c.mitigation =
        MitigationScheme{MitigationKind::DoubleScheme, 1.0, f.double_t0};
  c.out = f.out;
  return c;
}

void print_summary(const PipelineResult &r, const PipelineConfig &c) {
  const auto report = make_report(r, c);
  std::cout << "k = " << r.clusters.k << "\n";
  if (!r.note.empty())
    std::cout << r.note << "\n";
  if (r.accuracy)
    std::printf("accuracy = %.4f (%zu folds), tree height %zu, %zu leaves\n",
                *r.accuracy, r.folds_used, r.tree->height(),
                r.tree->leaf_count());
  std::printf("leakage = %.4f bits\n", report["leakage_bits"].get<double>());
}

int run(int argc, char **argv) {
  CLI::App app{"Functional timing side-channel discovery"};
  app.require_subcommand(1);

  // generate
  auto *gen = app.add_subcommand("generate", "write synthetic benchmark traces");
  std::string gen_model, gen_kind, gen_out;
  double gen_noise = 1e-4;
  std::uint64_t gen_seed = 0;
  std::size_t gen_secrets = 0, gen_repeats = 1;
  std::vector<std::string> gen_params;
  auto *model_opt = gen->add_option("--model", gen_model, "key = value model file");
  gen->add_option("--kind", gen_kind, "benchmark kind")->excludes(model_opt);
  gen->add_option("--noise", gen_noise, "noise sigma in seconds")->excludes(model_opt);
  gen->add_option("--seed", gen_seed, "noise seed")->excludes(model_opt);
  gen->add_option("--secrets", gen_secrets, "number of secrets (0 = canonical)")
      ->excludes(model_opt);
  gen->add_option("--repeats", gen_repeats, "samples per (secret, public)")
      ->excludes(model_opt);
  gen->add_option("--param", gen_params, "per-kind parameter key=value")
      ->excludes(model_opt);
  gen->add_option("--out", gen_out, "trace file (.json for records)")->required();

  // analyze
  AnalysisFlags af;
  auto *ana = app.add_subcommand("analyze", "cluster, explain and report");
  auto *in_opt = ana->add_option("--input", af.input, "trace file");
  ana->add_option("--model", af.model, "benchmark model file")->excludes(in_opt);
  ana->add_option("--eps", af.eps, "indistinguishability bound")->capture_default_str();
  ana->add_option("--eps-aux", af.eps_aux, "aux clustering bound (default eps)");
  add_spec_flags(ana, af);
  ana->add_option("--max-clusters", af.max_k, "cluster bound K (default |secrets|)");
  ana->add_option("--algo", af.algo, "hierarchical, kmeans or nonfunctional")
      ->capture_default_str();
  ana->add_option("--folds", af.folds, "cross-validation folds")->capture_default_str();
  ana->add_option("--seed", af.seed, "seed for k-means and folds")->capture_default_str();
  ana->add_option("--n-basis", af.n_basis, "spline basis size override");
  ana->add_option("--quantize", af.quantize_q, "mitigate first: slot width q");
  ana->add_option("--double-scheme", af.double_t0, "mitigate first: start t0");
  ana->add_option("--out", af.out, "report directory");

  // mitigate
  auto *mit = app.add_subcommand("mitigate", "apply a release schedule to traces");
  std::string mit_in, mit_out, mit_scheme = "quantize";
  double mit_q = 4.5, mit_t0 = 4.0;
  mit->add_option("--input", mit_in, "trace file")->required();
  mit->add_option("--scheme", mit_scheme, "quantize or double")->capture_default_str();
  mit->add_option("--q", mit_q, "quantization slot width")->capture_default_str();
  mit->add_option("--t0", mit_t0, "double-scheme start")->capture_default_str();
  mit->add_option("--out", mit_out, "output trace file")->required();

  // match
  auto *mat = app.add_subcommand("match", "match a remote observation to clusters");
  std::string mat_clusters, mat_obs, mat_out;
  AnalysisFlags mf;
  mat->add_option("--clusters", mat_clusters, "centroids.json of a prior run")
      ->required();
  mat->add_option("--observation", mat_obs, "y,t samples")->required();
  add_spec_flags(mat, mf);
  mat->add_option("--out", mat_out, "write the match record here");

  // report
  auto *rep = app.add_subcommand("report", "print a stored report bundle");
  std::string rep_dir;
  rep->add_option("--out", rep_dir, "report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (gen->parsed()) {
    BenchConfig config;
    if (!gen_model.empty()) {
      config = bench_from_file(gen_model);
    } else {
      if (gen_kind.empty())
        throw InvalidSpecError("generate needs --model or --kind");
      config.model.kind = parse_bench_kind(gen_kind);
      config.model.noise_sigma = gen_noise;
      config.model.seed = gen_seed;
      config.model.repeats = gen_repeats;
      config.secret_count = gen_secrets;
      for (const auto &kv : gen_params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
          throw InvalidSpecError("--param expects key=value");
        try {
          config.model.params[kv.substr(0, eq)] = parse_double(kv.substr(eq + 1));
        } catch (const std::invalid_argument &e) {
          throw InvalidSpecError(e.what());
        }
      }
    }
    const TraceSet traces = generate(config);
    save_traces(traces, gen_out);
    std::cout << traces.records.size() << " traces written to " << gen_out << "\n";
    return kExitOk;
  }

  if (ana->parsed()) {
    const PipelineConfig config = pipeline_config(af);
    const PipelineResult result = run_pipeline(config);
    if (!config.out.empty())
      write_bundle(result, config, config.out);
    print_summary(result, config);
    return kExitOk;
  }

  if (mit->parsed()) {
    MitigationScheme scheme{parse_mitigation(mit_scheme), mit_q, mit_t0};
    save_traces(mitigate_traces(load_traces(mit_in), scheme), mit_out);
    return kExitOk;
  }

  if (mat->parsed()) {
    const ClusterResult clusters =
        clusters_from_json(nlohmann::json::parse(read_file(mat_clusters)));
    DistanceSpec spec{mf.deriv_order, parse_norm(mf.norm), mf.grid_n};
    const MatchResult m = match_remote(load_observation(mat_obs), clusters, spec);
    const std::string text = match_report(m).dump(2) + "\n";
    if (!mat_out.empty())
      write_file(mat_out, text);
    std::cout << text;
    return kExitOk;
  }

  if (rep->parsed()) {
    const std::filesystem::path dir = rep_dir;
    const auto report = nlohmann::ordered_json::parse(read_file(dir / "report.json"));
    std::cout << report.dump(2) << "\n";
    if (std::filesystem::exists(dir / "tree.txt"))
      std::cout << "\n" << read_file(dir / "tree.txt");
    return kExitOk;
  }
  return kExitFailure;
}

} // namespace

int main(int argc, char **argv) {
  try {
    return run(argc, argv);
  } catch (const nlohmann::json::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_status(e);
  }
}
