#include "cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>

#include "bagged_eb/corn.hpp"
#include "bagged_eb/svg.hpp"

namespace beb::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void check_kind(const fs::path& path, ModelKind model) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  const auto kind = detect_kind(in);
  if (model == ModelKind::PG && kind == DatasetKind::Gaussian)
    throw InputError("schema error: '" + path.string() +
                     "' has Gaussian columns (id,y,D,...) but --model pg expects id,z,n,...");
  if (model == ModelKind::FH && kind == DatasetKind::Count)
    throw InputError("schema error: '" + path.string() +
                     "' has count columns (id,z,n,...) but --model fh expects id,y,D,...");
}

GaussianDataset load_gaussian(const DataSource& src) {
  if (src.embedded) {
    if (*src.embedded == "corn") return corn_dataset();
    throw InputError("unknown embedded dataset '" + *src.embedded + "' (available: corn)");
  }
  check_kind(*src.path, ModelKind::FH);
  return load_gaussian_csv(*src.path);
}

CountDataset load_count(const DataSource& src) {
  if (src.embedded)
    throw InputError("no embedded count dataset '" + *src.embedded +
                     "'; pass a CSV with columns id,z,n[,covariates]");
  check_kind(*src.path, ModelKind::PG);
  return load_count_csv(*src.path);
}

ordered_json fit_json(const FhFitReport& f) {
  return {{"beta", f.params.beta},       {"A", f.params.A},
          {"neg2loglik", f.neg2loglik},  {"boundary_hit", f.boundary_hit},
          {"iterations", f.iterations}};
}

ordered_json fit_json(const PgFitReport& f) {
  return {{"beta", f.params.beta},
          {"nu", f.params.nu},
          {"loglik", f.loglik},
          {"converged", f.converged},
          {"iterations", f.iterations},
          {"nu_at_bound", f.nu_at_bound},
          {"gradient_norm", f.gradient_norm}};
}

void print_fit(std::ostream& out, const FhFitReport& f) {
  out << "model: fay-herriot (ML)\n";
  for (std::size_t j = 0; j < f.params.beta.size(); ++j)
    out << "  beta_" << j << " = " << format_double(f.params.beta[j]) << '\n';
  out << "  A      = " << format_double(f.params.A) << '\n';
  out << "  Q      = " << format_double(f.neg2loglik) << '\n';
  if (f.boundary_hit) out << "  note: A estimate is on the boundary (A = 0); EB collapses to the regression mean\n";
}

void print_fit(std::ostream& out, const PgFitReport& f) {
  out << "model: poisson-gamma (ML)\n";
  for (std::size_t j = 0; j < f.params.beta.size(); ++j)
    out << "  beta_" << j << " = " << format_double(f.params.beta[j]) << '\n';
  out << "  nu     = " << format_double(f.params.nu) << '\n';
  out << "  loglik = " << format_double(f.loglik) << '\n';
  out << "  converged = " << (f.converged ? "yes" : "no") << '\n';
  if (f.nu_at_bound) out << "  note: nu estimate is on the edge of its search range\n";
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << content;
}

std::string opt_num(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

template <class Model>
void run_fit(const Dataset<typename Model::Area>& data, const RunManifest& man,
             const fs::path& out_dir, std::ostream& out) {
  const auto fit = Model::fit(data, {});
  print_fit(out, fit);
  if (!out_dir.empty()) {
    write_manifest(out_dir, man);
    write_file(out_dir / "fit.json", fit_json(fit).dump(2) + "\n");
  }
}

template <class Model>
void run_estimate(const Dataset<typename Model::Area>& data, const RunManifest& man,
                  const fs::path& out_dir, std::ostream& out) {
  const auto res = beb_estimate<Model>(data, man.bootstrap, {}, 0);
  std::ostringstream csv;
  csv << "id,direct,eb,beb,sd,jensen_gap,pct_rel_diff\n";
  for (const auto& a : res.areas)
    csv << a.id << ',' << format_double(a.direct) << ',' << format_double(a.eb) << ','
        << format_double(a.beb) << ',' << format_double(a.bootstrap_sd) << ','
        << format_double(a.jensen_gap) << ',' << opt_num(a.pct_rel_diff) << '\n';

  out << std::left << std::setw(14) << "id" << std::right << std::setw(12) << "direct"
      << std::setw(12) << "EB" << std::setw(12) << "BEB" << std::setw(12) << "sd"
      << std::setw(12) << "rel.diff%" << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& a : res.areas) {
    out << std::left << std::setw(14) << a.id << std::right << std::setw(12) << a.direct
        << std::setw(12) << a.eb << std::setw(12) << a.beb << std::setw(12) << a.bootstrap_sd
        << std::setw(12);
    if (a.pct_rel_diff)
      out << *a.pct_rel_diff;
    else
      out << "NA";
    out << '\n';
  }
  out << std::defaultfloat;
  out << "replicates used: " << res.replicate_bayes.size() << " of " << man.bootstrap.B
      << " (retries " << res.n_retries << ", failed " << res.n_failed << ")\n";

  if (!out_dir.empty()) {
    write_manifest(out_dir, man);
    write_file(out_dir / "estimates.csv", csv.str());
    ordered_json summary;
    summary["fit"] = fit_json(res.fit);
    summary["B"] = man.bootstrap.B;
    summary["n_used"] = res.replicate_bayes.size();
    summary["n_retries"] = res.n_retries;
    summary["n_failed"] = res.n_failed;
    auto& areas = summary["areas"] = ordered_json::array();
    for (const auto& a : res.areas) {
      ordered_json row = {{"id", a.id},         {"direct", a.direct}, {"eb", a.eb},
                          {"beb", a.beb},       {"sd", a.bootstrap_sd},
                          {"jensen_gap", a.jensen_gap}};
      row["pct_rel_diff"] = a.pct_rel_diff ? ordered_json(*a.pct_rel_diff) : ordered_json(nullptr);
      areas.push_back(std::move(row));
    }
    write_file(out_dir / "summary.json", summary.dump(2) + "\n");
  }
}

template <class Model>
void run_diagnose(const Dataset<typename Model::Area>& data, const RunManifest& man,
                  const fs::path& out_dir, std::ostream& out) {
  const auto res = beb_estimate<Model>(data, man.bootstrap, {}, 0);
  const auto table = bootstrap_param_draws(res);
  const typename Model::Options opts{};

  std::ostringstream csv;
  csv << "replicate";
  for (const auto& n : table.names) csv << ',' << n;
  csv << '\n';
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    csv << table.replicate[k];
    for (double v : table.rows[k]) csv << ',' << format_double(v);
    csv << '\n';
  }
  std::ostringstream ml;
  ml << "estimate";
  for (const auto& n : table.names) ml << ',' << n;
  ml << "\nml";
  for (double v : table.ml) ml << ',' << format_double(v);
  ml << "\nmean";
  for (double v : table.mean) ml << ',' << format_double(v);
  ml << '\n';
  for (std::size_t q = 0; q < std::size(kDiagnosticProbs); ++q) {
    ml << 'q' << format_double(kDiagnosticProbs[q]);
    for (std::size_t j = 0; j < table.names.size(); ++j) ml << ',' << format_double(table.quantiles[j][q]);
    ml << '\n';
  }

  std::size_t on_boundary = 0;
  for (const auto& p : res.bootstrap_params) on_boundary += Model::on_boundary(p, opts) ? 1 : 0;
  const double boundary_fraction =
      static_cast<double>(on_boundary) / static_cast<double>(res.bootstrap_params.size());

  out << "bootstrap replicates used: " << table.rows.size() << '\n';
  out << ml.str();
  out << "fraction of bootstrap fits on the boundary ("
      << (Model::name == "fh" ? "A = 0" : "nu at search limit") << "): "
      << format_double(boundary_fraction) << '\n';

  if (!out_dir.empty()) {
    write_manifest(out_dir, man);
    write_file(out_dir / "bootstrap_params.csv", csv.str());
    write_file(out_dir / "param_summary.csv", ml.str());
    write_file(out_dir / "histograms.svg", svg::param_histograms(table, man.bins));
    ordered_json diag;
    diag["fit"] = fit_json(res.fit);
    diag["n_used"] = table.rows.size();
    diag["n_failed"] = res.n_failed;
    diag["boundary_fraction"] = boundary_fraction;
    write_file(out_dir / "diagnostics.json", diag.dump(2) + "\n");
  }
}

void run_simulate(const RunManifest& man, const fs::path& out_dir, std::ostream& out) {
  auto cfg = *man.sim;
  cfg.threads = 0;
  const auto result = run_study(cfg);
  std::ostringstream csv;
  write_csv(csv, result);
  out << csv.str();
  for (std::size_t c = 0; c < result.cells.size(); ++c) {
    const auto& cell = result.cells[c];
    for (std::size_t k = 0; k < cfg.B_grid.size(); ++k) {
      const auto g = paired_gap(cell, k);
      out << "# m=" << cell.m << " truth=" << format_double(cell.truth) << " B=" << cfg.B_grid[k]
          << ": MSE(EB)-MSE(BEB) = " << format_double(g.mean) << " (paired se "
          << format_double(g.se) << ")\n";
    }
  }
  if (!out_dir.empty()) {
    write_manifest(out_dir, man);
    write_file(out_dir / "simulation.csv", csv.str());
    write_file(out_dir / "mse.svg", svg::mse_chart(result));
  }
}

template <class Fn>
void dispatch(const RunManifest& man, Fn&& fn) {
  if (man.model == ModelKind::FH)
    fn(FayHerriotModel{}, load_gaussian(man.data));
  else
    fn(PoissonGammaModel{}, load_count(man.data));
}

std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace

void execute(const RunManifest& man, const fs::path& out_dir, std::ostream& out) {
  if (!out_dir.empty()) fs::create_directories(out_dir);
  if (man.command == "simulate") {
    if (!man.sim) throw InputError("simulate manifest lacks a config");
    run_simulate(man, out_dir, out);
    return;
  }
  if (!man.data.path && !man.data.embedded)
    throw InputError("no dataset given (use --data FILE or --embedded corn)");
  dispatch(man, [&](auto model, const auto& data) {
    using Model = decltype(model);
    if (man.command == "fit")
      run_fit<Model>(data, man, out_dir, out);
    else if (man.command == "estimate")
      run_estimate<Model>(data, man, out_dir, out);
    else if (man.command == "diagnose")
      run_diagnose<Model>(data, man, out_dir, out);
    else
      throw InputError("unknown command '" + man.command + "'");
  });
}

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bagged empirical Bayes estimation for area-level hierarchical models"};
  app.name(argv.empty() ? "bagged-eb" : argv.front());
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string model = "fh";
  std::string data_path, embedded, scheme = "nonparametric", config_path, manifest_path;
  std::optional<std::uint64_t> seed;
  std::size_t B = 0, max_retries = 10, bins = 30;
  std::string out_dir;
  bool full_scale = false;

  auto add_common = [&](CLI::App* sub, bool bootstrap) {
    sub->add_option("--model", model, "Model family")->check(CLI::IsMember({"fh", "pg"}));
    sub->add_option("--out", out_dir, "Output directory (files + manifest.json)");
    sub->add_option("--seed", seed, "64-bit seed (generated and recorded when omitted)");
    if (bootstrap) {
      sub->add_option("--bootstrap,-B", B, "Bootstrap replicates (default 1000)");
      sub->add_option("--scheme", scheme, "Bootstrap scheme")
          ->check(CLI::IsMember({"nonparametric", "parametric", "identity"}));
      sub->add_option("--max-retries", max_retries, "Refit attempts per failed replicate");
    }
  };
  auto add_data = [&](CLI::App* sub) {
    auto* d = sub->add_option("--data", data_path, "CSV dataset (id,y,D,... or id,z,n,...)");
    auto* e = sub->add_option("--embedded", embedded, "Embedded dataset name (corn)");
    d->excludes(e);
  };

  auto* fit = app.add_subcommand("fit", "Maximum likelihood fit of the hyperparameters");
  add_common(fit, false);
  add_data(fit);
  auto* estimate = app.add_subcommand("estimate", "EB and bagged EB estimates per area");
  add_common(estimate, true);
  add_data(estimate);
  auto* diagnose = app.add_subcommand("diagnose", "Bootstrap hyperparameter draws and histograms");
  add_common(diagnose, true);
  add_data(diagnose);
  diagnose->add_option("--bins", bins, "Histogram bins")->check(CLI::PositiveNumber);
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo MSE study");
  add_common(simulate, false);
  simulate->add_option("--config", config_path, "Flat key = value config file");
  simulate->add_flag("--full", full_scale, "Full-scale design (R=5000, m=10..40, B=25,50,100)");
  auto* replay = app.add_subcommand("replay", "Rerun a command from its manifest.json");
  replay->add_option("manifest", manifest_path, "Path to manifest.json")->required();
  replay->add_option("--out", out_dir, "Output directory");

  std::vector<const char*> cargv;
  for (const auto& a : argv) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    RunManifest man;
    if (*replay) {
      man = read_manifest(manifest_path);
    } else {
      man.model = parse_model(model);
      if (!data_path.empty()) man.data.path = fs::absolute(data_path).lexically_normal();
      if (!embedded.empty()) man.data.embedded = embedded;
      man.bootstrap.B = B == 0 ? 1000 : B;
      man.bootstrap.scheme = parse_scheme(scheme);
      man.bootstrap.seed = seed ? *seed : fresh_seed();
      man.bootstrap.max_retries = max_retries;
      man.bins = bins;
      if (*fit) man.command = "fit";
      if (*estimate) man.command = "estimate";
      if (*diagnose) man.command = "diagnose";
      if (*simulate) {
        man.command = "simulate";
        const std::optional<ModelKind> model_flag =
            simulate->count("--model") ? std::optional(parse_model(model)) : std::nullopt;
        bool seed_in_file = false;
        SimConfig cfg;
        if (config_path.empty()) {
          std::istringstream none;
          cfg = parse_sim_config(none, model_flag, full_scale, &seed_in_file);
        } else {
          std::ifstream in(config_path);
          if (!in) throw InputError("cannot open config '" + config_path + "'");
          cfg = parse_sim_config(in, model_flag, full_scale, &seed_in_file);
        }
        if (seed)
          cfg.seed = *seed;
        else if (!seed_in_file)
          cfg.seed = fresh_seed();
        man.model = cfg.model;
        man.sim = cfg;
      }
    }
    execute(man, out_dir, out);
    return kOk;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const FitError& e) {
    err << "fit error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace beb::cli
