// Command line front end: estimate, figures, tikhonov-table, svd-check.
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "klest/experiment.hpp"
#include "klest/matrix_market.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<long> iters;
  std::optional<double> noise;

  std::map<std::string, std::string> entries() const {
    std::map<std::string, std::string> m;
    if (seed) m["noise.seed"] = std::to_string(*seed);
    if (iters) m["landweber.max_iters"] = std::to_string(*iters);
    if (noise) m["noise.rel_level"] = klest::format_double(*noise);
    return m;
  }
};

klest::ExperimentConfig load(const std::string& path, const Overrides& o) {
  return klest::with_overrides(klest::load_config(path), o.entries());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Source-condition smoothness estimation from Landweber residuals"};
  app.require_subcommand(1);
  Overrides ov;
  app.add_option("--seed", ov.seed, "override noise.seed");
  app.add_option("--iters", ov.iters, "override landweber.max_iters")->check(CLI::PositiveNumber);
  app.add_option("--noise", ov.noise, "override noise.rel_level")->check(CLI::NonNegativeNumber);

  std::string config;
  auto* estimate = app.add_subcommand("estimate", "run the pipeline for one config file");
  estimate->add_option("config", config, "config file")->required();

  std::string figure, out_dir;
  auto* figures = app.add_subcommand("figures", "run a canonical figure experiment");
  figures->add_option("name", figure, "figure name")->required();
  figures->add_option("out_dir", out_dir, "output directory")->required();

  std::vector<std::string> table_configs;
  std::string table_out = "tikhonov_table.csv";
  auto* table = app.add_subcommand("tikhonov-table", "predicted vs observed Tikhonov rates");
  table->add_option("configs", table_configs, "config files")->required();
  table->add_option("-o,--out", table_out, "output CSV");

  std::string svd_config;
  auto* svd_check = app.add_subcommand("svd-check", "spectral summability check");
  svd_check->add_option("config", svd_config, "config file")->required();

  for (auto* sub : {estimate, figures, table, svd_check}) {
    sub->add_option("--seed", ov.seed, "override noise.seed");
    sub->add_option("--iters", ov.iters, "override landweber.max_iters")->check(CLI::PositiveNumber);
    sub->add_option("--noise", ov.noise, "override noise.rel_level")->check(CLI::NonNegativeNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : klest::kExitConfig;
  }

  try {
    if (*estimate) return klest::run_estimate(load(config, ov), std::cerr);
    if (*figures) {
      for (const auto& n : klest::figure_names())
        if (n == figure) return klest::run_figure_suite(figure, out_dir, std::cerr, ov.entries());
      std::cerr << "unknown figure '" << figure << "'; available:";
      for (const auto& n : klest::figure_names()) std::cerr << ' ' << n;
      std::cerr << '\n';
      return klest::kExitConfig;
    }
    if (*table) {
      std::vector<klest::ExperimentConfig> cfgs;
      for (const auto& c : table_configs) cfgs.push_back(load(c, ov));
      return klest::run_tikhonov_table(cfgs, table_out, std::cerr);
    }
    if (*svd_check) return klest::run_svd_check(load(svd_config, ov), std::cout, std::cerr);
  } catch (...) {
    return klest::report_exception(std::cerr);
  }
  return klest::kExitFailure;
}
