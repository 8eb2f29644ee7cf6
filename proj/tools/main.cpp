#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hrb/io.hpp"

namespace {

hrb::ParameterVector parse_mu(const std::string& text) {
  hrb::ParameterVector mu;
  std::stringstream ss(text);
  std::string item;
  int i = 0;
  while (std::getline(ss, item, ',')) {
    if (i == 4) throw std::invalid_argument("--mu expects 4 comma-separated numbers");
    std::size_t used = 0;
    mu[i++] = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("--mu: bad number '" + item + "'");
  }
  if (i != 4) throw std::invalid_argument("--mu expects 4 comma-separated numbers");
  return mu;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical reduced-basis solver and parameter estimation"};
  app.require_subcommand(1);

  std::string config, out, mu_text;
  std::optional<std::uint64_t> seed;

  auto* greedy = app.add_subcommand("greedy", "Build a certified reduced model and test it");
  auto* optimize = app.add_subcommand("optimize", "Estimate parameters with FO and TR-RB");
  auto* solve = app.add_subcommand("solve", "Single full-order (and reduced) solve");
  for (CLI::App* sub : {greedy, optimize, solve}) {
    sub->add_option("--config", config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory (default: output.dir from the config)");
  }
  for (CLI::App* sub : {greedy, optimize}) sub->add_option("--seed", seed, "Random seed");
  solve->add_option("--mu", mu_text, "Parameter a,b,c,d")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    hrb::ExperimentConfig cfg = hrb::load_config(config);
    if (seed) cfg.seed = *seed;
    const std::filesystem::path dir = out.empty() ? cfg.output.dir : out;
    if (greedy->parsed()) {
      const hrb::GreedyTable t = hrb::cmd_greedy(cfg, dir);
      std::cout << "greedy: l=(" << t.result.model.bases.ly << "," << t.result.model.bases.lq
                << ") e_hat=" << t.result.e_hat << " max test error=(" << t.max_error.y << ","
                << t.max_error.q << ") -> " << dir.string() << '\n';
      return t.result.converged ? 0 : 2;
    }
    if (optimize->parsed()) {
      const hrb::OptimizeReport r = hrb::cmd_optimize(cfg, dir);
      auto line = [](const char* name, const hrb::OptimResult& o) {
        std::cout << name << ": mu=" << hrb::to_string(o.mu_opt) << " iterations=" << o.iterations
                  << " fom=" << o.fom_solves;
        if (o.e_rel) std::cout << " e_rel=" << *o.e_rel;
        std::cout << '\n';
      };
      if (r.reference) line("FO", *r.reference);
      line("TR-RB", r.tr_rb);
      return 0;
    }
    hrb::cmd_solve(cfg, parse_mu(mu_text), dir);
    std::cout << "solve -> " << dir.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
