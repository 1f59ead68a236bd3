#include <CLI11.hpp>
#include <iostream>

#include "solitons/commands.hpp"

int main(int argc, char** argv) {
  solitons::CommandOptions opts;
  std::vector<std::string> rest;
  double tol = 0.0;

  CLI::App app{"Hyperbolic Ricci / Yamabe soliton workbench"};
  app.add_option("command", opts.command, "describe | check | integrate | fit")
      ->required()
      ->check(CLI::IsMember({"describe", "check", "integrate", "fit"}));
  app.add_option("manifest", opts.manifest, "manifest JSON file")->required();
  app.add_option("args", rest, "check ids (check) or the integrand expression (integrate)");
  app.add_option("--grid", opts.grid, "node counts per coordinate, e.g. 32,64")->delimiter(',');
  auto* tol_opt = app.add_option("--tol", tol, "tolerance replacing the pointwise, integral and hypothesis defaults");
  app.add_option("--out", opts.out, "also write the report to this file");
  app.add_option("--checks", opts.checks, "comma separated check ids")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (*tol_opt) opts.tol = tol;

  if (opts.command == "integrate") {
    for (const auto& a : rest) opts.expression += (opts.expression.empty() ? "" : " ") + a;
  } else if (opts.command == "check") {
    opts.checks.insert(opts.checks.end(), rest.begin(), rest.end());
  } else if (!rest.empty()) {
    std::cerr << "error: " << opts.command << " takes no extra arguments\n";
    return 2;
  }
  return solitons::run_command(opts, std::cout, std::cerr);
}
