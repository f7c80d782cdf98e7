// Command-line runner for scenarios and the built-in gallery.
//
//   cbundle verify-contact <scenario.json>   (also split, construct, bourgeois, contactise, euler)
//   cbundle run <scenario.json>              any recipe
//   cbundle gallery <name> | --list
//
// Exit status: 0 if every check passed, 1 if a check failed or a module
// raised an error, 2 on usage or scenario errors.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "cbundle/gallery.hpp"
#include "cbundle/parallel.hpp"
#include "cbundle/scenario.hpp"

namespace {

int emit(const cbundle::Report& rep, const std::string& out) {
  std::cout << rep.summary();
  if (!out.empty()) {
    const std::string text = rep.to_json().dump(2) + "\n";
    if (out == "-") {
      std::cout << text;
    } else {
      std::ofstream f(out);
      if (!f) {
        std::cerr << "error: cannot write report to '" << out << "'\n";
        return 2;
      }
      f << text;
      std::cout << "report written to " << out << "\n";
    }
  }
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contact forms on principal circle bundles: scenario runner"};
  app.require_subcommand(1);

  double scale = 1.0;
  std::optional<double> tol;
  std::string out;
  int jobs = 0;
  app.add_option("--resolution-scale", scale, "Multiply every sampling resolution")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--tol", tol, "Positivity tolerance (default 1e-9)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", out, "Write the JSON report here ('-' for stdout)");
  app.add_option("--jobs", jobs, "Worker threads (default: CBUNDLE_JOBS or hardware concurrency)")
      ->check(CLI::NonNegativeNumber);

  std::string scenario_path;
  std::string recipe;
  for (const char* r : {"verify-contact", "split", "construct", "bourgeois", "contactise", "euler", "run"}) {
    auto* sub = app.add_subcommand(r, std::string(r) == "run" ? "Run a scenario of any recipe"
                                                             : std::string("Run a ") + r + " scenario");
    sub->fallthrough();
    sub->add_option("scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    sub->callback([&recipe, r] { recipe = r; });
  }
  std::string gallery_name;
  bool list = false;
  auto* gal = app.add_subcommand("gallery", "Run a built-in example");
  gal->fallthrough();
  gal->add_option("name", gallery_name, "Example name");
  gal->add_flag("--list", list, "List the example names");
  gal->callback([&recipe] { recipe = "gallery"; });

  CLI11_PARSE(app, argc, argv);

  cbundle::RunOptions ro;
  ro.resolution_scale = scale;
  ro.tol = tol;
  ro.jobs = jobs;
  if (jobs > 0) cbundle::set_default_jobs(jobs);

  if (recipe == "gallery") {
    if (list || gallery_name.empty()) {
      for (const auto& n : cbundle::gallery_names()) std::cout << n << "\n";
      return gallery_name.empty() && !list ? 2 : 0;
    }
    try {
      return emit(cbundle::gallery(gallery_name, ro), out);
    } catch (const cbundle::ConstraintViolation& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }

  cbundle::Scenario s;
  try {
    s = cbundle::load_scenario(scenario_path);
  } catch (const cbundle::Error& e) {
    std::cerr << "error: " << scenario_path << ": " << e.what() << "\n";
    return 2;
  }
  if (recipe != "run" && s.recipe != recipe) {
    std::cerr << "error: " << scenario_path << " has recipe " << s.recipe << ", not " << recipe << "\n";
    return 2;
  }
  if (out.empty() && s.output) out = *s.output;
  return emit(cbundle::run(s, ro), out);
}
