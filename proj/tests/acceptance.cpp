// Runs the eleven acceptance criteria and prints one PASS/FAIL line per criterion.
// Usage: acceptance [--suite fast|full] [--threads N] [--only I] [--json PATH]

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "circsketch/selftest.hpp"

int main(int argc, char** argv) {
  namespace st = circsketch::selftest;
  st::Config cfg;
  cfg.cli = CIRCSKETCH_CLI;
  int only = 0;
  std::string json_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    auto value = [&]() -> std::string {
      if (i + 1 >= argc) {
        std::cerr << "missing value for " << arg << "\n";
        std::exit(2);
      }
      return argv[++i];
    };
    if (arg == "--suite") {
      cfg.full = value() == "full";
    } else if (arg == "--threads") {
      cfg.threads = static_cast<unsigned>(std::stoul(value()));
    } else if (arg == "--only") {
      only = std::stoi(value());
    } else if (arg == "--json") {
      json_path = value();
    } else {
      std::cerr << "unknown argument " << arg << "\n";
      return 2;
    }
  }
  cfg.log = [](const std::string& line) { std::cout << line << std::endl; };

  st::Suite suite(cfg);
  std::cout << "suite: " << (cfg.full ? "full" : "fast") << std::endl;
  std::vector<st::Criterion> results;
  if (only)
    results.push_back(suite.run_one(only));
  else
    results = suite.run_all();

  bool all = true;
  for (const auto& c : results) all = all && c.pass;
  if (!json_path.empty()) std::ofstream(json_path) << st::report(results, cfg.full).dump(2) << "\n";
  std::cout << (all ? "ALL PASS" : "SOME CRITERIA FAILED") << std::endl;
  return all ? 0 : 1;
}
