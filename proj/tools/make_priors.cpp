// Regenerates the bundled category prior fixtures under data/priors.

#include <cstdio>
#include <filesystem>

#include "rbp/io.hpp"
#include "rbp/pipeline.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s <output-dir>\n", argv[0]);
    return 2;
  }
  try {
    const rbp::Config cfg = rbp::default_config();
    for (rbp::Category c : rbp::kAllCategories) {
      const auto path = std::filesystem::path(argv[1]) / (std::string(rbp::to_string(c)) + ".json");
      rbp::io::write_prior_fixture(path, c, rbp::category_prior(cfg, c, rbp::surface_seed_for(cfg.seed, c)));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  return 0;
}
