// Command-line runner over the mfglab C interface.
#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "mfglab/mfglab.h"

namespace {

int report(mfglab_status s) {
  std::fprintf(stderr, "mfglab: error %d: %s\n", int(s), mfglab_last_error());
  return int(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean field game experiments on the periodic torus"};
  std::string config, out, subcommand;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string names;
  for (size_t i = 0; i < mfglab_subcommand_count(); ++i) names += std::string(i ? ", " : "") + mfglab_subcommand_name(i);
  app.add_option("subcommand", subcommand, "One of: " + names)->required();
  app.add_option("--config", config, "YAML experiment configuration")->required()->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out, "Output directory (overrides output.dir)");
  auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides experiment.seed)");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.set_version_flag("--version", mfglab_version());
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return MFGLAB_ERR_INVALID_ARGUMENT;
  }

  mfglab_context* ctx = nullptr;
  if (auto s = mfglab_context_from_file(config.c_str(), 1, &ctx); s != MFGLAB_OK) return report(s);
  mfglab_status s = mfglab_context_set_threads(ctx, threads);
  if (s == MFGLAB_OK && *seed_opt) s = mfglab_context_set_seed(ctx, seed);
  if (s == MFGLAB_OK && *out_opt) s = mfglab_context_set_output_dir(ctx, out.c_str());
  if (s == MFGLAB_OK) s = mfglab_run(ctx, subcommand.c_str());
  if (s == MFGLAB_OK) std::printf("%s\n", mfglab_context_last_summary(ctx));
  mfglab_context_destroy(ctx);
  return s == MFGLAB_OK ? 0 : report(s);
}
