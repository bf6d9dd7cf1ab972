#pragma once

#include <filesystem>
#include <string>

#include "pmsn/config.hpp"

namespace pmsn::cli {

struct Context {
  std::string command;
  RunConfig config;
  std::filesystem::path out_dir;
};

struct SimulateFlags {
  std::filesystem::path input;
  bool impulse = false;
  bool compare = false;
  std::size_t neuron = 0;
};

struct TrainFlags {
  std::filesystem::path resume;
};

/// Creates the output directory and writes manifest.json into it.
void write_manifest(const Context& ctx);

int cmd_simulate(const Context& ctx, const SimulateFlags& flags);
int cmd_train(const Context& ctx, const TrainFlags& flags);
int cmd_bench(const Context& ctx);
int cmd_gradcheck(const Context& ctx);
int cmd_impulse(const Context& ctx, std::size_t neuron);

}  // namespace pmsn::cli
