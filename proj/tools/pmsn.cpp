#include <CLI11/CLI11.hpp>
#include <iostream>
#include <optional>

#include "commands.hpp"
#include "pmsn/error.hpp"
#include "pmsn/version.hpp"

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kNumeric = 2, kIo = 3 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel multi-compartment spiking neuron engine"};
  app.set_version_flag("--version", std::string(pmsn::kVersion) + " (" + pmsn::kGitDescribe + ")");
  app.require_subcommand(1);
  app.fallthrough();

  std::filesystem::path config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> precision;
  app.add_option("--config", config_path, "TOML run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Seed overriding the config");
  app.add_option("--workers", workers, "Worker threads overriding the config")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Output directory (default out/<command>)");
  app.add_option("--precision", precision, "Storage precision")->check(CLI::IsMember({"single", "double"}));

  pmsn::cli::SimulateFlags sim;
  auto* simulate = app.add_subcommand("simulate", "Run one PMSN layer and write traces");
  simulate->add_option("--input", sim.input, "CSV input: one row per step, one column per neuron")
      ->check(CLI::ExistingFile);
  simulate->add_flag("--impulse", sim.impulse, "Write the impulse response instead of a simulation");
  simulate->add_flag("--compare", sim.compare, "Run serial and parallel routes and summarize the deviation");
  simulate->add_option("--neuron", sim.neuron, "Neuron for --impulse");

  pmsn::cli::TrainFlags tr;
  auto* train = app.add_subcommand("train", "Train a spiking network and write metrics and a checkpoint");
  train->add_option("--resume", tr.resume, "Checkpoint to continue from")->check(CLI::ExistingFile);

  auto* bench = app.add_subcommand("bench", "Timing table and energy report");
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check, JSON report");

  std::size_t impulse_neuron = 0;
  auto* impulse = app.add_subcommand("impulse", "Impulse response traces and eigenmode histograms");
  impulse->add_option("--neuron", impulse_neuron, "Neuron whose traces are written");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kValidation;
  }

  try {
    pmsn::cli::Context ctx;
    ctx.command = app.get_subcommands().front()->get_name();
    if (!config_path.empty()) ctx.config = pmsn::load_run_config(config_path);
    if (seed) ctx.config.seed = *seed;
    if (workers) ctx.config.workers = *workers;
    if (precision) ctx.config.precision = *precision == "double" ? pmsn::Precision::kDouble : pmsn::Precision::kSingle;
    ctx.out_dir = out_dir.empty() ? std::filesystem::path("out") / ctx.command : out_dir;
    pmsn::cli::write_manifest(ctx);

    if (*simulate) return pmsn::cli::cmd_simulate(ctx, sim);
    if (*train) return pmsn::cli::cmd_train(ctx, tr);
    if (*bench) return pmsn::cli::cmd_bench(ctx);
    if (*gradcheck) return pmsn::cli::cmd_gradcheck(ctx);
    if (*impulse) return pmsn::cli::cmd_impulse(ctx, impulse_neuron);
  } catch (const pmsn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kValidation;
  } catch (const pmsn::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kValidation;
  } catch (const pmsn::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kValidation;
  } catch (const pmsn::InvalidState& e) {
    std::cerr << "invalid state: " << e.what() << '\n';
    return kValidation;
  } catch (const pmsn::NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const pmsn::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  }
  return kOk;
}
