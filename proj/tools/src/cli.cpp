#include "sedkit/cli.h"

#include <filesystem>
#include <iostream>

#include "commands.h"

namespace sedkit::cli {

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frame-level sound event detection toolkit"};
  app.name(args.empty() ? "sedkit" : fs::path(args.front()).filename().string());
  app.set_version_flag("--version", SEDKIT_VERSION);
  app.require_subcommand(1);

  CommonOptions common;
  const std::vector<Command> commands{
      add_rasterize(app, common),       add_weights(app, common),     add_sample(app, common),
      add_augment(app, common),         add_resample(app, common),    add_distill_targets(app, common),
      add_probe_train(app, common),     add_postprocess(app, common), add_eval_psds(app, common),
      add_eval_onset_f(app, common),    add_aso(app, common),
  };

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("sedkit");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  for (const auto& cmd : commands) {
    if (!cmd.app->parsed()) continue;
    const std::string name = cmd.app->get_name();
    try {
      RunContext ctx(name, cmd.app, common, out, err);
      cmd.run(ctx);
      return kExitOk;
    } catch (const IoError& e) {
      err << name << ": I/O error: " << e.what() << '\n';
      return kExitIo;
    } catch (const fs::filesystem_error& e) {
      err << name << ": I/O error: " << e.what() << '\n';
      return kExitIo;
    } catch (const UsageError& e) {
      err << name << ": usage error: " << e.what() << '\n';
      return kExitValidation;
    } catch (const std::exception& e) {
      err << name << ": error: " << e.what() << '\n';
      return kExitValidation;
    }
  }
  return kExitValidation;
}

int run_cli(int argc, char** argv) {
  return run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace sedkit::cli
