#include <iostream>
#include <string>
#include <vector>

#include <boost/program_options.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "output.hpp"

namespace po = boost::program_options;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

void usage(std::ostream& out, const po::options_description& opts) {
  out << "usage: symco <command> [options]\n\ncommands:";
  for (const auto& c : symco::cli::command_names()) out << " " << c;
  out << "\n\n" << opts << "\nexit status: 0 pass, 1 runtime error or failed check, 2 configuration error\n";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace symco::cli;
  po::options_description opts("options");
  opts.add_options()
      ("help,h", "show this help")
      ("version", "print library versions")
      ("config,c", po::value<std::string>(), "JSON run configuration")
      ("seed", po::value<std::uint64_t>(), "master seed")
      ("replicates,r", po::value<std::size_t>(), "number of replicates")
      ("workers,w", po::value<unsigned>(), "worker threads")
      ("out,o", po::value<std::string>(), "output directory (default $SYMCO_OUT_DIR, then symco_out)")
      ("set", po::value<std::vector<std::string>>()->composing(), "override parameters.KEY (dotted) with VALUE: KEY=VALUE");
  po::options_description hidden;
  hidden.add_options()("command", po::value<std::string>());
  po::options_description all;
  all.add(opts).add(hidden);
  po::positional_options_description pos;
  pos.add("command", 1);

  Overrides o;
  try {
    po::variables_map vm;
    po::store(po::command_line_parser(argc, argv).options(all).positional(pos).run(), vm);
    po::notify(vm);
    if (vm.count("help")) {
      usage(std::cout, opts);
      return kExitPass;
    }
    if (vm.count("version")) {
      std::cout << version_info().dump(2) << "\n";
      return kExitPass;
    }
    if (vm.count("command")) o.command = vm["command"].as<std::string>();
    if (vm.count("config")) o.config_path = vm["config"].as<std::string>();
    if (vm.count("seed")) o.seed = vm["seed"].as<std::uint64_t>();
    if (vm.count("replicates")) o.replicates = vm["replicates"].as<std::size_t>();
    if (vm.count("workers")) o.workers = vm["workers"].as<unsigned>();
    if (vm.count("out")) o.output_dir = vm["out"].as<std::string>();
    if (vm.count("set")) o.assignments = vm["set"].as<std::vector<std::string>>();
  } catch (const po::error& e) {
    std::cerr << "symco: " << e.what() << "\n";
    usage(std::cerr, opts);
    return kExitConfig;
  }
  if (!o.command && !o.config_path) {
    usage(std::cerr, opts);
    return kExitConfig;
  }

  RunConfig config;
  try {
    config = load_config(o);
  } catch (const ConfigError& e) {
    std::cerr << "symco: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "symco: configuration error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const auto result = run_command(config);
    write_outputs(config.output_dir, result.files, config.document);
    if (!result.passed) {
      std::cerr << "symco: " << config.command << ": embedded check failed (see " << config.output_dir
                << "/results.json)\n";
      return kExitFailure;
    }
    return kExitPass;
  } catch (const ConfigError& e) {
    std::cerr << "symco: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "symco: " << config.command << " failed: " << e.what() << "\n";
    return kExitFailure;
  }
}
