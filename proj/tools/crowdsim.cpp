#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "crowd/crowd.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_invalid = 1;
constexpr int exit_runtime = 2;

bool is_input_error(crowd::ErrorCode c) {
  using crowd::ErrorCode;
  switch (c) {
    case ErrorCode::parse_error:
    case ErrorCode::validation_error:
    case ErrorCode::out_of_bounds:
    case ErrorCode::overlap_conflict:
    case ErrorCode::disconnected_domain:
    case ErrorCode::dimension_mismatch:
      return true;
    default:
      return false;
  }
}

crowd::Scenario load(const std::string& file, const std::string& preset) {
  if (!preset.empty()) {
    auto s = crowd::presets::by_name(preset);
    if (!s) throw crowd::Error(crowd::ErrorCode::validation_error, "unknown preset '" + preset + "'");
    return *s;
  }
  return crowd::parse_scenario(file);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Macroscopic crowd simulation on a uniform grid"};
  app.require_subcommand(1);

  std::string file, preset, out_dir;
  int every = 0, steps = -1;
  bool images = false, quiet = false;

  auto* run = app.add_subcommand("run", "run a scenario file or a built-in preset");
  run->add_option("scenario", file, "scenario file");
  run->add_option("--preset", preset, "built-in preset name");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--snapshot-every", every, "snapshot interval in steps")->check(CLI::PositiveNumber);
  run->add_option("--steps", steps, "number of steps")->check(CLI::NonNegativeNumber);
  run->add_flag("--images", images, "also write PGM images");
  run->add_flag("-q,--quiet", quiet, "no progress output");

  auto* val = app.add_subcommand("validate", "check a scenario file without running it");
  std::string val_file;
  val->add_option("scenario", val_file, "scenario file")->required();

  auto* pre = app.add_subcommand("presets", "list built-in presets, or print one as a scenario file");
  std::string dump;
  pre->add_option("name", dump, "preset to print");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? exit_ok : exit_invalid;  // --help exits cleanly
  }

  try {
    if (*pre) {
      if (dump.empty()) {
        for (const auto& n : crowd::presets::names()) {
          std::printf("%-26s %016llx\n", n.c_str(),
                      static_cast<unsigned long long>(crowd::digest(*crowd::presets::by_name(n))));
        }
        return exit_ok;
      }
      auto s = crowd::presets::by_name(dump);
      if (!s) {
        std::cerr << "error: unknown preset '" << dump << "'\n";
        return exit_invalid;
      }
      std::cout << crowd::serialize(*s);
      return exit_ok;
    }

    if (*val) {
      const auto s = crowd::parse_scenario_text([&] {
        std::ifstream is(val_file);
        if (!is) throw crowd::Error(crowd::ErrorCode::io_error, "cannot open " + val_file);
        std::stringstream buf;
        buf << is.rdbuf();
        return buf.str();
      }());
      const auto r = crowd::validate(s);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      for (const auto& e : r.errors) std::cerr << "error: " << e << '\n';
      if (!r.ok()) return exit_invalid;
      std::cout << s.name << ": ok\n";
      return exit_ok;
    }

    if (file.empty() == preset.empty()) {
      std::cerr << "error: give exactly one of a scenario file or --preset\n";
      return exit_invalid;
    }
    const auto s = load(file, preset);
    for (const auto& w : crowd::validate(s).warnings) std::cerr << "warning: " << w << '\n';

    crowd::RunOptions opts;
    if (!out_dir.empty()) opts.directory = out_dir;
    if (every > 0) opts.snapshot_every = every;
    if (steps >= 0) opts.steps = steps;
    if (images) opts.images = true;
    const int total = opts.steps.value_or(s.schedule.n_steps);
    if (!quiet) {
      opts.observer = [&](const crowd::SimulationState& st, std::span<const crowd::PopulationReport>) {
        if (st.step % 100 == 0 || st.step == total) {
          std::cerr << "step " << st.step << "/" << total;
          for (std::size_t p = 0; p < st.populations.size(); ++p)
            std::cerr << "  pop" << st.populations[p].id << " mass " << st.mass(p);
          std::cerr << '\n';
        }
      };
    }
    const auto summary = crowd::run(s, opts);
    std::cout << s.name << ": " << summary.steps_run << " steps" << (summary.drained ? ", drained" : "") << '\n';
    return exit_ok;
  } catch (const crowd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_input_error(e.code()) ? exit_invalid : exit_runtime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_runtime;
  }
}
