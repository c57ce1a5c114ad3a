// dwellkit — stabilizing time constraints for switched systems with jumps.
//
//   dwellkit bounds      --input sys.json [--mode-dependent] [--norm ...]
//   dwellkit lyapunov    --input sys.json [--template name] [--tau-range lo:hi]
//   dwellkit simulate    --input sys.json --output traj.csv [--seed n]
//   dwellkit graph-check --input sys.json
//   dwellkit regress     [--input systems/] [--strict]
//
// Exit status is 0 exactly when the document parsed cleanly and the analysis
// finished with every check satisfied.

#include "dwellkit/cli.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <string>

namespace {

using namespace dwellkit;

std::pair<double, double> parseRange(const std::string& text, const std::string& flag) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw CLI::ValidationError(flag, "expected lo:hi, got \"" + text + "\"");
  try {
    const double lo = std::stod(text.substr(0, colon));
    const double hi = std::stod(text.substr(colon + 1));
    return {lo, hi};
  } catch (const std::exception&) {
    throw CLI::ValidationError(flag, "expected lo:hi, got \"" + text + "\"");
  }
}

NormSpec parseNormFlag(const std::string& text) {
  if (text == "spectral") return NormSpec::spectral();
  const std::string prefix = "ellipsoidal:";
  if (text.rfind(prefix, 0) == 0) return loadEllipsoidalNorm(text.substr(prefix.size()));
  throw CLI::ValidationError("--norm",
                             "expected spectral or ellipsoidal:<weight.json>, got \"" + text +
                                 "\"");
}

LmiTemplate parseTemplate(const std::string& name) {
  const std::pair<const char*, LmiTemplate> table[] = {
      {"resetDwell", LmiTemplate::resetDwell},
      {"impulseDwell", LmiTemplate::impulseDwell},
      {"geromelColaneri", LmiTemplate::geromelColaneri},
      {"hespanhaMorse", LmiTemplate::hespanhaMorse},
      {"mixedRate", LmiTemplate::mixedRate},
  };
  for (const auto& [key, tmpl] : table)
    if (name == key) return tmpl;
  std::string known;
  for (const auto& [key, tmpl] : table) known += std::string(known.empty() ? "" : ", ") + key;
  throw CLI::ValidationError("--template", "unknown template \"" + name + "\" (one of " + known +
                                               ")");
}

int emitReport(const AnalysisReport& rep, const std::string& outputPath) {
  rep.print(std::cout);
  if (!outputPath.empty()) {
    std::ofstream out(outputPath);
    if (!out) throw Error("cannot open output file " + outputPath);
    rep.print(out);
  }
  return rep.succeeded ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stabilizing time constraints for switched systems with jumps"};
  app.require_subcommand(1);

  std::string input, output, normFlag, templateName = "resetDwell", tauRangeFlag;
  std::string regressDir = "systems";
  std::vector<std::string> tauModeFlags;
  bool modeDependent = false, strict = false;
  std::string rescaleFlag;
  unsigned seed = 0;
  double tolerance = 1e-8;

  auto* bounds = app.add_subcommand("bounds", "flow-based dwell and flee time bounds");
  bounds->add_option("--input", input, "system document")->required();
  bounds->add_option("--output", output, "also write the report here");
  bounds->add_flag("--mode-dependent", modeDependent, "per-mode constraints");
  bounds->add_option("--norm", normFlag, "spectral | ellipsoidal:<weight.json>");
  bounds->add_option("--rescale", rescaleFlag,
                     "eps:xi — rescale unstable bases before bounding");

  auto* lyapunov = app.add_subcommand("lyapunov", "LMI certificates and dwell bisection");
  lyapunov->add_option("--input", input, "system document")->required();
  lyapunov->add_option("--output", output, "also write the report here");
  lyapunov->add_option("--template", templateName,
                       "resetDwell | impulseDwell | geromelColaneri | hespanhaMorse | mixedRate")
      ->capture_default_str();
  lyapunov->add_option("--tau-range", tauRangeFlag, "lo:hi bisection bracket");
  lyapunov->add_option("--tau-mode", tauModeFlags, "id=tau, repeatable (direct probe)");
  lyapunov->add_option("--tolerance", tolerance, "certificate verification tolerance")
      ->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "run the document's simulation block");
  simulate->add_option("--input", input, "system document")->required();
  simulate->add_option("--output", output, "trajectory CSV")->required();
  simulate->add_option("--seed", seed, "RNG seed for random signals and schedules")
      ->capture_default_str();

  auto* graphCheck = app.add_subcommand("graph-check", "unstable-subgraph hypothesis check");
  graphCheck->add_option("--input", input, "system document")->required();
  graphCheck->add_option("--output", output, "also write the report here");

  auto* regress = app.add_subcommand("regress", "recompute the worked examples and diff");
  regress->add_option("--input", regressDir, "directory of committed documents")
      ->capture_default_str();
  regress->add_flag("--strict", strict, "count known misprints as failures");
  regress->add_option("--output", output, "also write the report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bounds->parsed()) {
      BoundsOptions opt;
      opt.modeDependent = modeDependent;
      if (!normFlag.empty()) opt.normOverride = parseNormFlag(normFlag);
      if (!rescaleFlag.empty()) opt.rescale = parseRange(rescaleFlag, "--rescale");
      return emitReport(cmdBounds(loadSystemDocument(input), opt), output);
    }
    if (lyapunov->parsed()) {
      LyapunovOptions opt;
      opt.tmpl = parseTemplate(templateName);
      opt.tolerance = tolerance;
      if (!tauRangeFlag.empty()) opt.tauRange = parseRange(tauRangeFlag, "--tau-range");
      for (const auto& kv : tauModeFlags) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
          throw CLI::ValidationError("--tau-mode", "expected id=tau, got \"" + kv + "\"");
        opt.tauByMode[static_cast<ModeId>(std::stoul(kv.substr(0, eq)))] =
            std::stod(kv.substr(eq + 1));
      }
      return emitReport(cmdLyapunov(loadSystemDocument(input), opt), output);
    }
    if (simulate->parsed()) {
      const SimulateOutcome out = cmdSimulate(loadSystemDocument(input), seed);
      std::ofstream csv(output);
      if (!csv) throw Error("cannot open output file " + output);
      writeCsv(out.trajectory, csv);
      out.report.print(std::cout);
      return out.report.succeeded ? 0 : 1;
    }
    if (graphCheck->parsed())
      return emitReport(cmdGraphCheck(loadSystemDocument(input)), output);
    if (regress->parsed()) return emitReport(cmdRegress(regressDir, strict), output);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
