// nsp: command-line front end for the harmless-perturbation toolkit.

#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "nsp/cli/commands.hpp"
#include "nsp/error.hpp"

namespace {

void add_common(CLI::App* sub, nsp::cli::CommonOptions& common, std::string& format) {
  sub->add_option("--seed", common.seed, "Root seed for every random draw")->required();
  sub->add_option("--out", common.out, "Output directory")->capture_default_str();
  sub->add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harmless perturbation subspaces of linear layers"};
  app.require_subcommand(1);

  nsp::cli::CommonOptions common;
  std::string format = "csv";

  nsp::cli::LowerOptions lower;
  CLI::App* lower_cmd = app.add_subcommand("lower", "Lower a layer to its equivalent matrix");
  add_common(lower_cmd, common, format);
  lower_cmd->add_option("--layer", lower.layer, "Layer spec JSON")->required()->check(CLI::ExistingFile);

  nsp::cli::SweepOptions sweep;
  CLI::App* sweep_cmd = app.add_subcommand("dim-sweep", "Predicted vs numerical nullspace dimension");
  add_common(sweep_cmd, common, format);
  sweep_cmd->add_option("--geometry", sweep.geometries,
                        "conv:CxHxW:OUT:KERNEL:STRIDE:PAD or fc:IN:OUT (repeatable; default: built-in sweep)");
  sweep_cmd->add_option("--samples", sweep.samples, "Inputs per lowering check")->capture_default_str();

  nsp::cli::VerifyOptions verify;
  CLI::App* verify_cmd = app.add_subcommand("verify", "Run the invariant battery");
  add_common(verify_cmd, common, format);
  verify_cmd->add_option("--net", verify.net, "Network spec JSON (default: built-in desk network)")
      ->check(CLI::ExistingFile);
  verify_cmd->add_flag("--tamper-basis", verify.tamper_basis, "Perturb one basis column by 1e-3 (negative control)");
  verify_cmd->add_flag("--skip-sweep", verify.skip_sweep, "Skip the geometry sweep");

  nsp::cli::ContourOptions contour;
  CLI::App* contour_cmd = app.add_subcommand("contour", "Output norm over orthogonal/parallel multipliers");
  add_common(contour_cmd, common, format);
  contour_cmd->add_option("--layer", contour.layer, "Layer spec JSON")->check(CLI::ExistingFile);
  contour_cmd->add_option("--net", contour.net, "Network spec JSON")->check(CLI::ExistingFile);
  contour_cmd->add_option("--feature", contour.feature, "Feature index of the layer within the network");
  contour_cmd->add_option("--points", contour.points, "Grid points per axis")->capture_default_str()
      ->check(CLI::Range(2, 1001));

  nsp::cli::PrivacyOptions privacy;
  CLI::App* privacy_cmd = app.add_subcommand("privacy", "Generate harmless private images");
  add_common(privacy_cmd, common, format);
  privacy_cmd->add_option("--net", privacy.net, "Network spec JSON")->check(CLI::ExistingFile);
  privacy_cmd->add_option("--image", privacy.images, "Input PPM (repeatable; default: synthetic)")
      ->check(CLI::ExistingFile);
  privacy_cmd->add_option("--count", privacy.count, "Synthetic images")->capture_default_str();
  privacy_cmd->add_option("--reconstructions", privacy.reconstructions, "Reconstructions per image")
      ->capture_default_str();
  privacy_cmd->add_option("--iters", privacy.config.max_iters)->capture_default_str();
  privacy_cmd->add_option("--step", privacy.config.step_size)->capture_default_str();
  privacy_cmd->add_option("--penalty", privacy.config.penalty_weight)->capture_default_str();
  privacy_cmd->add_option("--init-scale", privacy.config.init_coeff_scale)->capture_default_str();
  privacy_cmd->add_flag("!--plain-steps", privacy.config.normalized_steps,
                        "Use c += step * gradient instead of decaying normalized steps");

  CLI11_PARSE(app, argc, argv);

  try {
    common.format = nsp::cli::parse_format(format);
    if (app.got_subcommand(lower_cmd)) return nsp::cli::cmd_lower(common, lower, std::cout);
    if (app.got_subcommand(sweep_cmd)) return nsp::cli::cmd_dim_sweep(common, sweep, std::cout);
    if (app.got_subcommand(verify_cmd)) return nsp::cli::cmd_verify(common, verify, std::cout);
    if (app.got_subcommand(contour_cmd)) return nsp::cli::cmd_contour(common, contour, std::cout);
    if (app.got_subcommand(privacy_cmd)) return nsp::cli::cmd_privacy(common, privacy, std::cout);
  } catch (const nsp::DivergenceError& e) {
    std::cerr << "error: " << e.what() << " (try a smaller --step)\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
