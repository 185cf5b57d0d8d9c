#include "nsp/cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <ostream>

#include "nsp/cli/battery.hpp"
#include "nsp/cli/sweep.hpp"
#include "nsp/error.hpp"
#include "nsp/layer/equivalent.hpp"
#include "nsp/layer/layer_json.hpp"
#include "nsp/linalg/vector_ops.hpp"
#include "nsp/net/network.hpp"
#include "nsp/nullspace/nullspace.hpp"
#include "nsp/rng.hpp"

namespace nsp::cli {
namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void prepare_out(const std::filesystem::path& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec || !std::filesystem::is_directory(out)) throw Error("cannot create output directory " + out.string());
}

Network load_network(const std::optional<std::filesystem::path>& path, std::uint64_t seed) {
  return init_network(path ? load_network_spec(*path) : desk_network_spec(), seed);
}

EquivalentMatrix input_layer(const Network& net) {
  const auto idx = net.linear_feature_indices();
  if (idx.empty() || idx.front() != 0) throw Error("network must start with a conv or fc layer");
  return build_equivalent(net.linear_layer_reading(0));
}

// First linear layer past the input whose reading layer is injective.
std::optional<std::size_t> least_harmful_layer(const Network& net) {
  for (std::size_t l : net.linear_feature_indices()) {
    if (l > 0 && predict_nullspace_dim(net.linear_layer_reading(l)).dim == 0) return l;
  }
  return std::nullopt;
}

void tamper(NullspaceBasis& basis) {
  for (std::size_t i = 0; i < basis.basis.rows(); ++i) basis.basis(i, 0) += 1e-3;
}

}  // namespace

void print_section(std::ostream& log, const Section& s) {
  char time[32];
  std::snprintf(time, sizeof time, "%.1fs", s.seconds);
  log << (s.passed() ? "PASS " : "FAIL ") << s.name;
  if (const Check* c = s.headline()) {
    log << ": " << c->name << " = " << fmt17(c->measured) << " (tol " << fmt17(c->tolerance) << ")";
    if (!c->detail.empty()) log << " [" << c->detail << "]";
  }
  log << " " << time << '\n';
  for (const Check& c : s.checks) {
    if (!c.passed && &c != s.headline()) {
      log << "     also failed: " << c.name << " = " << fmt17(c.measured) << " (tol " << fmt17(c.tolerance) << ")\n";
    }
  }
}

int cmd_lower(const CommonOptions& common, const LowerOptions& options, std::ostream& log) {
  prepare_out(common.out);
  const LayerSpec spec = load_layer(options.layer, common.seed);
  const EquivalentMatrix eq = build_equivalent(spec);
  const DimensionPrediction p = predict_nullspace_dim(spec);
  const NullspaceBasis basis = harmless_basis(eq);
  const double residual = verify_equivalence(eq, spec, 100, derive_seed(common.seed, streams::kInputs, 0));

  Table triplets;
  triplets.header = {"row", "col", "value"};
  for (std::size_t r = 0; r < eq.matrix.rows(); ++r) {
    const auto cols = eq.matrix.row_columns(r);
    const auto vals = eq.matrix.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      triplets.rows.push_back({std::to_string(r), std::to_string(cols[k]), fmt17(vals[k])});
    }
  }
  write_csv(common.out / "equivalent.csv", triplets);
  save_basis(common.out / "basis.nspb", basis);

  Table stats;
  stats.header = {"layer", "rows", "cols", "nnz", "rank", "nullity", "predicted", "guaranteed", "note", "residual"};
  stats.rows.push_back({describe(eq), std::to_string(eq.matrix.rows()), std::to_string(eq.matrix.cols()),
                        std::to_string(eq.matrix.nnz()), std::to_string(basis.rank), std::to_string(basis.dim),
                        std::to_string(p.dim), p.guaranteed ? "true" : "false",
                        p.guaranteed ? "" : "formula unguaranteed: " + p.reason, fmt17(residual)});
  write_table(common.out / "lower_stats", stats, common.format);

  log << describe(eq) << "\n"
      << "rows " << eq.matrix.rows() << ", cols " << eq.matrix.cols() << ", nnz " << eq.matrix.nnz() << "\n"
      << "rank " << basis.rank << ", nullity " << basis.dim << ", predicted " << p.dim << "\n";
  if (!p.guaranteed) log << "formula unguaranteed: " << p.reason << "\n";
  log << "verify_equivalence " << fmt17(residual) << "\n";
  return 0;
}

int cmd_dim_sweep(const CommonOptions& common, const SweepOptions& options, std::ostream& log) {
  prepare_out(common.out);
  std::vector<SweepGeometry> geometries;
  if (options.geometries.empty()) {
    geometries = default_sweep();
  } else {
    for (const std::string& g : options.geometries) geometries.push_back(parse_geometry(g));
  }
  const auto start = Clock::now();
  const std::vector<SweepRow> rows = run_dim_sweep(geometries, common.seed, options.samples);
  write_table(common.out / "dim_sweep", sweep_table(rows), common.format);
  for (const SweepRow& r : rows) {
    log << r.label << ": ";
    if (!r.valid) {
      log << "invalid (" << r.note << ")\n";
      continue;
    }
    log << r.in_dim << " -> " << r.out_dim << ", predicted " << r.predicted << ", numerical "
        << (r.numerical ? std::to_string(*r.numerical) : "n/a") << (r.agree() ? "" : "  MISMATCH")
        << (r.guaranteed ? "" : "  (formula unguaranteed: " + r.note + ")") << "\n";
  }
  print_section(log, check_sweep_nullity(rows, since(start), options.geometries.empty() ? 50 : 0));
  print_section(log, check_sweep_equivalence(rows));
  return 0;
}

int cmd_verify(const CommonOptions& common, const VerifyOptions& options, std::ostream& log) {
  prepare_out(common.out);
  std::vector<Section> sections;
  auto record = [&](Section s, Clock::time_point start) {
    if (s.seconds == 0.0) s.seconds = since(start);
    print_section(log, s);
    sections.push_back(std::move(s));
  };

  if (!options.skip_sweep) {
    const auto start = Clock::now();
    const std::vector<SweepRow> rows = run_dim_sweep(default_sweep(), common.seed);
    write_table(common.out / "dim_sweep", sweep_table(rows), common.format);
    record(check_sweep_nullity(rows, since(start)), start);
    record(check_sweep_equivalence(rows), start);
  }

  auto start = Clock::now();
  const Network net = load_network(options.net, common.seed);
  const EquivalentMatrix eq0 = input_layer(net);
  NullspaceBasis basis = harmless_basis(eq0);
  if (basis.dim == 0) throw EmptySubspaceError("the network's first linear layer has no harmless subspace");
  if (options.tamper_basis) tamper(basis);
  record(check_basis_section(basis, eq0), start);

  start = Clock::now();
  RmseOptions rmse_options;
  rmse_options.least_harmful_layer = least_harmful_layer(net);
  if (!rmse_options.least_harmful_layer) log << "no injective linear layer past the input; least-harmful rows skipped\n";
  const RmseRun rmse = run_rmse_battery(net, basis, common.seed, rmse_options);
  write_table(common.out / "rmse", rmse_table(rmse.report), common.format);
  record(rmse.section, start);

  start = Clock::now();
  record(run_least_harmful_suite(common.seed), start);
  start = Clock::now();
  record(run_decomposition_suite(common.seed), start);

  start = Clock::now();
  const std::size_t last = net.linear_feature_indices().back();
  const EquivalentMatrix eq_last = build_equivalent(net.linear_layer_reading(last));
  const NullspaceBasis basis_last = harmless_basis(eq_last);
  if (basis_last.dim > 0) {
    const ContourGrid grid = contour_grid(eq_last, basis_last, common.seed);
    write_table(common.out / "contour", contour_table(grid), common.format);
    record(check_contour(grid), start);
  } else {
    log << "skip contour: last linear layer has d = 0\n";
  }

  start = Clock::now();
  record(run_ssim_suite(common.seed), start);

  bool passed = true;
  nlohmann::json doc;
  doc["seed"] = common.seed;
  doc["sections"] = nlohmann::json::array();
  for (const Section& s : sections) {
    passed = passed && s.passed();
    doc["sections"].push_back(to_json(s));
  }
  doc["passed"] = passed;
  write_json(common.out / "verify.json", doc);
  log << (passed ? "verify: all checks passed\n" : "verify: FAILED\n");
  return passed ? 0 : 1;
}

int cmd_contour(const CommonOptions& common, const ContourOptions& options, std::ostream& log) {
  prepare_out(common.out);
  EquivalentMatrix eq;
  if (options.layer) {
    if (options.net) throw Error("--layer and --net are mutually exclusive");
    eq = build_equivalent(load_layer(*options.layer, common.seed));
  } else {
    const Network net = load_network(options.net, common.seed);
    const std::size_t l = options.feature.value_or(net.linear_feature_indices().back());
    eq = build_equivalent(net.linear_layer_reading(l));
  }
  const NullspaceBasis basis = harmless_basis(eq);
  const ContourGrid grid = contour_grid(eq, basis, common.seed, options.points);
  const Section s = check_contour(grid);
  log << describe(eq) << ", d = " << basis.dim << "\n";
  print_section(log, s);
  if (!s.passed()) return 1;
  write_table(common.out / "contour", contour_table(grid), common.format);
  return 0;
}

int cmd_privacy(const CommonOptions& common, const PrivacyOptions& options, std::ostream& log) {
  prepare_out(common.out);
  options.config.validate();
  const auto start = Clock::now();
  const Network net = load_network(options.net, common.seed);
  const NullspaceBasis basis = harmless_basis(input_layer(net));

  std::vector<Image> images;
  if (options.images.empty()) {
    images = synthetic_batch(net.input_shape(), common.seed, options.count);
  } else {
    for (const auto& path : options.images) {
      Image img = read_ppm(path);
      if (img.shape != net.input_shape()) throw ShapeError(path.string() + " does not match the network input shape");
      images.push_back(std::move(img));
    }
  }

  auto sink = [&](std::size_t i, const PrivacyOutputs& o) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "image_%03zu", i);
    const std::filesystem::path base = common.out / stem;
    auto file = [&](const std::string& suffix) { return std::filesystem::path(base.string() + suffix); };
    write_ppm(file("_original.ppm"), o.original);
    write_ppm(file("_perturbation.ppm"),
              normalized_for_viewing(Image(o.original.shape, subtract(o.result.image.pixels, o.original.pixels))));
    write_ppm(file("_private.ppm"), o.result.image);
    write_image_blob(file("_private.nspw"), o.result.image);
    for (std::size_t j = 0; j < o.reconstructions.size(); ++j) {
      char rec[32];
      std::snprintf(rec, sizeof rec, "_reconstruction_%02zu.ppm", j);
      write_ppm(file(rec), o.reconstructions[j]);
    }
  };
  PrivacyBatch batch = run_privacy_batch(net, basis, images, common.seed, options.config, options.reconstructions, sink);
  batch.section.seconds = since(start);

  write_table(common.out / "privacy", privacy_table(batch.rows), common.format);
  nlohmann::json doc;
  doc["seed"] = common.seed;
  doc["section"] = to_json(batch.section);
  write_json(common.out / "privacy_summary.json", doc);
  for (const PrivacyRow& r : batch.rows) {
    log << "image " << r.index << ": mse " << fmt17(r.mse) << ", ssim " << fmt17(r.ssim) << ", ssim (gaussian) "
        << fmt17(r.ssim_gaussian) << ", deviation " << fmt17(r.output_deviation) << ", violation "
        << fmt17(r.violation) << (r.argmax_agree ? "" : ", ARGMAX CHANGED") << "\n";
  }
  print_section(log, batch.section);
  return batch.section.passed() ? 0 : 1;
}

}  // namespace nsp::cli
