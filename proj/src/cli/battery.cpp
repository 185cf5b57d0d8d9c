#include "nsp/cli/battery.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nsp/error.hpp"
#include "nsp/layer/equivalent.hpp"
#include "nsp/layer/layer_spec.hpp"
#include "nsp/linalg/factorization.hpp"
#include "nsp/linalg/vector_ops.hpp"
#include "nsp/privacy/ssim.hpp"
#include "nsp/rng.hpp"

namespace nsp::cli {
namespace {

std::vector<double> scaled_to_l2(std::vector<double> v, double target) {
  const double n = norm2(v);
  for (double& x : v) x *= target / n;
  return v;
}

const RmseRow* find_row(const RmseReport& r, const std::string& kind, double scale) {
  for (const RmseRow& row : r.rows) {
    if (row.kind == kind && row.scale == scale) return &row;
  }
  return nullptr;
}

std::vector<double> rmse_values(const RmseReport& r, const std::string& kind) {
  std::vector<double> out;
  for (const RmseRow& row : r.rows) {
    if (row.kind == kind) out.push_back(row.rmse);
  }
  return out;
}

// Number of adjacent pairs that fail to increase; the first value must also be > 0.
std::size_t increase_failures(const std::vector<double>& v) {
  std::size_t bad = (v.empty() || !(v.front() > 0.0)) ? 1 : 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) ++bad;
  }
  return bad;
}

bool close(std::span<const double> a, std::span<const double> b, double rel) {
  return norm2(subtract(a, b)) <= rel * std::max({norm2(a), norm2(b), 1e-300});
}

// U Q for a seeded permutation and Givens rotations of adjacent columns;
// spans the same subspace as U.
NullspaceBasis rotated_basis(const NullspaceBasis& basis, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t d = basis.dim;
  std::vector<std::size_t> perm(d);
  for (std::size_t i = 0; i < d; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), std::mt19937_64(seed));
  std::vector<std::vector<double>> cols(d);
  for (std::size_t j = 0; j < d; ++j) cols[j] = basis.basis.column(perm[j]);
  for (std::size_t j = 0; j + 1 < d; j += 2) {
    const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double c = std::cos(t), s = std::sin(t);
    for (std::size_t i = 0; i < basis.ambient_dim; ++i) {
      const double p = cols[j][i], q = cols[j + 1][i];
      cols[j][i] = c * p - s * q;
      cols[j + 1][i] = s * p + c * q;
    }
  }
  return basis_from_matrix(DenseMatrix::from_columns(basis.ambient_dim, cols), basis.source);
}

struct SuiteLayer {
  EquivalentMatrix eq;
  NullspaceBasis basis;
};

SuiteLayer suite_layer(const LayerSpec& spec) {
  SuiteLayer s{build_equivalent(spec), {}};
  s.basis = harmless_basis(s.eq);
  return s;
}

}  // namespace

RmseRun run_rmse_battery(const Network& net, const NullspaceBasis& input_basis, std::uint64_t seed,
                     const RmseOptions& options) {
  RmseRun run;
  std::vector<std::vector<double>> inputs;
  for (std::size_t i = 0; i < options.inputs; ++i) {
    inputs.push_back(synthetic_image(net.input_shape(), derive_seed(seed, streams::kInputs, i)).pixels);
  }

  const std::vector<double> harmless =
      sample_harmless(input_basis, derive_seed(seed, streams::kPerturbations, 0), options.linf, NormKind::linf);
  const std::vector<double> gaussian =
      scaled_to_l2(Rng(derive_seed(seed, streams::kPerturbations, 1)).gaussian_vector(harmless.size()),
                   norm2(harmless));

  run.report.append(rmse_report(net, inputs, harmless, options.scales, 0, "harmless"));
  run.report.append(rmse_report(net, inputs, gaussian, options.scales, 0, "gaussian"));

  LeastHarmful lh;
  if (options.least_harmful_layer) {
    const std::size_t l = *options.least_harmful_layer;
    const std::size_t n_feature = net.shape(l).size();
    const double feature_l2 = options.linf * std::sqrt(static_cast<double>(n_feature));
    lh = least_harmful(build_equivalent(net.linear_layer_reading(l)));
    const std::vector<double> least = scaled(lh.direction, feature_l2);
    const std::vector<double> gaussian_feature = scaled_to_l2(
        Rng(derive_seed(seed, streams::kPerturbations, 2)).gaussian_vector(n_feature), feature_l2);
    run.report.append(rmse_report(net, inputs, least, options.scales, l, "least_harmful"));
    run.report.append(rmse_report(net, inputs, gaussian_feature, options.scales, l, "gaussian_feature"));
  }

  Section& s = run.section;
  s.name = "end-to-end rmse";
  const auto h = rmse_values(run.report, "harmless");
  double worst = 0.0;
  for (double v : h) worst = std::max(worst, std::isnan(v) ? INFINITY : v);
  s.checks.push_back(at_most("harmless rmse, every scale", worst, 1e-10,
                             "l_inf " + fmt17(options.linf) + " at the input"));
  s.checks.push_back(no_failures("gaussian rmse positive and increasing",
                                 increase_failures(rmse_values(run.report, "gaussian")), options.scales.size()));
  if (options.least_harmful_layer) {
    const std::size_t l = *options.least_harmful_layer;
    s.checks.push_back(no_failures("least-harmful rmse positive and increasing",
                                   increase_failures(rmse_values(run.report, "least_harmful")),
                                   options.scales.size()));
    std::size_t above = 0;
    std::string first;
    for (double scale : options.scales) {
      const double lv = find_row(run.report, "least_harmful", scale)->rmse;
      for (const char* kind : {"gaussian", "gaussian_feature"}) {
        const double gv = find_row(run.report, kind, scale)->rmse;
        if (!(lv < gv)) {
          ++above;
          if (first.empty()) first = "scale " + fmt17(scale) + ": " + fmt17(lv) + " vs " + kind + " " + fmt17(gv);
        }
      }
    }
    s.checks.push_back(no_failures("least-harmful below both gaussian baselines", above, 2 * options.scales.size(),
                                   first));
    s.checks.push_back(holds("least-harmful layer has d = 0", !lh.harmless,
                             "feature index " + std::to_string(l) + ", lambda_min " + fmt17(lh.residual)));
  }
  return run;
}

Table rmse_table(const RmseReport& report) {
  Table t;
  t.header = {"kind", "scale", "rmse"};
  for (const RmseRow& r : report.rows) t.rows.push_back({r.kind, fmt17(r.scale), fmt17(r.rmse)});
  return t;
}

Section check_basis_section(const NullspaceBasis& basis, const EquivalentMatrix& eq) {
  Section s;
  s.name = "basis " + describe(eq);
  const BasisCheck c = check_basis(basis, eq);
  s.checks.push_back(at_most("||U^T U - I||_max", c.orthonormality_error, 1e-12));
  s.checks.push_back(at_most("||A U||_max", c.residual, c.tolerance, "1e-10 * sigma_max"));
  return s;
}

Section run_least_harmful_suite(std::uint64_t seed, std::size_t matrices, std::size_t samples) {
  Section s;
  s.name = "least harmful";
  std::size_t rank_failures = 0, eigen_failures = 0, sample_failures = 0;
  double worst_gap = 0.0;
  for (std::size_t i = 0; i < matrices; ++i) {
    const std::size_t n = 12 + 4 * i;
    const std::size_t m = 2 * n + i;
    const EquivalentMatrix eq =
        build_equivalent(random_fc_spec(n, m, derive_seed(seed, streams::kLayers, 1000 + i)));
    const DenseMatrix a = eq.matrix.to_dense();
    if (numerical_rank(singular_values(a), m, n) != n) ++rank_failures;

    const LeastHarmful lh = least_harmful(eq);
    const double best = std::pow(norm2(eq.matrix.multiply(lh.direction)), 2);
    const double gap = std::abs(best - lh.residual) / lh.residual;
    worst_gap = std::max(worst_gap, std::isnan(gap) ? INFINITY : gap);
    if (!(gap <= 1e-10)) ++eigen_failures;

    Rng rng(derive_seed(seed, streams::kTrials, 1000 + i));
    for (std::size_t k = 0; k < samples; ++k) {
      const std::vector<double> v = rng.unit_vector(n);
      if (!(best <= std::pow(norm2(eq.matrix.multiply(v)), 2))) ++sample_failures;
    }
  }
  s.checks.push_back(no_failures("full column rank", rank_failures, matrices));
  s.checks.push_back(at_most("| ||A v*||^2 - lambda_min | / lambda_min", worst_gap, 1e-10));
  s.checks.push_back(no_failures("||A v*|| <= ||A v|| for random unit v", sample_failures, matrices * samples));
  return s;
}

Section run_decomposition_suite(std::uint64_t seed, std::size_t trials) {
  constexpr double tol = kVerdictTolerance;
  Section s;
  s.name = "decomposition laws";

  std::vector<SuiteLayer> layers;
  layers.push_back(suite_layer(random_fc_spec(24, 16, derive_seed(seed, streams::kLayers, 2000))));
  layers.push_back(suite_layer(random_conv_spec({2, 8, 8, 3, 3, 2, 1}, derive_seed(seed, streams::kLayers, 2001))));
  layers.push_back(suite_layer(random_conv_spec({3, 8, 8, 4, 2, 2, 0}, derive_seed(seed, streams::kLayers, 2002))));
  std::vector<SuiteLayer> injective;
  injective.push_back(suite_layer(random_fc_spec(16, 24, derive_seed(seed, streams::kLayers, 2003))));
  injective.push_back(suite_layer(random_conv_spec({1, 6, 6, 2, 3, 1, 1}, derive_seed(seed, streams::kLayers, 2004))));

  std::size_t nonempty = 0;
  for (const SuiteLayer& l : layers) nonempty += l.basis.dim > 0 ? 1 : 0;
  s.checks.push_back(no_failures("suite layers have d >= 1", layers.size() - nonempty, layers.size()));
  if (nonempty != layers.size()) return s;

  std::size_t any_split = 0, orth_output = 0, orth_sum = 0, orth_basis = 0, verdicts = 0, min_norm = 0, injective_fail = 0;
  std::vector<NullspaceBasis> rotated;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    rotated.push_back(rotated_basis(layers[i].basis, derive_seed(seed, streams::kTrials, 3000 + i)));
  }

  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t which = t % layers.size();
    const SuiteLayer& layer = layers[which];
    const EquivalentMatrix& eq = layer.eq;
    const NullspaceBasis& u = layer.basis;
    const std::size_t n = u.ambient_dim;
    Rng rng(derive_seed(seed, streams::kTrials, t));
    const std::vector<double> delta = rng.gaussian_vector(n);
    const std::vector<double> a_delta = eq.matrix.multiply(delta);
    const double h_norm = rng.uniform(0.1, 10.0);
    const std::vector<double> h = sample_harmless(u, derive_seed(seed, streams::kPerturbations, 10 + t), h_norm,
                                                  NormKind::l2);

    // A delta = A (delta - delta_a) for harmless delta_a.
    if (!close(a_delta, eq.matrix.multiply(subtract(delta, h)), tol)) ++any_split;

    // A delta = A delta_orth; delta = delta_par + delta_orth; delta_orth basis independent.
    const Decomposition dec = orthogonal_decompose(u, delta);
    if (!close(a_delta, eq.matrix.multiply(dec.orthogonal), tol)) ++orth_output;
    if (!close(delta, add(dec.parallel, dec.orthogonal), tol)) ++orth_sum;
    const Decomposition dec2 = orthogonal_decompose(rotated[which], delta);
    if (!close(dec.orthogonal, dec2.orthogonal, tol)) ++orth_basis;

    // Verdict agreement across the three output classes.
    Verdict expected = Verdict::different;
    std::vector<double> delta_hat;
    switch (t % 3) {
      case 0:
        expected = Verdict::identical;
        delta_hat = add(delta, h);
        break;
      case 1: {
        expected = Verdict::proportional;
        double alpha = rng.uniform(0.2, 3.0);
        if (std::abs(alpha - 1.0) < 0.1) alpha += 0.5;
        if (rng.uniform(0.0, 1.0) < 0.5) alpha = -alpha;
        delta_hat = add(scaled(delta, alpha), h);
        break;
      }
      default:
        delta_hat = rng.gaussian_vector(n);
        break;
    }
    const PairClassification pc = classify_pair(u, eq, delta, delta_hat);
    if (!pc.agrees() || pc.verdict != expected) ++verdicts;

    // ||delta_orth|| <= ||delta_orth + h||.
    if (!(norm2(dec.orthogonal) <= norm2(add(dec.orthogonal, h)) * (1.0 + tol))) ++min_norm;

    // d = 0: distinct inputs give distinct outputs.
    const SuiteLayer& inj = injective[t % injective.size()];
    const std::size_t n_inj = inj.basis.ambient_dim;
    const std::vector<double> p = rng.gaussian_vector(n_inj);
    std::vector<double> q = rng.gaussian_vector(n_inj);
    if (t % 2 == 0) q = add_scaled(p, 1e-3, q);  // near pairs as well as far ones
    const std::vector<double> ap = inj.eq.matrix.multiply(p), aq = inj.eq.matrix.multiply(q);
    if (inj.basis.dim != 0 || norm2(subtract(ap, aq)) <= tol * std::max(norm2(ap), norm2(aq))) ++injective_fail;
  }

  s.checks.push_back(no_failures("A d = A (d - d_a)", any_split, trials));
  s.checks.push_back(no_failures("A d = A d_orth", orth_output, trials));
  s.checks.push_back(no_failures("d = d_par + d_orth", orth_sum, trials));
  s.checks.push_back(no_failures("d_orth independent of basis", orth_basis, trials));
  s.checks.push_back(no_failures("classify_pair matches direct comparison", verdicts, trials));
  s.checks.push_back(no_failures("d = 0 gives distinct outputs", injective_fail, trials));
  s.checks.push_back(no_failures("d_orth has minimal norm", min_norm, trials));
  return s;
}

ContourGrid contour_grid(const EquivalentMatrix& eq, const NullspaceBasis& basis, std::uint64_t seed,
                         std::size_t points) {
  if (basis.dim == 0) throw EmptySubspaceError("contour grid needs a layer with d >= 1");
  if (points < 2) throw Error("contour grid needs at least 2 points per axis");
  ContourGrid g;
  const double last = static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    g.a.push_back(2.0 * static_cast<double>(i) / last);
    g.b.push_back(-2.0 + 4.0 * static_cast<double>(i) / last);
  }
  const std::vector<double> delta = Rng(derive_seed(seed, streams::kPerturbations, 20)).gaussian_vector(basis.ambient_dim);
  const Decomposition dec = orthogonal_decompose(basis, delta);
  g.orthogonal_norm = norm2(eq.matrix.multiply(dec.orthogonal));
  g.values.reserve(points * points);
  for (double a : g.a) {
    for (double b : g.b) {
      const std::vector<double> v = add(scaled(dec.orthogonal, a), scaled(dec.parallel, b));
      g.values.push_back(norm2(eq.matrix.multiply(v)));
    }
  }
  return g;
}

Section check_contour(const ContourGrid& g) {
  constexpr double tol = 1e-9;
  Section s;
  s.name = "contour";
  double worst_row = 0.0;
  double worst_zero = 0.0;
  for (std::size_t i = 0; i < g.a.size(); ++i) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t j = 0; j < g.b.size(); ++j) {
      lo = std::min(lo, g.at(i, j));
      hi = std::max(hi, g.at(i, j));
    }
    if (g.a[i] == 0.0) {
      worst_zero = std::max(worst_zero, hi / g.orthogonal_norm);
    } else {
      worst_row = std::max(worst_row, (hi - lo) / hi);
    }
  }
  // Linearity is only testable where 2a is itself a grid point and a > 0.
  double worst_lin = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 1; 2 * i < g.a.size(); ++i) {
    const std::size_t k = 2 * i;
    if (g.a[k] != 2.0 * g.a[i]) continue;
    for (std::size_t j = 0; j < g.b.size(); ++j) {
      worst_lin = std::max(worst_lin, std::abs(g.at(k, j) - 2.0 * g.at(i, j)) / g.at(i, j));
      ++pairs;
    }
  }
  s.checks.push_back(at_most("row spread / row max", worst_row, tol));
  s.checks.push_back(at_most("value at a = 0 / ||A d_orth||", worst_zero, tol));
  s.checks.push_back(at_most("|v(2a,b) - 2 v(a,b)| / v(a,b)", worst_lin, tol, std::to_string(pairs) + " pairs"));
  return s;
}

Table contour_table(const ContourGrid& g) {
  Table t;
  t.header = {"a", "b", "value"};
  for (std::size_t i = 0; i < g.a.size(); ++i) {
    for (std::size_t j = 0; j < g.b.size(); ++j) t.rows.push_back({fmt17(g.a[i]), fmt17(g.b[j]), fmt17(g.at(i, j))});
  }
  return t;
}

std::vector<Image> synthetic_batch(const TensorShape& shape, std::uint64_t seed, std::size_t count) {
  std::vector<Image> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(synthetic_image(shape, derive_seed(seed, streams::kInputs, 100 + i)));
  return out;
}

PrivacyBatch run_privacy_batch(const Network& net, const NullspaceBasis& input_basis,
                               const std::vector<Image>& images, std::uint64_t seed, const PrivacyConfig& cfg,
                               std::size_t reconstructions,
                               const std::function<void(std::size_t, const PrivacyOutputs&)>& sink) {
  PrivacyBatch batch;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const Image& x = images[i];
    PrivacyConfig c = cfg;
    c.seed = derive_seed(seed, streams::kPrivacy, i);
    const PrivacyResult r = maximize_dissimilarity(x, input_basis, net, c);

    PrivacyRow row;
    row.index = i;
    row.mse = r.mse;
    row.ssim = ssim(r.image, x);
    row.output_deviation = r.output_deviation;
    row.violation = r.max_bound_violation;
    const std::vector<double> fx = forward(net, x.pixels).logits();
    const std::vector<double> fxh = forward(net, r.image.pixels).logits();
    row.argmax_agree = argmax(fx) == argmax(fxh);

    const double l2 = norm2(subtract(r.image.pixels, x.pixels));
    std::vector<double> g = Rng(derive_seed(seed, streams::kPerturbations, 100 + i)).gaussian_vector(x.pixels.size());
    if (l2 > 0.0) g = scaled_to_l2(std::move(g), l2); else std::fill(g.begin(), g.end(), 0.0);
    row.ssim_gaussian = ssim(Image(x.shape, add(x.pixels, g)), x);

    const std::vector<Image> recs =
        sample_reconstructions(r.image, input_basis, reconstructions, derive_seed(seed, streams::kReconstruction, i));
    row.reconstructions_distinct = true;
    for (std::size_t j = 0; j < recs.size(); ++j) {
      const std::vector<double> fr = forward(net, recs[j].pixels).logits();
      row.reconstruction_deviation = std::max(row.reconstruction_deviation, norm_inf(subtract(fr, fxh)));
      for (std::size_t k = 0; k < j; ++k) {
        if (!(norm2(subtract(recs[j].pixels, recs[k].pixels)) > 0.0)) row.reconstructions_distinct = false;
      }
    }
    if (sink) sink(i, PrivacyOutputs{x, r, recs});
    batch.rows.push_back(row);
  }

  Section& s = batch.section;
  s.name = "privacy";
  std::size_t disagree = 0, indistinct = 0;
  double dev = 0.0, viol = 0.0, recdev = 0.0, min_mse = INFINITY;
  for (const PrivacyRow& r : batch.rows) {
    disagree += r.argmax_agree ? 0 : 1;
    indistinct += r.reconstructions_distinct ? 0 : 1;
    dev = std::max(dev, r.output_deviation);
    viol = std::max(viol, r.violation);
    recdev = std::max(recdev, r.reconstruction_deviation);
    min_mse = std::min(min_mse, r.mse);
  }
  const std::size_t n = batch.rows.size();
  s.checks.push_back(no_failures("argmax agreement", disagree, n));
  s.checks.push_back(at_most("output deviation", dev, 1e-9));
  s.checks.push_back(at_most("max pixel-bound violation", viol, 0.01));
  s.checks.push_back(holds("mse >= " + fmt17(kPrivacyMinMse), n > 0 && min_mse >= kPrivacyMinMse,
                           "smallest mse " + fmt17(min_mse)));
  s.checks.push_back(at_most("reconstruction output deviation", recdev, 1e-9,
                             std::to_string(reconstructions) + " reconstructions per image"));
  s.checks.push_back(no_failures("reconstructions pairwise distinct", indistinct, n));
  return batch;
}

Table privacy_table(const std::vector<PrivacyRow>& rows) {
  Table t;
  t.header = {"index", "mse", "ssim", "ssim_gaussian", "output_deviation", "violation", "argmax_agree"};
  for (const PrivacyRow& r : rows) {
    t.rows.push_back({std::to_string(r.index), fmt17(r.mse), fmt17(r.ssim), fmt17(r.ssim_gaussian),
                      fmt17(r.output_deviation), fmt17(r.violation), r.argmax_agree ? "true" : "false"});
  }
  return t;
}

std::pair<Image, Image> ssim_golden_pair() {
  Image a({3, 12, 10}), b({3, 12, 10});
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t y = 0; y < 12; ++y) {
      for (std::size_t x = 0; x < 10; ++x) {
        const double fx = static_cast<double>(x), fy = static_cast<double>(y), fc = static_cast<double>(c);
        a.at(c, y, x) = 0.5 + 0.4 * std::sin(0.3 * fx + 0.2 * fy + fc);
        b.at(c, y, x) = 0.5 + 0.3 * std::cos(0.17 * fx * fy + 0.5 * fc) + 0.05 * std::sin(1.7 * fx);
      }
    }
  }
  return {a, b};
}

Section run_ssim_suite(std::uint64_t seed) {
  Section s;
  s.name = "ssim";
  const TensorShape shape{3, 32, 32};
  std::size_t not_one = 0, asym = 0, out_of_range = 0;
  double worst_asym = 0.0;
  constexpr std::size_t kImages = 10;
  for (std::size_t i = 0; i < kImages; ++i) {
    const Image x = synthetic_image(shape, derive_seed(seed, streams::kInputs, 200 + i));
    const Image y = synthetic_image(shape, derive_seed(seed, streams::kInputs, 300 + i));
    if (ssim(x, x) != 1.0) ++not_one;
    const double xy = ssim(x, y), yx = ssim(y, x);
    worst_asym = std::max(worst_asym, std::abs(xy - yx));
    if (!(std::abs(xy - yx) <= 1e-12)) ++asym;
    if (!(std::abs(xy) <= 1.0)) ++out_of_range;
  }
  const auto [a, b] = ssim_golden_pair();
  s.checks.push_back(no_failures("ssim(x, x) == 1", not_one, kImages));
  s.checks.push_back(at_most("|ssim(a,b) - ssim(b,a)|", worst_asym, 1e-12));
  s.checks.push_back(no_failures("|ssim| <= 1", out_of_range, kImages));
  s.checks.push_back(at_most("golden pair |ssim - reference|", std::abs(ssim(a, b) - kSsimGolden), 1e-12,
                             "reference " + fmt17(kSsimGolden)));
  return s;
}

}  // namespace nsp::cli
