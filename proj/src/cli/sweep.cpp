#include "nsp/cli/sweep.hpp"

#include <sstream>

#include "nsp/error.hpp"
#include "nsp/layer/equivalent.hpp"
#include "nsp/linalg/factorization.hpp"
#include "nsp/rng.hpp"

namespace nsp::cli {
namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, sep)) parts.push_back(part);
  return parts;
}

std::size_t to_count(const std::string& s, const std::string& context) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || s.size() > 9) {
    throw Error("geometry '" + context + "': '" + s + "' is not a count");
  }
  return std::stoul(s);
}

}  // namespace

std::string describe(const SweepGeometry& g) {
  if (const auto* f = std::get_if<FcGeometry>(&g)) {
    return "fc:" + std::to_string(f->in_features) + ":" + std::to_string(f->out_features);
  }
  const auto& c = std::get<ConvGeometry>(g);
  return "conv:" + std::to_string(c.in_channels) + "x" + std::to_string(c.in_height) + "x" +
         std::to_string(c.in_width) + ":" + std::to_string(c.out_channels) + ":" + std::to_string(c.kernel) + ":" +
         std::to_string(c.stride) + ":" + std::to_string(c.padding);
}

SweepGeometry parse_geometry(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() == 3 && parts[0] == "fc") {
    return FcGeometry{to_count(parts[1], text), to_count(parts[2], text)};
  }
  if (parts.size() == 6 && parts[0] == "conv") {
    const auto dims = split(parts[1], 'x');
    if (dims.size() != 3) throw Error("geometry '" + text + "': input must be CxHxW");
    ConvGeometry g;
    g.in_channels = to_count(dims[0], text);
    g.in_height = to_count(dims[1], text);
    g.in_width = to_count(dims[2], text);
    g.out_channels = to_count(parts[2], text);
    g.kernel = to_count(parts[3], text);
    g.stride = to_count(parts[4], text);
    g.padding = to_count(parts[5], text);
    return g;
  }
  throw Error("geometry '" + text + "': expected conv:CxHxW:OUT:KERNEL:STRIDE:PAD or fc:IN:OUT");
}

std::vector<SweepGeometry> default_sweep() {
  std::vector<SweepGeometry> out;
  for (std::size_t n_out : {98, 196, 392, 784, 1568}) out.push_back(FcGeometry{784, n_out});
  out.push_back(ConvGeometry{3, 32, 32, 10, 7, 2, 3});
  out.push_back(ConvGeometry{3, 32, 32, 12, 3, 2, 1});
  out.push_back(ConvGeometry{3, 32, 32, 48, 5, 4, 1});

  struct Window {
    std::size_t kernel, stride, padding;
  };
  const Window windows[] = {{3, 1, 1}, {3, 2, 1}, {2, 2, 0}, {4, 2, 1}, {5, 2, 2}, {3, 3, 0}};
  const ConvGeometry inputs[] = {{1, 8, 8, 0, 0, 0, 0}, {2, 10, 10, 0, 0, 0, 0}, {3, 12, 12, 0, 0, 0, 0}};
  for (const ConvGeometry& in : inputs) {
    for (const Window& w : windows) {
      // Output channels below, at and above the in = out boundary.
      const std::size_t boundary = in.in_channels * w.stride * w.stride;
      for (std::size_t c_out : {std::size_t{1}, boundary, boundary + 2}) {
        ConvGeometry g = in;
        g.out_channels = c_out;
        g.kernel = w.kernel;
        g.stride = w.stride;
        g.padding = w.padding;
        out.push_back(g);
      }
    }
  }
  for (std::size_t n_in : {20, 64}) {
    for (std::size_t n_out : {n_in / 4, n_in / 2, n_in - 1, n_in, n_in + 7}) out.push_back(FcGeometry{n_in, n_out});
  }
  return out;
}

std::vector<SweepRow> run_dim_sweep(const std::vector<SweepGeometry>& geometries, std::uint64_t seed,
                                    std::size_t samples) {
  std::vector<SweepRow> rows;
  rows.reserve(geometries.size());
  for (std::size_t i = 0; i < geometries.size(); ++i) {
    SweepRow row;
    row.label = describe(geometries[i]);
    const std::uint64_t layer_seed = derive_seed(seed, streams::kLayers, i);
    try {
      LayerSpec spec;
      if (const auto* f = std::get_if<FcGeometry>(&geometries[i])) {
        spec = random_fc_spec(f->in_features, f->out_features, layer_seed);
      } else {
        spec = random_conv_spec(std::get<ConvGeometry>(geometries[i]), layer_seed);
      }
      const DimensionPrediction p = predict_nullspace_dim(spec);
      row.in_dim = p.input_dim;
      row.out_dim = p.output_dim;
      row.predicted = p.dim;
      row.guaranteed = p.guaranteed;
      row.note = p.reason;
      const EquivalentMatrix eq = build_equivalent(spec);
      const DenseMatrix a = eq.matrix.to_dense();
      row.numerical = a.cols() - numerical_rank(singular_values(a), a.rows(), a.cols());
      row.equivalence_error = verify_equivalence(eq, spec, samples, derive_seed(seed, streams::kInputs, i));
    } catch (const ShapeError& e) {
      row.valid = false;
      row.note = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Table sweep_table(const std::vector<SweepRow>& rows) {
  Table t;
  t.header = {"in_dim", "out_dim", "predicted", "numerical", "agree"};
  for (const SweepRow& r : rows) {
    if (!r.valid) {
      t.rows.push_back({"", "", "", "", "false"});
      continue;
    }
    t.rows.push_back({std::to_string(r.in_dim), std::to_string(r.out_dim), std::to_string(r.predicted),
                      r.numerical ? std::to_string(*r.numerical) : "", r.agree() ? "true" : "false"});
  }
  return t;
}

Section check_sweep_nullity(const std::vector<SweepRow>& rows, double seconds, std::size_t min_guaranteed) {
  Section s;
  s.name = "rank-nullity sweep";
  s.seconds = seconds;
  std::size_t guaranteed = 0;
  std::size_t mismatches = 0;
  std::string mismatches_text;
  for (const SweepRow& r : rows) {
    if (!r.valid || !r.guaranteed) continue;
    ++guaranteed;
    if (!r.agree()) {
      ++mismatches;
      mismatches_text += (mismatches_text.empty() ? "" : "; ") + r.label + ": predicted " +
                        std::to_string(r.predicted) + ", numerical " +
                        (r.numerical ? std::to_string(*r.numerical) : std::string("n/a"));
    }
  }
  s.checks.push_back(no_failures("nullity equals max(0, in - out)", mismatches, guaranteed,
                                 mismatches == 0 ? std::to_string(guaranteed) + " geometries agree" : mismatches_text));
  if (min_guaranteed > 0) {
    s.checks.push_back(holds("at least " + std::to_string(min_guaranteed) + " guaranteed geometries",
                             guaranteed >= min_guaranteed, std::to_string(guaranteed)));
  }
  return s;
}

Section check_sweep_equivalence(const std::vector<SweepRow>& rows) {
  Section s;
  s.name = "lowering oracle";
  double worst = 0.0;
  std::string where;
  for (const SweepRow& r : rows) {
    if (!r.valid) continue;
    if (r.equivalence_error >= worst) {
      worst = r.equivalence_error;
      where = r.label;
    }
  }
  s.checks.push_back(at_most("max |A x - layer(x)|", worst, 1e-12, "worst at " + where));
  return s;
}

}  // namespace nsp::cli
