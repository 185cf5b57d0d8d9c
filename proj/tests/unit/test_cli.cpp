#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nsp/cli/battery.hpp"
#include "nsp/cli/commands.hpp"
#include "nsp/cli/report.hpp"
#include "nsp/cli/sweep.hpp"
#include "nsp/error.hpp"
#include "nsp/layer/equivalent.hpp"

using namespace nsp;
using namespace nsp::cli;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const char* name) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("report formats and number formatting") {
    CHECK(parse_format("csv") == ReportFormat::csv);
    CHECK(parse_format("json") == ReportFormat::json);
    CHECK_THROWS(parse_format("xml"));
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 3.0}) CHECK(std::stod(fmt17(v)) == v);
  }

  TEST_CASE("section verdicts") {
    Section s;
    CHECK_FALSE(s.passed());
    s.checks.push_back(at_most("a", 1e-12, 1e-10));
    s.checks.push_back(no_failures("b", 0, 10));
    CHECK(s.passed());
    CHECK(s.headline()->name == "a");
    s.checks.push_back(at_most("c", NAN, 1.0));
    CHECK_FALSE(s.passed());
    CHECK(s.headline()->name == "c");
    const auto j = to_json(s);
    CHECK(j["passed"] == false);
    CHECK(j["checks"][2]["measured"] == "nan");
  }

  TEST_CASE("tables keep numbers typed in json") {
    Table t;
    t.header = {"kind", "scale", "ok"};
    t.rows = {{"harmless", "1", "true"}, {"gaussian", "2.5e-3", "false"}, {"", "", ""}};
    const auto j = table_to_json(t);
    CHECK(j[0]["kind"] == "harmless");
    CHECK(j[0]["scale"] == 1);
    CHECK(j[0]["ok"] == true);
    CHECK(j[1]["scale"].get<double>() == 2.5e-3);
    CHECK(j[2]["scale"] == "");

    const auto dir = scratch("nsp_cli_table");
    write_table(dir / "t", t, ReportFormat::csv);
    CHECK(slurp(dir / "t.csv") == "kind,scale,ok\nharmless,1,true\ngaussian,2.5e-3,false\n,,\n");
    write_table(dir / "t", t, ReportFormat::json);
    CHECK(nlohmann::json::parse(slurp(dir / "t.json")) == j);
  }

  TEST_CASE("geometry strings") {
    const SweepGeometry c = parse_geometry("conv:3x32x32:10:7:2:3");
    const auto& g = std::get<ConvGeometry>(c);
    CHECK(g.in_channels == 3);
    CHECK(g.out_channels == 10);
    CHECK(g.kernel == 7);
    CHECK(g.padding == 3);
    CHECK(describe(c) == "conv:3x32x32:10:7:2:3");
    CHECK(describe(parse_geometry("fc:784:98")) == "fc:784:98");
    for (const char* bad : {"", "fc:1", "fc:a:2", "conv:3x32:1:1:1:0", "pool:1:2", "fc:-1:2"}) {
      CHECK_THROWS_AS(parse_geometry(bad), Error);
    }
  }

  TEST_CASE("default sweep covers the cited points with guaranteed predictions") {
    const auto geometries = default_sweep();
    std::size_t guaranteed = 0;
    bool cifar = false, square_conv = false, fc_square = false;
    for (const auto& g : geometries) {
      const std::string label = describe(g);
      cifar = cifar || label == "conv:3x32x32:10:7:2:3";
      square_conv = square_conv || label == "conv:3x32x32:12:3:2:1";
      fc_square = fc_square || label == "fc:784:784";
      LayerSpec spec = std::holds_alternative<FcGeometry>(g)
                           ? LayerSpec(random_fc_spec(std::get<FcGeometry>(g).in_features,
                                                      std::get<FcGeometry>(g).out_features, 1))
                           : LayerSpec(random_conv_spec(std::get<ConvGeometry>(g), 1));
      guaranteed += predict_nullspace_dim(spec).guaranteed ? 1 : 0;
    }
    CHECK(cifar);
    CHECK(square_conv);
    CHECK(fc_square);
    CHECK(guaranteed >= 50);
  }

  TEST_CASE("sweep flags invalid rows and continues") {
    const std::vector<SweepGeometry> g = {parse_geometry("fc:20:12"), parse_geometry("conv:1x4x4:2:9:1:0"),
                                          parse_geometry("conv:2x8x8:4:3:2:1"), parse_geometry("fc:12:20")};
    const auto rows = run_dim_sweep(g, 7, 5);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].agree());
    CHECK(rows[0].numerical == std::optional<std::size_t>(8));
    CHECK_FALSE(rows[1].valid);
    CHECK_FALSE(rows[1].agree());
    CHECK(rows[2].agree());
    CHECK(rows[3].agree());
    CHECK(*rows[3].numerical == 0);
    const Table t = sweep_table(rows);
    CHECK(t.header == std::vector<std::string>{"in_dim", "out_dim", "predicted", "numerical", "agree"});
    CHECK(t.rows[0] == std::vector<std::string>{"20", "12", "8", "8", "true"});
    CHECK(t.rows[1].back() == "false");
    CHECK(check_sweep_nullity(rows, 0.0, 0).passed());
    CHECK_FALSE(check_sweep_nullity(rows, 0.0, 50).passed());
    CHECK(check_sweep_equivalence(rows).passed());
  }

  TEST_CASE("contour grid invariants") {
    const EquivalentMatrix eq = build_equivalent(random_fc_spec(16, 6, 3));
    const NullspaceBasis basis = harmless_basis(eq);
    const ContourGrid g = contour_grid(eq, basis, 11);
    CHECK(g.a.size() == 21);
    CHECK(g.b.size() == 21);
    CHECK(g.a.front() == 0.0);
    CHECK(g.a.back() == 2.0);
    CHECK(g.b.front() == -2.0);
    CHECK(g.b.back() == 2.0);
    CHECK(check_contour(g).passed());
    CHECK(contour_table(g).rows.size() == 441);

    ContourGrid bent = g;
    bent.values[5 * 21 + 3] *= 1.0 + 1e-6;
    CHECK_FALSE(check_contour(bent).passed());

    const EquivalentMatrix injective = build_equivalent(random_fc_spec(6, 16, 3));
    CHECK_THROWS_AS(contour_grid(injective, harmless_basis(injective), 1), EmptySubspaceError);
  }

  TEST_CASE("decomposition suite on few trials") {
    const Section s = run_decomposition_suite(5, 30);
    CHECK(s.passed());
    CHECK(s.checks.size() == 8);
  }

  TEST_CASE("least-harmful suite on few samples") {
    CHECK(run_least_harmful_suite(5, 3, 200).passed());
  }

  TEST_CASE("ssim suite") { CHECK(run_ssim_suite(3).passed()); }

  TEST_CASE("lower command writes matrix, stats and basis") {
    const auto dir = scratch("nsp_cli_lower");
    {
      std::ofstream layer(dir / "layer.json");
      layer << R"({"kind": "fc", "in_features": 6, "out_features": 4})";
    }
    CommonOptions common;
    common.seed = 9;
    common.out = dir / "out";
    common.format = ReportFormat::json;
    std::ostringstream log;
    CHECK(cmd_lower(common, LowerOptions{dir / "layer.json"}, log) == 0);
    CHECK(log.str().find("nullity 2") != std::string::npos);
    CHECK(std::filesystem::exists(common.out / "equivalent.csv"));
    const NullspaceBasis b = load_basis(common.out / "basis.nspb");
    CHECK(b.dim == 2);
    const auto stats = nlohmann::json::parse(slurp(common.out / "lower_stats.json"));
    CHECK(stats[0]["rows"] == 4);
    CHECK(stats[0]["nnz"] == 24);
    CHECK(stats[0]["guaranteed"] == true);
  }

  TEST_CASE("lower command flags unguaranteed predictions") {
    const auto dir = scratch("nsp_cli_lower_flag");
    {
      std::ofstream layer(dir / "layer.json");
      layer << R"({"kind": "conv", "in_channels": 1, "in_height": 8, "in_width": 8, "out_channels": 2,
                   "kernel_h": 1, "kernel_w": 1, "stride": 2, "zero_padding": 0})";
    }
    CommonOptions common;
    common.seed = 1;
    common.out = dir / "out";
    std::ostringstream log;
    CHECK(cmd_lower(common, LowerOptions{dir / "layer.json"}, log) == 0);
    CHECK(log.str().find("formula unguaranteed") != std::string::npos);
  }
}
