#include <gtest/gtest.h>

#include <cmath>
#include <regex>

#include "flowvs/bench.hpp"
#include "flowvs/csv.hpp"
#include "flowvs/errors.hpp"
#include "flowvs/plot.hpp"
#include "oracles.hpp"
#include "xml_check.hpp"

namespace flowvs {
namespace {

TEST(Suite, DefaultSizes) {
  EXPECT_EQ(default_suite_size(Difficulty::Easy, false), 10);
  EXPECT_EQ(default_suite_size(Difficulty::Hard, false), 10);
  EXPECT_EQ(default_suite_size(Difficulty::Easy, true) + default_suite_size(Difficulty::Medium, true) +
                default_suite_size(Difficulty::Hard, true),
            10);
  EXPECT_EQ(default_suite_size(Difficulty::Medium, true), 4);
}

TEST(Suite, DeterministicAndPrefixStable) {
  const auto a = make_suite(Difficulty::Medium, 5, 42, SceneVariant::PointCloud);
  const auto b = make_suite(Difficulty::Medium, 3, 42, SceneVariant::PointCloud);
  ASSERT_EQ(a.size(), 5u);
  EXPECT_EQ(a[0].id, "medium-000");
  EXPECT_EQ(a[4].id, "medium-004");
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(a[i].task.initial_pose, b[i].task.initial_pose);
    EXPECT_TRUE(*a[i].task.scene == *b[i].task.scene);
  }
  const auto c = make_suite(Difficulty::Medium, 1, 43, SceneVariant::PointCloud);
  EXPECT_FALSE(c[0].task.initial_pose == a[0].task.initial_pose);
}

BenchConfig small_config(std::vector<Difficulty> suites, int n) {
  BenchConfig cfg;
  cfg.suites = std::move(suites);
  cfg.n = n;
  cfg.jobs = 1;
  return cfg;
}

TEST(Bench, EasySuiteConverges) {
  const BenchReport r = run_bench(small_config({Difficulty::Easy}, 3));
  ASSERT_EQ(r.rows.size(), 3u);
  for (const auto& row : r.rows) {
    EXPECT_TRUE(row.converged);
    EXPECT_EQ(row.method, "flow-true-depth");
    EXPECT_EQ(row.reason, "converged");
  }
}

TEST(Bench, AllSuitesCountsRows) {
  BenchConfig cfg = small_config({Difficulty::Easy, Difficulty::Medium, Difficulty::Hard}, 1);
  cfg.methods = {{Method::FlowTrueDepth, {}, {}}, {Method::PbvsOracle, {}, {}}};
  const BenchReport r = run_bench(cfg);
  ASSERT_EQ(r.rows.size(), 6u);
  for (const char* m : {"flow-true-depth", "pbvs-oracle"})
    EXPECT_EQ(std::count_if(r.rows.begin(), r.rows.end(), [&](const BenchRow& x) { return x.method == m; }), 3);
  EXPECT_EQ(r.aggregates.size(), 6u);
}

TEST(Bench, AggregatesRecomputeExactlyFromCsv) {
  BenchConfig cfg = small_config({Difficulty::Easy, Difficulty::Hard}, 3);
  cfg.methods = {{Method::FlowTrueDepth, {}, {}}, {Method::FlowDepthProxy, {}, {}}};
  const BenchReport r = run_bench(cfg);
  const auto rows = parse_bench_report(bench_report_csv(r));
  ASSERT_EQ(rows.size(), r.rows.size());
  for (const BenchAggregate& a : r.aggregates) {
    double t = 0, rr = 0, len = 0;
    int n = 0, conv = 0;
    for (const auto& row : rows) {
      if (to_string(row.difficulty) != a.suite || row.method != a.method) continue;
      t += row.final_t_err;
      rr += row.final_r_err;
      len += row.traj_len;
      conv += row.converged;
      ++n;
    }
    EXPECT_EQ(a.tasks, n);
    EXPECT_EQ(a.converged, conv);
    EXPECT_EQ(a.mean_final_t_err, t / n);
    EXPECT_EQ(a.mean_final_r_err, rr / n);
    EXPECT_EQ(a.mean_traj_len, len / n);
  }
}

TEST(Bench, ReportRoundTrip) {
  const BenchReport r = run_bench(small_config({Difficulty::Medium}, 2));
  const std::string csv = bench_report_csv(r);
  BenchReport back;
  back.rows = parse_bench_report(csv);
  EXPECT_EQ(bench_report_csv(back), csv);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "task_id,difficulty,method,init_t_err,init_r_err,final_t_err,final_r_err,traj_len,"
            "iterations,converged,reason");
  EXPECT_THROW(parse_bench_report("task_id,method\nx,y\n"), FormatError);
}

TEST(Bench, WorkerCountDoesNotChangeOutput) {
  BenchConfig cfg = small_config({Difficulty::Easy, Difficulty::Hard}, 2);
  cfg.methods = {{Method::FlowTrueDepth, {}, {}}, {Method::FlowDepthProxy, {}, {}}};
  const std::string one = bench_report_csv(run_bench(cfg));
  cfg.jobs = 4;
  EXPECT_EQ(bench_report_csv(run_bench(cfg)), one);
}

TEST(Bench, SummaryTableMentionsEveryAggregate) {
  const BenchReport r = run_bench(small_config({Difficulty::Easy}, 2));
  const std::string table = bench_summary_table(r);
  EXPECT_NE(table.find("flow-true-depth"), std::string::npos);
  EXPECT_NE(bench_summary_csv(r).find("easy,flow-true-depth,2,2,"), std::string::npos);
}

TEST(Sweep, BatchCount) {
  SweepConfig c;
  EXPECT_EQ(c.batches(), 10);
  c.step = 0.3;
  c.max = 1.0;
  EXPECT_EQ(c.batches(), 4);
  c.step = 0.5;
  EXPECT_EQ(c.batches(), 2);
}

TEST(Sweep, Validation) {
  SweepConfig c;
  c.step = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.max = 0.1;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.environments = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Sweep, Presets) {
  EXPECT_EQ(kSweepPresets[0], Vec3(10, 10, 25));
  EXPECT_EQ(kSweepPresets[1], Vec3(20, 20, 40));
  EXPECT_EQ(kSweepPresets[2], Vec3(30, 30, 50));
}

TEST(Sweep, TaskGeometry) {
  SweepConfig c;
  c.rotation_deg = Vec3(20, 20, 40);
  const Mat3 ref = oracle::quat_rotation(Vec3::UnitX(), oracle::rad(20)) *
                   oracle::quat_rotation(Vec3::UnitY(), oracle::rad(20)) *
                   oracle::quat_rotation(Vec3::UnitZ(), oracle::rad(40));
  for (int b = 1; b <= c.batches(); ++b) {
    const ServoTask t = make_sweep_task(c, b, 3);
    EXPECT_EQ(t.initial_pose, Pose::Identity());
    const Vec3 off = t.desired_pose.translation;
    // Equal displacement b * step along every axis.
    for (int a = 0; a < 3; ++a) EXPECT_NEAR(std::abs(off(a)), b * c.step, 1e-12);
    EXPECT_LT((t.desired_pose.rotation - ref).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GE(observed_fraction(*t.scene, t.desired_pose, Intrinsics::Default()), kMinObservedFraction);
    EXPECT_GE(observed_fraction(*t.scene, t.initial_pose, Intrinsics::Default()), kMinObservedFraction);
  }
  EXPECT_THROW(make_sweep_task(c, 0, 0), InvalidArgument);
  EXPECT_THROW(make_sweep_task(c, 11, 0), InvalidArgument);
}

TEST(Sweep, RatiosAreCountsOverEnvironments) {
  SweepConfig c;
  c.max = 1.2;
  c.environments = 3;
  const SweepResult r = run_sweep(c, {{Method::FlowTrueDepth, {}, {}}, {Method::PbvsOracle, {}, {}}},
                                  ControllerConfig{}, {}, {}, 1);
  ASSERT_EQ(r.rows.size(), 3u);
  for (const auto& row : r.rows) {
    ASSERT_EQ(row.ratio.size(), 2u);
    for (std::size_t m = 0; m < 2; ++m) {
      EXPECT_EQ(row.ratio[m], row.converged[m] / 3.0);
      EXPECT_GE(row.ratio[m], 0.0);
      EXPECT_LE(row.ratio[m], 1.0);
    }
  }
  const std::string csv = sweep_csv(r);
  const CsvTable t = parse_csv(csv);
  EXPECT_EQ(t.header, (std::vector<std::string>{"batch", "offset_m", "ratio_flow-true-depth", "ratio_pbvs-oracle"}));
  EXPECT_EQ(t.rows.size(), 3u);
  EXPECT_NE(csv.find("camera axes"), std::string::npos);
  EXPECT_EQ(t.rows[2][1], "1.2");
}

std::vector<double> polyline_ys(const std::string& svg, std::size_t which = 0) {
  const std::regex re("<polyline[^>]*points=\"([^\"]*)\"");
  auto it = std::sregex_iterator(svg.begin(), svg.end(), re);
  for (std::size_t i = 0; i < which; ++i) ++it;
  std::vector<double> ys;
  const std::string pts = (*it)[1];
  const std::regex pt("([-0-9.]+),([-0-9.]+)");
  for (auto p = std::sregex_iterator(pts.begin(), pts.end(), pt); p != std::sregex_iterator(); ++p)
    ys.push_back(std::stod((*p)[2]));
  return ys;
}

TEST(Plot, EmptyDataGivesAxesOnly) {
  const std::string svg = render_plots("batch,offset_m,ratio_flow-depth-proxy\n");
  EXPECT_TRUE(test::well_formed_xml(svg));
  EXPECT_NE(svg.find("<rect x="), std::string::npos);
  EXPECT_NE(svg.find("points=\"\""), std::string::npos);
  EXPECT_TRUE(test::well_formed_xml(render_plots(
      "iter,px,py,pz,qw,qx,qy,qz,v1,v2,v3,v4,v5,v6,feat_err,photo_err,t_err,r_err\n")));
}

TEST(Plot, Deterministic) {
  const std::string csv = "# c\nbatch,offset_m,ratio_a,ratio_b\n1,0.4,1,0.5\n2,0.8,0.75,nan\n";
  EXPECT_EQ(render_plots(csv), render_plots(csv));
}

TEST(Plot, MonotoneRatiosGiveMonotonePolyline) {
  const std::string svg =
      render_plots("batch,offset_m,ratio_m\n1,0.4,1\n2,0.8,0.9\n3,1.2,0.9\n4,1.6,0.5\n5,2,0.125\n");
  const auto ys = polyline_ys(svg);
  ASSERT_EQ(ys.size(), 5u);
  // SVG y grows downwards.
  for (std::size_t i = 1; i < ys.size(); ++i) EXPECT_GE(ys[i], ys[i - 1]);
  EXPECT_GT(ys.back(), ys.front());
}

TEST(Plot, TrajectoryAndReportPanels) {
  const std::string traj =
      "iter,px,py,pz,qw,qx,qy,qz,v1,v2,v3,v4,v5,v6,feat_err,photo_err,t_err,r_err\n"
      "0,0,0,0,1,0,0,0,0.1,0,0,0,0,0.01,0.5,0.2,1.2,10\n"
      "1,0.1,0,0,1,0,0,0,0,0,0,0,0,0,0.1,0.1,0.03,0.5\n";
  const std::string svg = render_plots(traj);
  EXPECT_TRUE(test::well_formed_xml(svg));
  EXPECT_NE(svg.find("Translational velocity"), std::string::npos);
  EXPECT_NE(svg.find("Rotational velocity"), std::string::npos);
  EXPECT_NE(svg.find("Photometric error"), std::string::npos);
  const BenchReport r = run_bench(small_config({Difficulty::Easy}, 2));
  EXPECT_TRUE(test::well_formed_xml(render_plots(bench_report_csv(r))));
}

TEST(Plot, EscapesText) {
  Chart c{"a<b & \"c\"", "x", "y", {{"s'1", {0, 1}, {0, 1}}}};
  const std::string svg = render_svg({c});
  EXPECT_TRUE(test::well_formed_xml(svg));
  EXPECT_NE(svg.find("a&lt;b &amp; &quot;c&quot;"), std::string::npos);
}

TEST(Plot, MalformedCsv) {
  EXPECT_THROW(render_plots("a,b\n1,2\n"), FormatError);
  EXPECT_THROW(render_plots("batch,offset_m,ratio_m\n1,0.4\n"), FormatError);
  EXPECT_THROW(render_plots("batch,offset_m,ratio_m\n1,0.4,x\n"), FormatError);
  EXPECT_THROW(render_plots(""), FormatError);
}

}  // namespace
}  // namespace flowvs
