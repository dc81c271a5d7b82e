#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "mhplan/campaign.hpp"

namespace py = pybind11;
using namespace mhplan;

namespace {

Point2 toPoint(const py::handle& h) {
  const auto t = h.cast<std::pair<double, double>>();
  return {t.first, t.second};
}

std::vector<Point2> toPoints(const py::iterable& seq) {
  std::vector<Point2> out;
  for (const auto& h : seq) out.push_back(toPoint(h));
  return out;
}

std::vector<Disc> toDiscs(const py::iterable& seq) {
  std::vector<Disc> out;
  for (const auto& h : seq) {
    const auto t = h.cast<std::tuple<double, double, double>>();
    out.push_back({{std::get<0>(t), std::get<1>(t)}, std::get<2>(t)});
  }
  return out;
}

py::list fromPoints(const std::vector<Point2>& pts) {
  py::list out;
  for (const auto& p : pts) out.append(py::make_tuple(p.x, p.y));
  return out;
}

ForestDistribution parseDistribution(const std::string& s) {
  if (s == "uniform") return ForestDistribution::Uniform;
  if (s == "clusters") return ForestDistribution::Clusters;
  throw py::value_error("distribution must be 'uniform' or 'clusters'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multiple-hypothesis path planning in uncertain forests";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
  py::register_exception<CoincidentObstaclesError>(m, "CoincidentObstaclesError", PyExc_ValueError);

  py::class_<Point2>(m, "Point2")
      .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
      .def(py::init([](const py::tuple& t) { return toPoint(t); }))
      .def_readwrite("x", &Point2::x)
      .def_readwrite("y", &Point2::y)
      .def("__iter__", [](const Point2& p) { return py::iter(py::make_tuple(p.x, p.y)); })
      .def("__repr__", [](const Point2& p) { return "Point2(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")"; });
  py::implicitly_convertible<py::tuple, Point2>();

  py::class_<ObstacleBelief2D>(m, "ObstacleBelief2D")
      .def(py::init([](const Point2& mean, double diameter, double cxx, double cxy, double cyy, double vd) {
             return ObstacleBelief2D{mean, diameter, cxx, cxy, cyy, vd};
           }),
           py::arg("mean"), py::arg("diameter"), py::arg("cov_xx") = 0.0, py::arg("cov_xy") = 0.0,
           py::arg("cov_yy") = 0.0, py::arg("var_diameter") = 0.0)
      .def_readwrite("mean", &ObstacleBelief2D::mean)
      .def_readwrite("diameter", &ObstacleBelief2D::diameter)
      .def_readwrite("cov_xx", &ObstacleBelief2D::covXX)
      .def_readwrite("cov_xy", &ObstacleBelief2D::covXY)
      .def_readwrite("cov_yy", &ObstacleBelief2D::covYY)
      .def_readwrite("var_diameter", &ObstacleBelief2D::varDiameter);

  m.def("normal_cdf", &normalCdf, py::arg("z"));
  m.def(
      "free_space_1d",
      [](double posA, double varA, double radA, double varRadA, double posB, double varB, double radB,
         double varRadB) {
        const auto s = freeSpace1D({{posA, varA}, {radA, varRadA}}, {{posB, varB}, {radB, varRadB}});
        return py::make_tuple(s.muS, s.varS);
      },
      py::arg("pos_a"), py::arg("var_a"), py::arg("radius_a"), py::arg("var_radius_a"), py::arg("pos_b"),
      py::arg("var_b"), py::arg("radius_b"), py::arg("var_radius_b"),
      "Mean and variance of the gap between two 1D obstacles.");
  m.def(
      "safe_passage_probability_1d",
      [](double muS, double varS, double width) { return safePassageProbability1D({muS, varS}, width); },
      py::arg("mu_s"), py::arg("var_s"), py::arg("robot_width"));
  m.def(
      "free_space_2d",
      [](const ObstacleBelief2D& a, const ObstacleBelief2D& b) {
        const auto s = freeSpace2D(a, b);
        return py::make_tuple(s.muS, s.varS);
      },
      py::arg("a"), py::arg("b"));
  m.def("safe_passage_probability_2d", &safePassageProbability2D, py::arg("a"), py::arg("b"),
        py::arg("robot_width"));

  m.def(
      "delaunay",
      [](const py::iterable& sites) {
        const auto pts = toPoints(sites);
        const Triangulation t = delaunayTriangulate(pts);
        py::dict out;
        out["sites"] = fromPoints(t.sites);
        out["source_index"] = t.sourceIndex;
        out["triangles"] = t.triangles;
        out["faces"] = t.faces;
        return out;
      },
      py::arg("sites"), "Delaunay triangulation of (x, y) sites. Triangles are counter-clockwise.");

  py::class_<LandmarkEstimate>(m, "LandmarkEstimate")
      .def(py::init([](long id, const Point2& mean, double varXX, double varXY, double varYY, double diameter,
                       double varDiameter, int updates) {
             LandmarkEstimate e;
             e.id = id;
             e.positionMean = mean;
             e.positionCov << varXX, varXY, varXY, varYY;
             e.diameterMean = diameter;
             e.diameterVar = varDiameter;
             e.numUpdates = updates;
             return e;
           }),
           py::arg("id"), py::arg("mean"), py::arg("var_xx"), py::arg("var_xy"), py::arg("var_yy"),
           py::arg("diameter"), py::arg("var_diameter"), py::arg("num_updates") = 2)
      .def_readonly("id", &LandmarkEstimate::id)
      .def_readonly("mean", &LandmarkEstimate::positionMean)
      .def_readonly("diameter", &LandmarkEstimate::diameterMean)
      .def("belief", &LandmarkEstimate::belief);

  py::class_<GraphParams>(m, "GraphParams")
      .def(py::init<>())
      .def_readwrite("p_target", &GraphParams::pTarget)
      .def_readwrite("r_short", &GraphParams::rShort)
      .def_readwrite("robot_width", &GraphParams::robotWidth)
      .def_readwrite("max_graph_range", &GraphParams::maxGraphRange)
      .def_readwrite("min_updates", &GraphParams::minUpdates);

  py::enum_<RangeZone>(m, "RangeZone").value("SHORT", RangeZone::Short).value("LONG", RangeZone::Long);

  py::class_<NavVertex>(m, "NavVertex")
      .def_readonly("id", &NavVertex::id)
      .def_readonly("position", &NavVertex::position)
      .def_readonly("p_safe", &NavVertex::pSafe)
      .def_readonly("zone", &NavVertex::zone)
      .def_readonly("face", &NavVertex::face);

  py::class_<NavGraph>(m, "NavGraph")
      .def_readonly("vertices", &NavGraph::vertices)
      .def_property_readonly("edges",
                             [](const NavGraph& g) {
                               py::list out;
                               for (const auto& e : g.edges) out.append(py::make_tuple(e.u, e.v, e.cDist));
                               return out;
                             })
      .def_readonly("start_id", &NavGraph::startId)
      .def_readonly("goal_id", &NavGraph::goalId)
      .def_readonly("degenerate", &NavGraph::degenerate);

  m.def(
      "build_navigation_graph",
      [](const std::vector<LandmarkEstimate>& estimates, const Point2& start, const Point2& goal,
         const GraphParams& params) { return buildNavigationGraph(estimates, start, goal, params); },
      py::arg("estimates"), py::arg("start"), py::arg("goal"), py::arg("params") = GraphParams{});

  py::class_<PlannerParams>(m, "PlannerParams")
      .def(py::init([](std::size_t nHyp, double pTarget, double pMin) {
             PlannerParams p;
             p.nHyp = nHyp;
             p.pTarget = pTarget;
             p.pMin = pMin;
             return p;
           }),
           py::arg("n_hyp") = 5, py::arg("p_target") = 0.95, py::arg("p_min") = 0.01)
      .def_readwrite("n_hyp", &PlannerParams::nHyp)
      .def_readwrite("p_target", &PlannerParams::pTarget)
      .def_readwrite("p_min", &PlannerParams::pMin)
      .def_readwrite("alpha_dist", &PlannerParams::alphaDist)
      .def_readwrite("alpha_safe", &PlannerParams::alphaSafe)
      .def_readwrite("d_local", &PlannerParams::dLocal);

  py::class_<CandidatePath>(m, "CandidatePath")
      .def_readonly("vertices", &CandidatePath::vertices)
      .def_readonly("distance", &CandidatePath::cDistRaw)
      .def_readonly("p_path", &CandidatePath::pPath);

  m.def("generate_candidates", &generateCandidates, py::arg("graph"), py::arg("params"));
  m.def(
      "plan",
      [](const NavGraph& g, const PlannerParams& params, const Point2& robot) {
        const PlanResult r = planMultipleHypothesis(g, params, robot);
        py::dict out;
        out["candidates"] = r.candidates;
        out["best_index"] = r.bestIndex;
        out["local_goal"] = r.found() ? py::object(py::make_tuple(r.localGoal.x, r.localGoal.y)) : py::none();
        return out;
      },
      py::arg("graph"), py::arg("params"), py::arg("robot"));
  m.def(
      "collision_bounds",
      [](const NavGraph& g, const CandidatePath& p) {
        const auto b = collisionBounds(g, p);
        return py::make_tuple(b.independent, b.worstCaseLower);
      },
      py::arg("graph"), py::arg("path"), "(independent, worst-case lower bound) collision probabilities.");

  m.def(
      "hybrid_a_star",
      [](const std::tuple<double, double, double>& start, const Point2& goal, const py::iterable& discs,
         double robotWidth) -> py::object {
        LocalPlannerParams params;
        params.robotWidth = robotWidth;
        const auto obstacles = toDiscs(discs);
        const auto path = hybridAStar(Pose2(std::get<0>(start), std::get<1>(start), std::get<2>(start)), goal,
                                      obstacles, params);
        if (!path) return py::none();
        return fromPoints(path->waypoints);
      },
      py::arg("start"), py::arg("goal"), py::arg("discs"), py::arg("robot_width") = 0.6,
      "Waypoints from (x, y, heading) to goal among (x, y, radius) discs, or None.");
  m.def(
      "smooth_path",
      [](const py::iterable& path, const py::iterable& discs, double robotWidth) {
        SmootherParams params;
        params.clearanceThreshold = robotWidth;
        const auto pts = toPoints(path);
        const auto obstacles = toDiscs(discs);
        return fromPoints(smoothPath(pts, obstacles, robotWidth, params).path);
      },
      py::arg("path"), py::arg("discs"), py::arg("robot_width") = 0.6);
  m.def(
      "baseline_global_astar",
      [](const Point2& start, const Point2& goal, const py::iterable& discs, double robotWidth,
         const Point2& lo, const Point2& hi, double resolution) -> py::object {
        const auto obstacles = toDiscs(discs);
        const auto path = baselineGlobalAStar(start, goal, obstacles, robotWidth, {lo, hi}, resolution);
        if (!path) return py::none();
        return fromPoints(path->polyline);
      },
      py::arg("start"), py::arg("goal"), py::arg("discs"), py::arg("robot_width"), py::arg("lower"),
      py::arg("upper"), py::arg("resolution") = 0.2);

  py::class_<CampaignConfig>(m, "CampaignConfig")
      .def(py::init<>())
      .def_readwrite("num_forests", &CampaignConfig::numForests)
      .def_readwrite("base_seed", &CampaignConfig::baseSeed)
      .def_readwrite("workers", &CampaignConfig::workers)
      .def_readwrite("output_dir", &CampaignConfig::outputDir)
      .def_readwrite("densities", &CampaignConfig::densities)
      .def("dump", &dumpCampaignConfig);

  m.def("parse_config", &parseCampaignConfig, py::arg("text"), py::arg("source_name") = "<string>");
  m.def("load_config", &loadCampaignConfig, py::arg("path"));

  m.def(
      "run_episode",
      [](const CampaignConfig& cfg, std::uint64_t seed, double density, const std::string& distribution,
         const std::string& planner, std::size_t nHyp, double pTarget, bool trajectory) {
        EpisodeTask task;
        task.density = density;
        task.distribution = parseDistribution(distribution);
        if (planner == "baseline") {
          task.planner = {PlannerKind::Baseline, 0, 0.0};
        } else if (planner == "mh") {
          task.planner = {PlannerKind::MultiHypothesis, nHyp, pTarget};
        } else {
          throw py::value_error("planner must be 'baseline' or 'mh'");
        }
        task.seed = seed;
        const EpisodeConfig ec = makeEpisodeConfig(cfg, task);
        validate(ec);
        std::string line;
        {
          py::gil_scoped_release release;
          line = serializeRecord(task, runEpisode(ec), trajectory);
        }
        return py::module_::import("json").attr("loads")(line);
      },
      py::arg("config"), py::arg("seed"), py::arg("density") = 0.3, py::arg("distribution") = "uniform",
      py::arg("planner") = "mh", py::arg("n_hyp") = 5, py::arg("p_target") = 0.95, py::arg("trajectory") = false,
      "Runs one closed-loop episode and returns its record as a dict.");

  m.def(
      "run_campaign",
      [](const CampaignConfig& cfg) {
        std::ostringstream log;
        CampaignStats stats;
        {
          py::gil_scoped_release release;
          stats = runCampaign(cfg, log);
        }
        return py::make_tuple(stats.executed, stats.skipped);
      },
      py::arg("config"), "Runs or resumes a campaign; returns (executed, skipped).");
  m.def(
      "emit_plot_data",
      [](const std::filesystem::path& dir) {
        std::ostringstream err;
        const int code = emitPlotData(dir, err);
        return py::make_tuple(code, err.str());
      },
      py::arg("results_dir"));
}
