#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "mhplan/campaign.hpp"

using namespace mhplan;

int main(int argc, char** argv) {
  CLI::App app{"Multiple-hypothesis forest navigation: campaigns, plot tables and single episodes"};
  app.require_subcommand(1);

  std::string runConfig;
  int workers = 0;
  std::string runOut;
  auto* run = app.add_subcommand("run", "Run (or resume) a campaign of episodes");
  run->add_option("--config", runConfig, "Campaign YAML file")->required();
  run->add_option("--workers", workers, "Parallel episodes (overrides the config)")->check(CLI::PositiveNumber);
  run->add_option("--out", runOut, "Results directory (overrides the config)");

  std::string plotOut;
  auto* plot = app.add_subcommand("plot-data", "Write per-figure outcome tables from campaign results");
  plot->add_option("--out", plotOut, "Results directory of a campaign")->required();

  std::string epConfig, trajectory, distribution, planner;
  std::uint64_t seed = 0;
  double density = -1.0;
  std::size_t nHyp = 0;
  double pTarget = -1.0;
  auto* episode = app.add_subcommand("episode", "Run one episode and write its trajectory");
  episode->add_option("--config", epConfig, "Campaign YAML file")->required();
  episode->add_option("--seed", seed, "Forest seed")->required();
  episode->add_option("--trajectory", trajectory, "Output JSONL file")->required();
  episode->add_option("--density", density, "Trees per square metre")->check(CLI::PositiveNumber);
  episode->add_option("--distribution", distribution, "uniform or clusters")
      ->check(CLI::IsMember({"uniform", "clusters"}));
  episode->add_option("--planner", planner, "baseline or mh")->check(CLI::IsMember({"baseline", "mh"}));
  episode->add_option("--n-hyp", nHyp, "Hypotheses for the mh planner")->check(CLI::PositiveNumber);
  episode->add_option("--p-target", pTarget, "Target safety probability")->check(CLI::Range(0.0, 1.0));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      CampaignConfig cfg = loadCampaignConfig(runConfig);
      if (workers > 0) cfg.workers = workers;
      if (!runOut.empty()) cfg.outputDir = runOut;
      const auto stats = runCampaign(cfg, std::cerr);
      std::cout << "executed " << stats.executed << ", skipped " << stats.skipped << ", results in "
                << cfg.outputDir << "\n";
      return 0;
    }
    if (*plot) {
      return emitPlotData(plotOut, std::cerr);
    }
    if (*episode) {
      const CampaignConfig cfg = loadCampaignConfig(epConfig);
      EpisodeTask task;
      task.density = density > 0.0 ? density : cfg.densities.front();
      task.distribution = cfg.distributions.front();
      if (!distribution.empty()) {
        task.distribution = distribution == "uniform" ? ForestDistribution::Uniform : ForestDistribution::Clusters;
      }
      task.planner = PlannerVariant{PlannerKind::MultiHypothesis, cfg.episode.mh.nHyp, cfg.episode.mh.pTarget};
      if (planner == "baseline") task.planner = PlannerVariant{PlannerKind::Baseline, 0, 0.0};
      if (task.planner.kind == PlannerKind::MultiHypothesis) {
        if (nHyp > 0) task.planner.nHyp = nHyp;
        if (pTarget >= 0.0) task.planner.pTarget = pTarget;
      }
      task.seed = seed;
      const EpisodeConfig ec = makeEpisodeConfig(cfg, task);
      validate(ec);
      ForestWorld world;
      const EpisodeRecord rec = runEpisode(ec, &world);
      writeTrajectory(trajectory, ec, rec, world);
      std::cout << toString(rec.outcome) << " after " << rec.simTime << " s, path " << rec.pathLength
                << " m, " << rec.numTrees << " trees\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
