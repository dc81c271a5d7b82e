#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "mhplan/simworld.hpp"

namespace mhplan {

inline constexpr int kSchemaVersion = 1;

/// Invalid configuration; the message names the offending key and line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlannerVariant {
  PlannerKind kind = PlannerKind::MultiHypothesis;
  /// Zero for the baseline.
  std::size_t nHyp = 5;
  double pTarget = 0.95;

  std::string label() const;
  bool operator==(const PlannerVariant&) const = default;
};

struct CampaignConfig {
  /// Template for every episode; density, distribution, planner and seed are overridden per task.
  EpisodeConfig episode;
  std::vector<double> densities{0.1, 0.2, 0.3};
  std::vector<ForestDistribution> distributions{ForestDistribution::Uniform,
                                                ForestDistribution::Clusters};
  std::vector<PlannerVariant> planners;
  int numForests = 20;
  std::uint64_t baseSeed = 1;
  int workers = 1;
  std::string outputDir = "results";
  /// Include full trajectories in the records file.
  bool recordTrajectories = false;

  CampaignConfig();
};

/// Baseline plus MH with n_hyp in {1, 2, 3, 5} at p_target in {0.95, 0.999}.
std::vector<PlannerVariant> defaultPlannerVariants();

CampaignConfig parseCampaignConfig(const std::string& yamlText, const std::string& sourceName);
CampaignConfig loadCampaignConfig(const std::filesystem::path& path);
/// A YAML document that parses back to the same configuration.
std::string dumpCampaignConfig(const CampaignConfig& config);

/// Forest seed shared by every planner variant in a (density, distribution) cell.
std::uint64_t episodeSeed(std::uint64_t baseSeed, double density, ForestDistribution distribution,
                          int forestIndex);

struct EpisodeTask {
  double density = 0.0;
  ForestDistribution distribution = ForestDistribution::Uniform;
  PlannerVariant planner;
  int forest = 0;
  std::uint64_t seed = 0;

  std::string key() const;
};

/// All tasks in canonical order: distribution, density, planner, forest.
std::vector<EpisodeTask> expandTasks(const CampaignConfig& config);

EpisodeConfig makeEpisodeConfig(const CampaignConfig& config, const EpisodeTask& task);

/// Deterministic one-line JSON record; wall time is deliberately excluded.
std::string serializeRecord(const EpisodeTask& task, const EpisodeRecord& record,
                            bool includeTrajectory);

struct CellCounts {
  int success = 0;
  int stopped = 0;
  int crash = 0;
  int timeout = 0;

  int total() const { return success + stopped + crash + timeout; }
};

struct CampaignStats {
  std::size_t executed = 0;
  std::size_t skipped = 0;
};

/// Runs every task not yet present in <outputDir>/records.jsonl and refreshes
/// summary.csv. Progress goes to log.
CampaignStats runCampaign(const CampaignConfig& config, std::ostream& log);

/// Writes fig6_uniform.csv and fig7_clusters.csv into the results directory.
/// Returns 0 when every expected cell is complete, 1 otherwise (missing cells
/// are listed on err and left out of the tables).
int emitPlotData(const std::filesystem::path& resultsDir, std::ostream& err);

/// World header line, one line per pose, then an outcome line.
void writeTrajectory(const std::filesystem::path& path, const EpisodeConfig& config,
                     const EpisodeRecord& record, const ForestWorld& world);

}  // namespace mhplan
