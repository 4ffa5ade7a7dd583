#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "hanalab/codec.hpp"
#include "hanalab/engine.hpp"
#include "hanalab/expert_bot.hpp"

namespace hanalab {

struct Trajectory {
  long game_id = 0;
  std::vector<Transition> transitions;
  int final_score = 0;
};

// One state-action pair, the unit stored in JSONL dataset files.
struct DatasetRecord {
  long game_id = 0;
  int turn = 0;
  int player = 0;
  std::string obs_text;
  std::string action_text;
  int action_id = 0;
  std::vector<int> legal_action_ids;
  double reward = 0.0;
  int score_final = 0;
  std::string template_version;
};

struct CurationConfig {
  int min_score = 20;
  int per_class = 2200;
  double test_fraction = 0.10;
  double val_fraction_of_remainder = 0.10;
  uint64_t seed = 0;

  void validate() const;
};

struct CurationReport {
  long games_in = 0;
  long games_kept = 0;
  std::map<int, long> records_per_class;  // after balancing, before dedup
  long duplicates_dropped = 0;
  long train_size = 0;
  long val_size = 0;
  long test_size = 0;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

struct CuratedSplits {
  std::vector<DatasetRecord> train, val, test;
  CurationReport report;
};

// Expert self-play games with per-game seeds derived from master_seed;
// output is ordered by game_id and independent of the thread count.
std::vector<Trajectory> generate_trajectories(const GameConfig& config, long n_games,
                                              uint64_t master_seed, int threads = 0);

std::vector<DatasetRecord> flatten_trajectories(const std::vector<Trajectory>& trajectories,
                                                const TextTemplate& tmpl);

// filter (score > min_score) -> balance per action id -> dedup on obs_text
// (first kept) -> test split -> train/val split.
CuratedSplits curate_records(std::vector<DatasetRecord> records, const CurationConfig& cfg,
                             const GameConfig& game_config);

CuratedSplits curate(const std::vector<Trajectory>& trajectories, const CurationConfig& cfg,
                     const TextTemplate& tmpl);

void write_jsonl(const std::vector<DatasetRecord>& records, const std::filesystem::path& path);

// Validates the template version of every record; malformed lines raise
// ParseError carrying the 1-based line number.
std::vector<DatasetRecord> read_jsonl(const std::filesystem::path& path);

}  // namespace hanalab
