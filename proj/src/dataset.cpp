#include "hanalab/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "hanalab/json_io.hpp"
#include "hanalab/parallel.hpp"

namespace hanalab {

void CurationConfig::validate() const {
  if (per_class < 1) throw ConfigError("per_class quota must be >= 1");
  if (test_fraction <= 0 || test_fraction >= 1)
    throw ConfigError("test_fraction must be in (0,1)");
  if (val_fraction_of_remainder <= 0 || val_fraction_of_remainder >= 1)
    throw ConfigError("val_fraction_of_remainder must be in (0,1)");
}

nlohmann::json CurationReport::to_json() const {
  nlohmann::json per_class = nlohmann::json::object();
  for (const auto& [id, count] : records_per_class) per_class[std::to_string(id)] = count;
  return nlohmann::json{{"games_in", games_in},
                        {"games_kept", games_kept},
                        {"records_per_class", per_class},
                        {"duplicates_dropped", duplicates_dropped},
                        {"split_sizes",
                         {{"train", train_size}, {"val", val_size}, {"test", test_size}}},
                        {"warnings", warnings}};
}

std::vector<Trajectory> generate_trajectories(const GameConfig& config, long n_games,
                                              uint64_t master_seed, int threads) {
  config.validate();
  std::vector<Trajectory> out(size_t(std::max<long>(n_games, 0)));
  parallel_for(
      n_games,
      [&](long g) {
        GameConfig game_cfg = config;
        game_cfg.seed = derive_seed(master_seed, uint64_t(g));
        Trajectory traj;
        traj.game_id = g;
        GameState state = new_game(game_cfg);
        while (!state.is_terminal()) {
          Observation obs = observe(state, state.current_player);
          PartnerKnowledge pk = observe_partner_knowledge(state, state.current_player);
          Action action = expert_act(obs, pk, game_cfg);
          StepResult step = apply_action(state, action);
          Observation next_obs = observe(step.state, step.state.current_player);
          Transition t;
          t.obs = std::move(obs);
          t.action = action;
          t.reward = step.reward;
          t.done = step.state.is_terminal();
          t.oracle_features = oracle_features_of(t.obs, action, step.reward, next_obs);
          t.next_obs = std::move(next_obs);
          traj.transitions.push_back(std::move(t));
          state = std::move(step.state);
        }
        traj.final_score = state.score();
        out[size_t(g)] = std::move(traj);
      },
      threads);
  return out;
}

std::vector<DatasetRecord> flatten_trajectories(const std::vector<Trajectory>& trajectories,
                                                const TextTemplate& tmpl) {
  std::vector<DatasetRecord> records;
  for (const Trajectory& traj : trajectories) {
    for (size_t i = 0; i < traj.transitions.size(); ++i) {
      const Transition& t = traj.transitions[i];
      DatasetRecord rec;
      rec.game_id = traj.game_id;
      rec.turn = int(i);
      rec.player = t.obs.viewer;
      rec.obs_text = render_observation(t.obs, tmpl);
      rec.action_text = render_action(t.action);
      rec.action_id = action_id(t.action, tmpl.config);
      rec.legal_action_ids = t.obs.legal_action_ids;
      rec.reward = t.reward;
      rec.score_final = traj.final_score;
      rec.template_version = tmpl.version;
      records.push_back(std::move(rec));
    }
  }
  return records;
}

namespace {

bool record_order(const DatasetRecord& a, const DatasetRecord& b) {
  return a.game_id != b.game_id ? a.game_id < b.game_id : a.turn < b.turn;
}

}  // namespace

CuratedSplits curate_records(std::vector<DatasetRecord> records, const CurationConfig& cfg,
                             const GameConfig& game_config) {
  cfg.validate();
  CuratedSplits out;
  CurationReport& report = out.report;

  // filter games by final score
  {
    std::vector<long> all_games, kept_games;
    for (const auto& r : records) all_games.push_back(r.game_id);
    std::sort(all_games.begin(), all_games.end());
    all_games.erase(std::unique(all_games.begin(), all_games.end()), all_games.end());
    report.games_in = long(all_games.size());
    std::erase_if(records, [&](const DatasetRecord& r) { return r.score_final <= cfg.min_score; });
    for (const auto& r : records) kept_games.push_back(r.game_id);
    std::sort(kept_games.begin(), kept_games.end());
    kept_games.erase(std::unique(kept_games.begin(), kept_games.end()), kept_games.end());
    report.games_kept = long(kept_games.size());
    if (report.games_kept == 0)
      report.warnings.push_back("no games passed the min_score filter");
  }
  std::sort(records.begin(), records.end(), record_order);

  // balance: up to per_class records per action id, sampled without
  // replacement
  std::vector<DatasetRecord> balanced;
  {
    std::map<int, std::vector<size_t>> by_class;
    for (size_t i = 0; i < records.size(); ++i) by_class[records[i].action_id].push_back(i);
    SplitMix64 rng(derive_seed(cfg.seed, 1));
    std::vector<size_t> selected;
    for (int id = 0; id < game_config.total_action_ids(); ++id) {
      auto it = by_class.find(id);
      const long have = it == by_class.end() ? 0 : long(it->second.size());
      report.records_per_class[id] = std::min<long>(have, cfg.per_class);
      if (have == 0) {
        report.warnings.push_back("no records for action id " + std::to_string(id));
        continue;
      }
      std::vector<size_t>& pool = it->second;
      if (have > cfg.per_class) {
        // partial Fisher-Yates: the first per_class slots become the sample
        for (long i = 0; i < cfg.per_class; ++i) {
          const long j = i + long(rng.next_below(uint64_t(have - i)));
          std::swap(pool[size_t(i)], pool[size_t(j)]);
        }
        pool.resize(size_t(cfg.per_class));
      } else if (have < cfg.per_class) {
        report.warnings.push_back("action id " + std::to_string(id) + " short of quota: " +
                                  std::to_string(have) + "/" + std::to_string(cfg.per_class));
      }
      for (size_t i : pool) selected.push_back(i);
    }
    std::sort(selected.begin(), selected.end());
    balanced.reserve(selected.size());
    for (size_t i : selected) balanced.push_back(std::move(records[i]));
  }

  // dedup on obs_text, first occurrence in (game_id, turn) order wins
  std::vector<DatasetRecord> unique;
  {
    std::set<std::string> seen;
    for (auto& rec : balanced)
      if (seen.insert(rec.obs_text).second)
        unique.push_back(std::move(rec));
      else
        ++report.duplicates_dropped;
  }

  // splits: random test reservation, then train/val on the remainder
  {
    std::vector<size_t> order(unique.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    SplitMix64 rng(derive_seed(cfg.seed, 2));
    fisher_yates_shuffle(order, rng);
    const long n = long(unique.size());
    const long n_test = std::llround(cfg.test_fraction * double(n));
    const long n_val = std::llround(cfg.val_fraction_of_remainder * double(n - n_test));
    for (long i = 0; i < n; ++i) {
      DatasetRecord& rec = unique[order[size_t(i)]];
      if (i < n_test)
        out.test.push_back(std::move(rec));
      else if (i < n_test + n_val)
        out.val.push_back(std::move(rec));
      else
        out.train.push_back(std::move(rec));
    }
    std::sort(out.train.begin(), out.train.end(), record_order);
    std::sort(out.val.begin(), out.val.end(), record_order);
    std::sort(out.test.begin(), out.test.end(), record_order);
    report.train_size = long(out.train.size());
    report.val_size = long(out.val.size());
    report.test_size = long(out.test.size());
  }
  return out;
}

CuratedSplits curate(const std::vector<Trajectory>& trajectories, const CurationConfig& cfg,
                     const TextTemplate& tmpl) {
  return curate_records(flatten_trajectories(trajectories, tmpl), cfg, tmpl.config);
}

void write_jsonl(const std::vector<DatasetRecord>& records, const std::filesystem::path& path) {
  std::ostringstream os;
  for (const auto& rec : records) {
    nlohmann::json j{{"game_id", rec.game_id},
                     {"turn", rec.turn},
                     {"player", rec.player},
                     {"obs_text", rec.obs_text},
                     {"action_text", rec.action_text},
                     {"action_id", rec.action_id},
                     {"legal_action_ids", rec.legal_action_ids},
                     {"reward", rec.reward},
                     {"score_final", rec.score_final},
                     {"template_version", rec.template_version}};
    os << j.dump() << '\n';
  }
  write_text_file(path, os.str());
}

std::vector<DatasetRecord> read_jsonl(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw StageError("io", "cannot open " + path.string());
  std::vector<DatasetRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError("malformed JSONL record", line_no);
    try {
      DatasetRecord rec;
      rec.game_id = j.at("game_id").get<long>();
      rec.turn = j.at("turn").get<int>();
      rec.player = j.at("player").get<int>();
      rec.obs_text = j.at("obs_text").get<std::string>();
      rec.action_text = j.at("action_text").get<std::string>();
      rec.action_id = j.at("action_id").get<int>();
      rec.legal_action_ids = j.at("legal_action_ids").get<std::vector<int>>();
      rec.reward = j.at("reward").get<double>();
      rec.score_final = j.at("score_final").get<int>();
      rec.template_version = j.at("template_version").get<std::string>();
      if (rec.template_version != kTextTemplateVersion)
        throw VersionError("record template version '" + rec.template_version +
                           "' does not match '" + std::string(kTextTemplateVersion) + "'");
      records.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad record: ") + e.what(), line_no);
    }
  }
  return records;
}

}  // namespace hanalab
