#include "hanalab/pipeline.hpp"

#include <algorithm>
#include <cstdio>

#include "hanalab/json_io.hpp"

namespace hanalab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return key == k; }) == allowed.end())
      throw ConfigError("unknown config key '" + where + "." + key + "'");
  }
}

GameConfig game_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"num_players", "colors", "ranks", "rank_multiplicities", "hand_size",
                       "max_hint_tokens", "max_life_tokens", "bomb_out_zeroes_score",
                       "discard_in_obs", "seed"},
                      "game");
  GameConfig g;
  g.num_players = j.value("num_players", g.num_players);
  g.colors = j.value("colors", g.colors);
  g.ranks = j.value("ranks", g.ranks);
  g.rank_multiplicities = j.value("rank_multiplicities", g.rank_multiplicities);
  g.hand_size = j.value("hand_size", g.hand_size);
  g.max_hint_tokens = j.value("max_hint_tokens", g.max_hint_tokens);
  g.max_life_tokens = j.value("max_life_tokens", g.max_life_tokens);
  g.bomb_out_zeroes_score = j.value("bomb_out_zeroes_score", g.bomb_out_zeroes_score);
  g.discard_in_obs = j.value("discard_in_obs", g.discard_in_obs);
  g.seed = j.value("seed", g.seed);
  return g;
}

json game_to_json(const GameConfig& g) {
  return json{{"num_players", g.num_players},
              {"colors", g.colors},
              {"ranks", g.ranks},
              {"rank_multiplicities", g.rank_multiplicities},
              {"hand_size", g.hand_size},
              {"max_hint_tokens", g.max_hint_tokens},
              {"max_life_tokens", g.max_life_tokens},
              {"bomb_out_zeroes_score", g.bomb_out_zeroes_score},
              {"discard_in_obs", g.discard_in_obs},
              {"seed", g.seed}};
}

// Creates <out>/.lock exclusively; at most one pipeline per directory.
class Lockfile {
 public:
  explicit Lockfile(const fs::path& path) : path_(path) {
    std::FILE* f = std::fopen(path.string().c_str(), "wx");
    if (!f)
      throw StageError("pipeline",
                       "output directory is locked (" + path.string() + " exists)");
    std::fclose(f);
  }
  ~Lockfile() {
    std::error_code ec;
    fs::remove(path_, ec);
  }

 private:
  fs::path path_;
};

std::vector<DatasetRecord> apply_data_fraction(std::vector<DatasetRecord> records,
                                               double fraction, uint64_t seed) {
  if (fraction >= 1.0) return records;
  std::vector<size_t> order(records.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  SplitMix64 rng(derive_seed(seed, 777));
  fisher_yates_shuffle(order, rng);
  const long keep = std::max<long>(1, std::llround(fraction * double(records.size())));
  order.resize(size_t(keep));
  std::sort(order.begin(), order.end());
  std::vector<DatasetRecord> out;
  out.reserve(order.size());
  for (size_t i : order) out.push_back(std::move(records[i]));
  return out;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  reject_unknown_keys(j,
                      {"out_dir", "threads", "game", "data", "curation", "ablation", "teacher",
                       "student", "distill", "selection", "eval", "crossplay"},
                      "$");
  RunConfig cfg;
  cfg.out_dir = j.value("out_dir", std::string("."));
  cfg.threads = j.value("threads", 0);
  if (j.contains("game")) cfg.game = game_from_json(j.at("game"));

  if (j.contains("data")) {
    const json& d = j.at("data");
    reject_unknown_keys(d, {"n_games", "seed"}, "data");
    cfg.data_n_games = d.value("n_games", cfg.data_n_games);
    cfg.data_seed = d.value("seed", cfg.data_seed);
  }
  if (j.contains("curation")) {
    const json& c = j.at("curation");
    reject_unknown_keys(
        c, {"min_score", "per_class", "test_fraction", "val_fraction_of_remainder", "seed"},
        "curation");
    cfg.curation.min_score = c.value("min_score", cfg.curation.min_score);
    cfg.curation.per_class = c.value("per_class", cfg.curation.per_class);
    cfg.curation.test_fraction = c.value("test_fraction", cfg.curation.test_fraction);
    cfg.curation.val_fraction_of_remainder =
        c.value("val_fraction_of_remainder", cfg.curation.val_fraction_of_remainder);
    cfg.curation.seed = c.value("seed", cfg.curation.seed);
  }
  if (j.contains("ablation")) {
    const json& a = j.at("ablation");
    reject_unknown_keys(a, {"discard_in_obs", "data_fraction"}, "ablation");
    cfg.game.discard_in_obs = a.value("discard_in_obs", cfg.game.discard_in_obs);
    cfg.data_fraction = a.value("data_fraction", cfg.data_fraction);
  }
  if (j.contains("teacher")) {
    const json& t = j.at("teacher");
    reject_unknown_keys(t,
                        {"hash_dim", "hidden", "learning_rate", "batch_size", "clip_norm",
                         "epochs", "seed", "optimizer", "select_by_gameplay", "gameplay_games",
                         "gameplay_seed"},
                        "teacher");
    cfg.teacher.hash_dim = t.value("hash_dim", cfg.teacher.hash_dim);
    cfg.teacher.hidden = t.value("hidden", cfg.teacher.hidden);
    cfg.teacher.train.learning_rate = t.value("learning_rate", cfg.teacher.train.learning_rate);
    cfg.teacher.train.batch_size = t.value("batch_size", cfg.teacher.train.batch_size);
    cfg.teacher.train.clip_norm = t.value("clip_norm", cfg.teacher.train.clip_norm);
    cfg.teacher.train.epochs = t.value("epochs", cfg.teacher.train.epochs);
    cfg.teacher.train.seed = t.value("seed", cfg.teacher.train.seed);
    cfg.teacher.train.optimizer = t.value("optimizer", cfg.teacher.train.optimizer);
    cfg.teacher.select_by_gameplay =
        t.value("select_by_gameplay", cfg.teacher.select_by_gameplay);
    cfg.teacher.gameplay_games = t.value("gameplay_games", cfg.teacher.gameplay_games);
    cfg.teacher.gameplay_seed = t.value("gameplay_seed", cfg.teacher.gameplay_seed);
  }
  if (j.contains("student")) {
    const json& s = j.at("student");
    reject_unknown_keys(s,
                        {"head", "hash_dim", "hidden", "embedding_dim", "gamma", "env_steps",
                         "update_every", "min_replay", "replay_capacity", "priority_fraction",
                         "target_sync", "eps_start", "eps_end", "eps_fraction", "learning_rate",
                         "batch_size", "clip_norm", "seed", "optimizer", "eval_every",
                         "eval_games", "eval_seed"},
                        "student");
    cfg.student.head = s.value("head", cfg.student.head);
    cfg.student.hash_dim = s.value("hash_dim", cfg.student.hash_dim);
    cfg.student.hidden = s.value("hidden", cfg.student.hidden);
    cfg.student.embedding_dim = s.value("embedding_dim", cfg.student.embedding_dim);
    cfg.student.gamma = s.value("gamma", cfg.student.head == "drrn" ? 0.9 : cfg.student.gamma);
    cfg.student.env_steps = s.value("env_steps", cfg.student.env_steps);
    cfg.student.update_every = s.value("update_every", cfg.student.update_every);
    cfg.student.min_replay = s.value("min_replay", cfg.student.min_replay);
    cfg.student.replay_capacity = s.value("replay_capacity", cfg.student.replay_capacity);
    cfg.student.priority_fraction = s.value("priority_fraction", cfg.student.priority_fraction);
    cfg.student.target_sync = s.value("target_sync", cfg.student.target_sync);
    cfg.student.eps_start = s.value("eps_start", cfg.student.eps_start);
    cfg.student.eps_end = s.value("eps_end", cfg.student.eps_end);
    cfg.student.eps_fraction = s.value("eps_fraction", cfg.student.eps_fraction);
    cfg.student.train.learning_rate = s.value("learning_rate", cfg.student.train.learning_rate);
    cfg.student.train.batch_size = s.value("batch_size", cfg.student.train.batch_size);
    cfg.student.train.clip_norm = s.value("clip_norm", cfg.student.train.clip_norm);
    cfg.student.train.seed = s.value("seed", cfg.student.train.seed);
    cfg.student.train.optimizer = s.value("optimizer", cfg.student.train.optimizer);
    cfg.student.eval_every = s.value("eval_every", cfg.student.eval_every);
    cfg.student.eval_games = s.value("eval_games", cfg.student.eval_games);
    cfg.student.eval_seed = s.value("eval_seed", cfg.student.eval_seed);
  }
  if (j.contains("distill")) {
    const json& d = j.at("distill");
    reject_unknown_keys(
        d, {"enabled", "warmup_updates", "decay_updates", "tau", "teacher_mask", "gate_warmup"},
        "distill");
    cfg.distill_enabled = d.value("enabled", cfg.distill_enabled);
    cfg.distill.warmup_updates = d.value("warmup_updates", cfg.distill.warmup_updates);
    cfg.distill.decay_updates = d.value("decay_updates", cfg.distill.decay_updates);
    cfg.distill.tau = d.value("tau", cfg.distill.tau);
    cfg.distill.teacher_mask = d.value("teacher_mask", cfg.distill.teacher_mask);
    cfg.distill.gate_warmup = d.value("gate_warmup", cfg.distill.gate_warmup);
  }
  if (j.contains("selection")) {
    const json& s = j.at("selection");
    reject_unknown_keys(s,
                        {"enabled", "heuristic", "p_plus", "buffer_capacity", "d_lm",
                         "refine_every_k", "gradient_steps", "weight_variant", "beta",
                         "learning_rate", "clip_norm", "optimizer", "seed"},
                        "selection");
    cfg.selection_enabled = s.value("enabled", cfg.selection_enabled);
    if (s.contains("heuristic"))
      cfg.selection.heuristic = heuristic_from_string(s.at("heuristic").get<std::string>());
    cfg.selection.p_plus = s.value("p_plus", cfg.selection.p_plus);
    cfg.selection.buffer_capacity = s.value("buffer_capacity", cfg.selection.buffer_capacity);
    cfg.selection.d_lm = s.value("d_lm", cfg.selection.d_lm);
    cfg.selection.refine_every_k = s.value("refine_every_k", cfg.selection.refine_every_k);
    cfg.selection.gradient_steps = s.value("gradient_steps", cfg.selection.gradient_steps);
    if (s.contains("weight_variant"))
      cfg.selection.weight_variant =
          weight_variant_from_string(s.at("weight_variant").get<std::string>());
    cfg.selection.beta = s.value("beta", cfg.selection.beta);
    cfg.selection.refine.learning_rate =
        s.value("learning_rate", cfg.selection.refine.learning_rate);
    cfg.selection.refine.clip_norm = s.value("clip_norm", cfg.selection.refine.clip_norm);
    cfg.selection.refine.optimizer = s.value("optimizer", cfg.selection.refine.optimizer);
    cfg.selection.seed = s.value("seed", cfg.selection.seed);
  }
  if (j.contains("eval")) {
    const json& e = j.at("eval");
    reject_unknown_keys(e, {"n_games", "seed", "illegal_policy"}, "eval");
    cfg.eval_n_games = e.value("n_games", cfg.eval_n_games);
    cfg.eval_seed = e.value("seed", cfg.eval_seed);
    if (e.contains("illegal_policy"))
      cfg.illegal_policy = illegal_policy_from_string(e.at("illegal_policy").get<std::string>());
  }
  if (j.contains("crossplay")) {
    const json& c = j.at("crossplay");
    reject_unknown_keys(c, {"enabled", "players", "n_games", "seed"}, "crossplay");
    cfg.crossplay_enabled = c.value("enabled", cfg.crossplay_enabled);
    cfg.crossplay_players = c.value("players", cfg.crossplay_players);
    cfg.crossplay_n_games = c.value("n_games", cfg.crossplay_n_games);
    cfg.crossplay_seed = c.value("seed", cfg.crossplay_seed);
  }
  cfg.teacher.game = cfg.game;
  cfg.teacher.threads = cfg.threads;
  cfg.student.game = cfg.game;
  cfg.student.threads = cfg.threads;
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_file(const fs::path& path) {
  json j;
  try {
    j = read_json_file(path);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

void RunConfig::validate() const {
  game.validate();
  curation.validate();
  teacher.train.validate();
  student.validate();
  distill.validate();
  selection.validate();
  if (data_n_games < 0) throw ConfigError("data.n_games must be >= 0");
  if (data_fraction <= 0.0 || data_fraction > 1.0)
    throw ConfigError("ablation.data_fraction must be in (0,1]");
  if (eval_n_games < 1) throw ConfigError("eval.n_games must be >= 1");
  for (int p : crossplay_players)
    if (p < 2 || p > 5) throw ConfigError("crossplay player counts must be in 2..5");
}

json RunConfig::to_json() const {
  json j;
  j["out_dir"] = ".";  // artifact paths are relative to the directory itself
  j["threads"] = threads;
  j["game"] = game_to_json(game);
  j["data"] = {{"n_games", data_n_games}, {"seed", data_seed}};
  j["curation"] = {{"min_score", curation.min_score},
                   {"per_class", curation.per_class},
                   {"test_fraction", curation.test_fraction},
                   {"val_fraction_of_remainder", curation.val_fraction_of_remainder},
                   {"seed", curation.seed}};
  j["ablation"] = {{"discard_in_obs", game.discard_in_obs}, {"data_fraction", data_fraction}};
  j["teacher"] = {{"hash_dim", teacher.hash_dim},
                  {"hidden", teacher.hidden},
                  {"learning_rate", teacher.train.learning_rate},
                  {"batch_size", teacher.train.batch_size},
                  {"clip_norm", teacher.train.clip_norm},
                  {"epochs", teacher.train.epochs},
                  {"seed", teacher.train.seed},
                  {"optimizer", teacher.train.optimizer},
                  {"select_by_gameplay", teacher.select_by_gameplay},
                  {"gameplay_games", teacher.gameplay_games},
                  {"gameplay_seed", teacher.gameplay_seed}};
  j["student"] = {{"head", student.head},
                  {"hash_dim", student.hash_dim},
                  {"hidden", student.hidden},
                  {"embedding_dim", student.embedding_dim},
                  {"gamma", student.gamma},
                  {"env_steps", student.env_steps},
                  {"update_every", student.update_every},
                  {"min_replay", student.min_replay},
                  {"replay_capacity", student.replay_capacity},
                  {"priority_fraction", student.priority_fraction},
                  {"target_sync", student.target_sync},
                  {"eps_start", student.eps_start},
                  {"eps_end", student.eps_end},
                  {"eps_fraction", student.eps_fraction},
                  {"learning_rate", student.train.learning_rate},
                  {"batch_size", student.train.batch_size},
                  {"clip_norm", student.train.clip_norm},
                  {"seed", student.train.seed},
                  {"optimizer", student.train.optimizer},
                  {"eval_every", student.eval_every},
                  {"eval_games", student.eval_games},
                  {"eval_seed", student.eval_seed}};
  j["distill"] = {{"enabled", distill_enabled},
                  {"warmup_updates", distill.warmup_updates},
                  {"decay_updates", distill.decay_updates},
                  {"tau", distill.tau},
                  {"teacher_mask", distill.teacher_mask},
                  {"gate_warmup", distill.gate_warmup}};
  j["selection"] = {{"enabled", selection_enabled},
                    {"heuristic", to_string(selection.heuristic)},
                    {"p_plus", selection.p_plus},
                    {"buffer_capacity", selection.buffer_capacity},
                    {"d_lm", selection.d_lm},
                    {"refine_every_k", selection.refine_every_k},
                    {"gradient_steps", selection.gradient_steps},
                    {"weight_variant", to_string(selection.weight_variant)},
                    {"beta", selection.beta},
                    {"learning_rate", selection.refine.learning_rate},
                    {"clip_norm", selection.refine.clip_norm},
                    {"optimizer", selection.refine.optimizer},
                    {"seed", selection.seed}};
  j["eval"] = {{"n_games", eval_n_games},
               {"seed", eval_seed},
               {"illegal_policy", to_string(illegal_policy)}};
  j["crossplay"] = {{"enabled", crossplay_enabled},
                    {"players", crossplay_players},
                    {"n_games", crossplay_n_games},
                    {"seed", crossplay_seed}};
  return j;
}

// -- stages -------------------------------------------------------------

void stage_gen_data(const RunConfig& cfg) {
  try {
    ArtifactPaths paths(cfg.out_dir);
    fs::create_directories(paths.root);
    TextTemplate tmpl;
    tmpl.config = cfg.game;
    auto trajectories =
        generate_trajectories(cfg.game, cfg.data_n_games, cfg.data_seed, cfg.threads);
    write_jsonl(flatten_trajectories(trajectories, tmpl), paths.records());
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("gen-data", e.what());
  }
}

void stage_curate(const RunConfig& cfg) {
  try {
    ArtifactPaths paths(cfg.out_dir);
    auto records = read_jsonl(paths.records());
    CuratedSplits splits = curate_records(std::move(records), cfg.curation, cfg.game);
    fs::create_directories(paths.dataset_dir());
    write_jsonl(splits.train, paths.split("train"));
    write_jsonl(splits.val, paths.split("val"));
    write_jsonl(splits.test, paths.split("test"));
    write_text_file(paths.curation_report(), splits.report.to_json().dump(2) + "\n");
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("curate", e.what());
  }
}

void stage_train_teacher(const RunConfig& cfg) {
  try {
    ArtifactPaths paths(cfg.out_dir);
    auto train = apply_data_fraction(read_jsonl(paths.split("train")), cfg.data_fraction,
                                     cfg.curation.seed);
    auto val = read_jsonl(paths.split("val"));
    TeacherTrainResult result = train_teacher(train, val, cfg.teacher);
    fs::create_directories(paths.teacher_dir());
    save_teacher_checkpoint(paths.teacher_checkpoint(), result.params, cfg.teacher.train.seed);
    write_text_file(paths.teacher_curve(), teacher_curve_csv(result.curve));
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("train-teacher", e.what());
  }
}

void stage_train_student(const RunConfig& cfg) {
  try {
    ArtifactPaths paths(cfg.out_dir);
    std::optional<TeacherParams> teacher;
    if (cfg.distill_enabled || cfg.selection_enabled)
      teacher = load_teacher_checkpoint(paths.teacher_checkpoint());

    std::optional<SelectionLoop> selection;
    if (cfg.selection_enabled) {
      TextTemplate tmpl;
      tmpl.config = cfg.game;
      selection.emplace(cfg.selection, tmpl);
    }
    StudentTrainResult result = train_student(
        cfg.student, teacher ? &*teacher : nullptr, cfg.distill_enabled ? &cfg.distill : nullptr,
        selection ? &*selection : nullptr);

    fs::create_directories(paths.student_dir());
    save_student_checkpoint(paths.student_checkpoint(), *result.net, cfg.student.train.seed);
    write_text_file(paths.student_curve(), student_curve_csv(result.curve));
    if (selection) {
      fs::create_directories(paths.refine_report().parent_path());
      write_text_file(paths.refine_report(), refine_report_jsonl(selection->report()));
      save_teacher_checkpoint(paths.refined_teacher_checkpoint(), *teacher,
                              cfg.selection.seed);
    }
    if (result.diverged)
      throw TrainingError("student training diverged; last good checkpoint saved");
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("train-student", e.what());
  }
}

namespace {

struct NamedAgent {
  std::string name;
  std::unique_ptr<Agent> agent;
};

std::vector<NamedAgent> assemble_agents(const RunConfig& cfg, const ArtifactPaths& paths) {
  std::vector<NamedAgent> agents;
  agents.push_back({"random", std::make_unique<RandomAgent>(cfg.game)});
  agents.push_back({"expert", std::make_unique<ExpertAgent>(cfg.game)});
  if (fs::exists(paths.teacher_checkpoint())) {
    TeacherParams params = load_teacher_checkpoint(paths.teacher_checkpoint());
    agents.push_back(
        {"teacher", std::make_unique<TeacherAgent>(std::move(params), cfg.game, false,
                                                   "teacher")});
  }
  if (fs::exists(paths.refined_teacher_checkpoint())) {
    TeacherParams params = load_teacher_checkpoint(paths.refined_teacher_checkpoint());
    agents.push_back({"teacher_refined",
                      std::make_unique<TeacherAgent>(std::move(params), cfg.game, false,
                                                     "teacher_refined")});
  }
  if (fs::exists(paths.student_checkpoint())) {
    auto net = load_student_checkpoint(paths.student_checkpoint());
    agents.push_back({"student", std::make_unique<StudentAgent>(*net, cfg.game, "student")});
  }
  return agents;
}

}  // namespace

void stage_eval(const RunConfig& cfg) {
  try {
    ArtifactPaths paths(cfg.out_dir);
    fs::create_directories(paths.eval_dir());
    auto agents = assemble_agents(cfg, paths);
    std::optional<std::vector<DatasetRecord>> test;
    if (fs::exists(paths.split("test"))) test = read_jsonl(paths.split("test"));

    std::string summary;
    for (const auto& [name, agent] : agents) {
      EvalReport rep = eval_gameplay(*agent, cfg.game, cfg.eval_n_games, cfg.eval_seed,
                                     cfg.illegal_policy, cfg.threads);
      rep.agent = name;
      if ((name == "teacher" || name == "teacher_refined") && test && !test->empty()) {
        const auto& teacher_agent = dynamic_cast<const TeacherAgent&>(*agent);
        rep.topk_accuracy = eval_topk(teacher_agent.params(), *test);
        rep.legal_overlap = eval_legal_overlap(teacher_agent.params(), *test);
      }
      if (summary.empty()) summary = "agent,n_games,mean_score,stderr,max_score,illegal_attempt_rate\n";
      summary += rep.agent + "," + std::to_string(rep.n_games) + "," +
                 format_real(rep.mean_score) + "," + format_real(rep.stderr_score) + "," +
                 std::to_string(rep.max_score) + "," + format_real(rep.illegal_attempt_rate) +
                 "\n";
      write_text_file(paths.eval_report(name), rep.to_json().dump(2) + "\n");
    }
    write_text_file(paths.eval_summary(), summary);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("eval", e.what());
  }
}

void stage_crossplay(const RunConfig& cfg) {
  try {
    ArtifactPaths paths(cfg.out_dir);
    auto agents = assemble_agents(cfg, paths);
    std::vector<const Agent*> ptrs;
    for (const auto& [name, agent] : agents) ptrs.push_back(agent.get());
    std::vector<int> counts = cfg.crossplay_players;
    if (counts.empty()) counts = {cfg.game.num_players};
    auto cells = crossplay(ptrs, counts, cfg.crossplay_n_games, cfg.crossplay_seed, cfg.game,
                           cfg.illegal_policy, cfg.threads);
    write_text_file(paths.crossplay_csv(), crossplay_csv(cells));
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("crossplay", e.what());
  }
}

const std::string& metrics_schema_text() {
  static const std::string schema = R"({
  "type": "object",
  "required": ["config", "dataset", "agents", "files"],
  "properties": {
    "config": {"type": "object"},
    "dataset": {
      "type": "object",
      "required": ["games_in", "games_kept", "records_per_class", "duplicates_dropped", "split_sizes", "warnings"],
      "properties": {
        "games_in": {"type": "integer"},
        "games_kept": {"type": "integer"},
        "records_per_class": {"type": "object"},
        "duplicates_dropped": {"type": "integer"},
        "split_sizes": {
          "type": "object",
          "required": ["train", "val", "test"],
          "properties": {
            "train": {"type": "integer"},
            "val": {"type": "integer"},
            "test": {"type": "integer"}
          }
        },
        "warnings": {"type": "array", "items": {"type": "string"}}
      }
    },
    "agents": {"type": "object"},
    "files": {
      "type": "object",
      "required": ["curves", "teacher_curve"],
      "properties": {
        "curves": {"type": "string"},
        "teacher_curve": {"type": "string"},
        "crossplay": {"type": "string"},
        "refine_report": {"type": "string"}
      }
    }
  }
})";
  return schema;
}

void validate_against_schema(const json& doc, const json& schema, const std::string& where) {
  if (schema.contains("type")) {
    const std::string type = schema.at("type").get<std::string>();
    bool ok = false;
    if (type == "object") ok = doc.is_object();
    else if (type == "array") ok = doc.is_array();
    else if (type == "string") ok = doc.is_string();
    else if (type == "integer") ok = doc.is_number_integer();
    else if (type == "number") ok = doc.is_number();
    else if (type == "boolean") ok = doc.is_boolean();
    if (!ok)
      throw StageError("emit", "metrics schema violation at " + where + ": expected " + type);
  }
  if (schema.contains("required"))
    for (const auto& key : schema.at("required"))
      if (!doc.contains(key.get<std::string>()))
        throw StageError("emit", "metrics schema violation at " + where + ": missing key '" +
                                     key.get<std::string>() + "'");
  if (schema.contains("properties") && doc.is_object())
    for (const auto& [key, sub] : schema.at("properties").items())
      if (doc.contains(key)) validate_against_schema(doc.at(key), sub, where + "." + key);
  if (schema.contains("items") && doc.is_array())
    for (size_t i = 0; i < doc.size(); ++i)
      validate_against_schema(doc[i], schema.at("items"), where + "[" + std::to_string(i) + "]");
}

void stage_emit(const RunConfig& cfg) {
  try {
    ArtifactPaths paths(cfg.out_dir);
    std::vector<fs::path> required = {paths.config(), paths.curation_report(),
                                      paths.teacher_checkpoint(), paths.teacher_curve(),
                                      paths.student_checkpoint(), paths.student_curve(),
                                      paths.eval_report("random"), paths.eval_report("expert")};
    if (cfg.crossplay_enabled) required.push_back(paths.crossplay_csv());
    std::string missing;
    for (const auto& p : required)
      if (!fs::exists(p)) missing += (missing.empty() ? "" : ", ") + p.string();
    if (!missing.empty()) throw StageError("emit", "missing stage outputs: " + missing);

    json metrics;
    metrics["config"] = read_json_file(paths.config());
    metrics["dataset"] = read_json_file(paths.curation_report());
    json agents = json::object();
    for (const char* name : {"random", "expert", "teacher", "teacher_refined", "student"})
      if (fs::exists(paths.eval_report(name)))
        agents[name] = read_json_file(paths.eval_report(name));
    metrics["agents"] = agents;
    json files = {{"curves", "curves.csv"}, {"teacher_curve", "teacher/curve.csv"}};
    if (fs::exists(paths.crossplay_csv())) files["crossplay"] = "crossplay.csv";
    if (fs::exists(paths.refine_report())) files["refine_report"] = "refine/report.jsonl";
    metrics["files"] = files;

    validate_against_schema(metrics, json::parse(metrics_schema_text()));
    write_text_file(paths.metrics(), metrics.dump(2) + "\n");
    // curves.csv mirrors the student stage output at the artifact root
    write_text_file(paths.curves_csv(), read_text_file(paths.student_curve()));
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("emit", e.what());
  }
}

void run_pipeline(const RunConfig& cfg) {
  ArtifactPaths paths(cfg.out_dir);
  fs::create_directories(paths.root);
  Lockfile lock(paths.lock());
  write_text_file(paths.config(), cfg.to_json().dump(2) + "\n");
  stage_gen_data(cfg);
  stage_curate(cfg);
  stage_train_teacher(cfg);
  stage_train_student(cfg);
  stage_eval(cfg);
  if (cfg.crossplay_enabled) stage_crossplay(cfg);
  stage_emit(cfg);
}

}  // namespace hanalab
