// Experiment orchestration CLI: seeded end-to-end pipelines over the Hanabi
// text environment (dataset generation, curation, teacher training, student
// distillation, in-loop refinement, evaluation, cross-play).

#include <iostream>

#include "CLI11.hpp"

#include "hanalab/json_io.hpp"
#include "hanalab/pipeline.hpp"

namespace {

using nlohmann::json;

// "student.env_steps=5000" -> doc["student"]["env_steps"] = 5000
void apply_override(json& doc, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw hanalab::ConfigError("override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  json* node = &doc;
  size_t start = 0;
  while (true) {
    const size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) throw hanalab::ConfigError("bad override path '" + path + "'");
    if (dot == std::string::npos) {
      json parsed = json::parse(value, nullptr, false);
      (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hanalab: multi-agent Hanabi-text training and evaluation harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;

  const std::vector<std::pair<std::string, std::string>> stages = {
      {"gen-data", "generate expert self-play records"},
      {"curate", "filter, balance, dedup and split the records"},
      {"train-teacher", "train the text-conditioned action classifier"},
      {"train-student", "train the value-learning student (with optional distillation)"},
      {"refine", "train the student with in-loop teacher refinement enabled"},
      {"eval", "evaluate every available agent by self-play"},
      {"crossplay", "pair every agent with every other across player counts"},
      {"pipeline", "run every stage end to end"},
      {"emit", "aggregate stage outputs into metrics.json and curves.csv"},
  };
  for (const auto& [name, desc] : stages) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("-c,--config", config_path, "run config JSON file");
    sub->add_option("-o,--out", out_dir, "artifact directory (overrides config out_dir)");
    sub->add_option("--set", overrides,
                    "override a config key, e.g. --set student.env_steps=5000");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    json doc = json::object();
    if (!config_path.empty()) {
      try {
        doc = hanalab::read_json_file(config_path);
      } catch (const nlohmann::json::exception& e) {
        throw hanalab::ConfigError("cannot parse " + config_path + ": " + e.what());
      }
    }
    for (const auto& assignment : overrides) apply_override(doc, assignment);
    if (!out_dir.empty()) doc["out_dir"] = out_dir;

    hanalab::RunConfig cfg = hanalab::RunConfig::from_json(doc);
    if (command == "gen-data") {
      hanalab::stage_gen_data(cfg);
    } else if (command == "curate") {
      hanalab::stage_curate(cfg);
    } else if (command == "train-teacher") {
      hanalab::stage_train_teacher(cfg);
    } else if (command == "train-student") {
      hanalab::stage_train_student(cfg);
    } else if (command == "refine") {
      cfg.selection_enabled = true;
      hanalab::stage_train_student(cfg);
    } else if (command == "eval") {
      hanalab::stage_eval(cfg);
    } else if (command == "crossplay") {
      hanalab::stage_crossplay(cfg);
    } else if (command == "pipeline") {
      hanalab::run_pipeline(cfg);
    } else if (command == "emit") {
      hanalab::stage_emit(cfg);
    }
  } catch (const hanalab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const hanalab::VersionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const hanalab::StageError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
