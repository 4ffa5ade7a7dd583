#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hanalab/dataset.hpp"
#include "hanalab/evaluate.hpp"
#include "hanalab/selection.hpp"
#include "hanalab/student.hpp"
#include "hanalab/teacher.hpp"

namespace hanalab {

// One self-describing JSON document drives a whole run; it is persisted
// next to the outputs (with out_dir normalized to ".") so reruns are
// byte-reproducible. Unknown keys are rejected.
struct RunConfig {
  std::filesystem::path out_dir = ".";
  int threads = 0;

  GameConfig game;
  long data_n_games = 1000;
  uint64_t data_seed = 1;

  CurationConfig curation;
  double data_fraction = 1.0;  // of the curated train split, applied at training time

  TeacherTrainOptions teacher;

  StudentConfig student;
  bool distill_enabled = true;
  DistillConfig distill;
  bool selection_enabled = false;
  SelectionConfig selection;

  long eval_n_games = 1200;
  uint64_t eval_seed = 97;
  IllegalPolicy illegal_policy = IllegalPolicy::MaskRenormalize;

  bool crossplay_enabled = true;
  std::vector<int> crossplay_players;  // empty = [game.num_players]
  long crossplay_n_games = 100;
  uint64_t crossplay_seed = 101;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::filesystem::path& path);
  nlohmann::json to_json() const;  // canonical effective document

  void validate() const;
};

// Artifact paths, relative to out_dir.
struct ArtifactPaths {
  std::filesystem::path root;
  explicit ArtifactPaths(const std::filesystem::path& out) : root(out) {}

  std::filesystem::path config() const { return root / "config.json"; }
  std::filesystem::path records() const { return root / "records.jsonl"; }
  std::filesystem::path dataset_dir() const { return root / "dataset"; }
  std::filesystem::path split(const std::string& name) const {
    return dataset_dir() / (name + ".jsonl");
  }
  std::filesystem::path curation_report() const { return dataset_dir() / "curation_report.json"; }
  std::filesystem::path teacher_dir() const { return root / "teacher"; }
  std::filesystem::path teacher_checkpoint() const { return teacher_dir() / "checkpoint.json"; }
  std::filesystem::path teacher_curve() const { return teacher_dir() / "curve.csv"; }
  std::filesystem::path refined_teacher_checkpoint() const {
    return teacher_dir() / "refined_checkpoint.json";
  }
  std::filesystem::path student_dir() const { return root / "student"; }
  std::filesystem::path student_checkpoint() const { return student_dir() / "checkpoint.json"; }
  std::filesystem::path student_curve() const { return student_dir() / "curve.csv"; }
  std::filesystem::path refine_report() const { return root / "refine" / "report.jsonl"; }
  std::filesystem::path eval_dir() const { return root / "eval"; }
  std::filesystem::path eval_report(const std::string& agent) const {
    return eval_dir() / (agent + ".json");
  }
  std::filesystem::path eval_summary() const { return eval_dir() / "summary.csv"; }
  std::filesystem::path crossplay_csv() const { return root / "crossplay.csv"; }
  std::filesystem::path curves_csv() const { return root / "curves.csv"; }
  std::filesystem::path metrics() const { return root / "metrics.json"; }
  std::filesystem::path lock() const { return root / ".lock"; }
};

// Individual stages; each reads its inputs from and writes its outputs under
// cfg.out_dir. Failures surface as StageError with the stage name.
void stage_gen_data(const RunConfig& cfg);
void stage_curate(const RunConfig& cfg);
void stage_train_teacher(const RunConfig& cfg);
void stage_train_student(const RunConfig& cfg);
void stage_eval(const RunConfig& cfg);
void stage_crossplay(const RunConfig& cfg);
void stage_emit(const RunConfig& cfg);

// gen-data -> curate -> train-teacher -> train-student (with optional
// distillation and in-loop refinement) -> eval -> crossplay -> emit, under a
// lockfile; reruns with the same config are byte-identical.
void run_pipeline(const RunConfig& cfg);

// Structural JSON-schema check (subset: type/properties/required/items).
void validate_against_schema(const nlohmann::json& doc, const nlohmann::json& schema,
                             const std::string& where = "$");

// The shipped metrics.json schema (docs/metrics.schema.json carries the
// same content).
const std::string& metrics_schema_text();

}  // namespace hanalab
