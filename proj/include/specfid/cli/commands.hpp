#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "specfid/core/spectrum_type.hpp"
#include "specfid/judge/judge.hpp"
#include "specfid/metrics/fidelity.hpp"
#include "specfid/reconstruct/pipeline.hpp"

namespace specfid::cli {

namespace fs = std::filesystem;

/// Process exit codes. Stable: scripts depend on them.
enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,    // invalid flags or config values
    kInputError = 3,     // unreadable or malformed input
    kPartialFailure = 4, // some items failed, the rest were written
    kNothingToDo = 5,    // no inputs found
};

/// Maps a library error to the exit code of the failing run.
int exit_code_for(ErrorCode code) noexcept;

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr double kDefaultBudgetFraction = 0.067;
inline constexpr std::uint64_t kDefaultSuiteSeed = 20251016;

std::string sha256_hex(std::string_view data);

struct RunManifest {
    std::string command_line;
    nlohmann::json config;
    std::uint64_t master_seed = 0;
    std::string tool_version = kToolVersion;
    std::map<std::string, std::string> input_digests;  // path -> sha256
    std::map<std::string, std::string> output_digests; // path relative to the output dir -> sha256
    double wall_time_s = 0;
};

void to_json(nlohmann::json& j, const RunManifest& m);

/// Collects output files and their digests as they are written.
class OutputDir {
public:
    explicit OutputDir(fs::path root) : root_(std::move(root)) {}
    void write(const std::string& relative, const std::string& text);
    const fs::path& root() const { return root_; }
    const std::map<std::string, std::string>& digests() const { return digests_; }
    /// Writes manifest.json (not itself digested).
    void write_manifest(RunManifest m) const;

private:
    fs::path root_;
    std::map<std::string, std::string> digests_;
};

/// Curve files under a path: the file itself, or the sorted *.json/*.csv
/// files of a directory (run bookkeeping files excluded).
std::vector<fs::path> list_curve_inputs(const fs::path& input);

/// Pipeline settings for a curve of the given type (stick types skip
/// smoothing and use the stick interpolant).
PipelineConfig pipeline_config_for(std::optional<SpectrumType> type, const SamplingConfig& sampling,
                                   const SgConfig& sg = {});

struct CommonOptions {
    std::string command_line;
    nlohmann::json config; // merged settings snapshot for the manifest
    unsigned workers = 0;  // 0: hardware concurrency
};

unsigned resolve_workers(unsigned requested);

// ---- pipeline ----------------------------------------------------------

struct PipelineOptions {
    CommonOptions common;
    fs::path input;
    fs::path out;
    SgConfig sg;
    SamplingConfig sampling; // budget 6.7% of N unless set otherwise
    bool smooth = true;
    std::optional<SpectrumType> type; // overrides the type recorded in the files
    std::optional<Interpolant> interpolant;
    ScoreOptions score;
    std::uint64_t seed = 0; // recorded in the manifest
};

/// smooth -> sample -> reconstruct -> score for every curve. Writes
/// NAME.sampled.json, NAME.reconstructed.json, NAME.report.json per input,
/// summary.json and manifest.json.
int cmd_pipeline(const PipelineOptions& opts, std::ostream& log);

// ---- ablation ----------------------------------------------------------

struct AblationRow {
    std::string label;
    double cd = 0, hd = 0, wd = 0;
    std::size_t count = 0;
};

struct AblationResult {
    std::vector<AblationRow> rows;
    double mean_reduction_ratio = 0;
    double answer_length_ratio = 0; // sampled-arm answer bytes / full-arm answer bytes
    std::size_t failures = 0;
};

struct AblationOptions {
    CommonOptions common;
    std::optional<fs::path> dataset; // generated suite when unset
    std::uint64_t seed = kDefaultSuiteSeed;
    std::size_t per_type = 100;
    double budget_fraction = kDefaultBudgetFraction;
    std::vector<MetricKind> metrics{MetricKind::Chamfer, MetricKind::Hausdorff, MetricKind::Wasserstein};
    std::optional<fs::path> out; // writes ablation.md, ablation.json, manifest.json
};

/// Row 1: reconstruction from the sampled points vs. the full curve.
/// Row 2: the same after the sampled points pass through the two-decimal
/// answer text and back.
AblationResult run_ablation(const AblationOptions& opts);
std::string ablation_markdown(const AblationResult& r, const std::vector<MetricKind>& metrics);
int cmd_ablation(const AblationOptions& opts, std::ostream& out, std::ostream& log);

// ---- model outputs -----------------------------------------------------

struct ModelScoreOptions {
    CommonOptions common;
    fs::path pred_dir;  // pred_dir/MODEL/NAME.txt
    fs::path truth_dir; // truth_dir/NAME.json
    std::optional<fs::path> pairs_csv; // model,pred,truth rows replacing the directory convention
    ScoreOptions score;
    std::optional<fs::path> out;
};

struct ModelScoreRow {
    std::string model;
    double cd = 0, hd = 0, wd = 0;
    std::size_t items = 0;
    std::size_t zero_scored = 0; // unparseable or empty predictions
};

struct ModelScoreResult {
    std::vector<ModelScoreRow> rows;
    nlohmann::json details; // per item
};

/// Errors per prediction never abort: they score 0 and carry diagnostics.
/// A missing truth file is an input error for that item.
ModelScoreResult score_model_outputs(const ModelScoreOptions& opts);
int cmd_score_model_outputs(const ModelScoreOptions& opts, std::ostream& out, std::ostream& log);

// ---- gen ---------------------------------------------------------------

struct GenOptions {
    CommonOptions common;
    std::optional<SpectrumType> type; // all seven when unset
    std::size_t count = 70;
    double qc_fraction = 0.1;
    std::uint64_t seed = 2024;
    int max_lines = 1;
    fs::path out;
};

/// DIR/{index}.json, DIR/{index}.svg, DIR/train.jsonl, DIR/qc.json, manifest.
int cmd_gen(const GenOptions& opts, std::ostream& log);

// ---- QA ----------------------------------------------------------------

struct EvalQaOptions {
    CommonOptions common;
    fs::path items;
    JudgeMode mode = JudgeMode::Auto;
    OverallMode overall = OverallMode::CellMean;
    EndpointConfig endpoint;
    std::string model = "model";
    fs::path report_dir;
    Transport transport; // injected in tests
};

std::vector<QaItem> load_qa_items(const fs::path& jsonl);

/// Writes verdicts.jsonl, accuracy.md, accuracy.csv, accuracy.json and the manifest.
int cmd_eval_qa(const EvalQaOptions& opts, std::ostream& out, std::ostream& log);

struct ReportOptions {
    CommonOptions common;
    std::vector<fs::path> runs; // eval-qa report directories
    OverallMode overall = OverallMode::CellMean;
    fs::path out;
};

/// One table row per eval-qa run, recomputed from its verdicts.jsonl.
int cmd_report(const ReportOptions& opts, std::ostream& out, std::ostream& log);

} // namespace specfid::cli
