#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "specfid/core/error.hpp"

namespace specfid {

enum class QaCategory { L0, L1 };
enum class QaLanguage { En, Zh };

std::string_view to_string(QaCategory c) noexcept;
std::string_view to_string(QaLanguage l) noexcept;

struct QaItem {
    std::string id;
    std::string question;
    std::string ground_truth;
    std::string prediction;
    QaCategory category = QaCategory::L0;
    QaLanguage language = QaLanguage::En;
};

/// JSONL schema: {"id", "question", "ground_truth", "prediction",
/// "category": "L0"|"L1", "language": "en"|"zh"}. Throws InvalidInput.
QaItem qa_item_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const QaItem& item);

enum class JudgeKind { Remote, LocalNumeric };

struct JudgeVerdict {
    bool correct = false;
    JudgeKind kind = JudgeKind::LocalNumeric;
    std::string raw_response; // remote only
    int retries = 0;          // attempts beyond the first
};

void to_json(nlohmann::json& j, const JudgeVerdict& v);

/// The judging template with four worked exemplars; the item fields are
/// substituted into the last user turn in one pass, so braces or tags inside
/// them come out literally.
std::string build_judge_prompt(const QaItem& item);

/// Numbers in free text: signed decimals, optional exponent, comma thousands
/// groups. Digits glued to a preceding letter (formula subscripts like MnO2)
/// and unit exponents (cm-1, s^-1) are not numbers.
std::vector<double> extract_numbers(std::string_view text);

/// Offline judge for single-number answers: relative tolerance 5% of the
/// truth, exact match when the truth is zero. nullopt unless both strings
/// hold exactly one number.
std::optional<JudgeVerdict> judge_local_numeric(const QaItem& item, double tolerance = 0.05);

/// "True"/"False" after trimming, case-insensitive; anything else is nullopt.
std::optional<bool> parse_verdict(std::string_view content);

struct EndpointConfig {
    std::string base_url = "https://api.openai.com";
    std::string path = "/v1/chat/completions";
    std::string model = "o4-mini";
    std::string api_key_env = "JUDGE_API_KEY";
    int max_attempts = 3;
    std::chrono::milliseconds backoff{500}; // doubled after each failed attempt
    std::chrono::seconds timeout{60};
    unsigned concurrency = 4;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// POSTs a JSON body and returns the response; throws std::runtime_error on
/// transport failure.
using Transport = std::function<HttpResponse(const std::string& request_body)>;

/// httplib client for the configured endpoint; reads the key from the
/// environment when called.
Transport make_http_transport(const EndpointConfig& cfg);

/// Chat-completions request body for one prompt (temperature 0).
std::string judge_request_body(const EndpointConfig& cfg, const std::string& prompt);

/// Sends the prompt, retrying transport errors, non-200 replies and
/// non-verdict content with exponential backoff. After max_attempts throws
/// MalformedVerdict if the last reply had content, JudgeUnavailable otherwise.
JudgeVerdict judge_remote(const QaItem& item, const EndpointConfig& cfg, const Transport& transport);

enum class JudgeMode { Local, Remote, Auto };

struct JudgeOutcome {
    std::optional<JudgeVerdict> verdict;
    std::string error; // set when no verdict could be obtained
};

/// Judges every item. Local mode leaves non-numeric items unjudged, Auto
/// falls through to the remote judge for them. At most cfg.concurrency
/// remote requests are in flight; results keep input order.
std::vector<JudgeOutcome> judge_all(const std::vector<QaItem>& items, JudgeMode mode, const EndpointConfig& cfg,
                                    const Transport& transport = {});

enum class OverallMode { CellMean, Pooled };

struct AccuracyCell {
    std::size_t correct = 0;
    std::size_t total = 0;
    std::optional<double> accuracy() const
    {
        return total ? std::optional<double>(double(correct) / double(total)) : std::nullopt;
    }
};

/// Cells in table column order: en-L0, en-L1, zh-L0, zh-L1.
struct AccuracyReport {
    std::string model;
    AccuracyCell cells[4];
    std::optional<double> overall;
    OverallMode mode = OverallMode::CellMean;
    std::size_t unjudged = 0;

    static int cell_index(QaLanguage l, QaCategory c) { return (l == QaLanguage::Zh ? 2 : 0) + (c == QaCategory::L1 ? 1 : 0); }
};

/// Unjudged outcomes are counted separately and left out of every cell.
AccuracyReport accuracy_report(const std::vector<std::pair<QaItem, std::optional<JudgeVerdict>>>& verdicts,
                               OverallMode mode = OverallMode::CellMean, std::string model = {});

/// Header plus one row per report, accuracies to 4 decimals, "-" for absent cells.
std::string accuracy_markdown(const std::vector<AccuracyReport>& reports);
std::string accuracy_csv(const std::vector<AccuracyReport>& reports);

} // namespace specfid
