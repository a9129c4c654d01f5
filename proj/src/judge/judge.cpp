#include "specfid/judge/judge.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "specfid/core/error.hpp"

namespace specfid {
namespace {

constexpr std::string_view kTemplate = R"TMPL(Given multiple question-answer pairs and the corresponding predictions, evaluate the correctness of predictions. The output should be only 'True' or 'False'. Note that if the groundtruth answer is a numeric value with/without the unit, impose 5 percentage error tolerance to the answer, e.g., the answer of 95 is marked as correct when groundtruth value is 100 million.

User: <question> What was the incremental increase in revenue from 2020 to 2021? <groundtruth answer> 5 million $ <answer> 20 </s>
A: False

User: <question> What percentage of government spending was allocated to infrastructure in 2020? <groundtruth answer> 10 percentage <answer> 14-4=10 </s>
A: True

User: <question> What is the total production of Wind Energy in the four months from January to April 2021? <groundtruth answer> 2300 MW <answer> The total production of Wind Energy in the four months from January to April 2021 is 2450 MW.
A: True

User: <question> What is the total of manufactured goods for UK and Germany combined? <groundtruth answer> 5 <answer> Five
A: True

User: <question> {QUESTION} <groundtruth answer> {GROUND TRUTH} <answer> {PREDICTION} </s>
AI: )TMPL";

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

std::string format_acc(const std::optional<double>& v)
{
    if (!v)
        return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return buf;
}

} // namespace

std::string_view to_string(QaCategory c) noexcept { return c == QaCategory::L0 ? "L0" : "L1"; }
std::string_view to_string(QaLanguage l) noexcept { return l == QaLanguage::En ? "en" : "zh"; }

QaItem qa_item_from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        throw Error(ErrorCode::InvalidInput, "QA item must be a JSON object");
    auto text = [&](const char* key, bool required) {
        if (!j.contains(key)) {
            if (required)
                throw Error(ErrorCode::InvalidInput, std::string("QA item lacks \"") + key + "\"");
            return std::string{};
        }
        const auto& v = j.at(key);
        if (v.is_string())
            return v.get<std::string>();
        if (v.is_number())
            return v.dump();
        throw Error(ErrorCode::InvalidInput, std::string("QA field \"") + key + "\" is not text");
    };
    QaItem item;
    item.id = text("id", false);
    item.question = text("question", false);
    item.ground_truth = text("ground_truth", true);
    item.prediction = text("prediction", false);
    if (trim(item.ground_truth).empty())
        throw Error(ErrorCode::InvalidInput, "QA item '" + item.id + "' has an empty ground truth");
    const std::string cat = lower(text("category", true));
    if (cat == "l0")
        item.category = QaCategory::L0;
    else if (cat == "l1")
        item.category = QaCategory::L1;
    else
        throw Error(ErrorCode::InvalidInput, "unknown category '" + cat + "'");
    const std::string lang = lower(text("language", true));
    if (lang == "en")
        item.language = QaLanguage::En;
    else if (lang == "zh")
        item.language = QaLanguage::Zh;
    else
        throw Error(ErrorCode::InvalidInput, "unknown language '" + lang + "'");
    return item;
}

void to_json(nlohmann::json& j, const QaItem& item)
{
    j = nlohmann::json{{"id", item.id},
                       {"question", item.question},
                       {"ground_truth", item.ground_truth},
                       {"prediction", item.prediction},
                       {"category", std::string(to_string(item.category))},
                       {"language", std::string(to_string(item.language))}};
}

void to_json(nlohmann::json& j, const JudgeVerdict& v)
{
    j = nlohmann::json{{"correct", v.correct},
                       {"judge_kind", v.kind == JudgeKind::Remote ? "remote" : "local_numeric"},
                       {"retries", v.retries}};
    if (v.kind == JudgeKind::Remote)
        j["raw_response"] = v.raw_response;
}

std::string build_judge_prompt(const QaItem& item)
{
    static constexpr std::pair<std::string_view, int> kSlots[] = {
        {"{QUESTION}", 0}, {"{GROUND TRUTH}", 1}, {"{PREDICTION}", 2}};
    const std::string* fields[] = {&item.question, &item.ground_truth, &item.prediction};
    std::string out;
    out.reserve(kTemplate.size() + item.question.size() + item.ground_truth.size() + item.prediction.size());
    std::size_t pos = 0;
    while (pos < kTemplate.size()) {
        bool hit = false;
        for (const auto& [slot, idx] : kSlots) {
            if (kTemplate.compare(pos, slot.size(), slot) == 0) {
                out += *fields[idx];
                pos += slot.size();
                hit = true;
                break;
            }
        }
        if (!hit)
            out.push_back(kTemplate[pos++]);
    }
    return out;
}

std::vector<double> extract_numbers(std::string_view s)
{
    std::vector<double> out;
    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        const bool starts_digit = is_digit(s[i]) || (s[i] == '.' && i + 1 < n && is_digit(s[i + 1]));
        if (!starts_digit) {
            ++i;
            continue;
        }
        std::size_t begin = i;
        // a sign only counts when it is not a binary operator between numbers
        bool negative = false;
        if (begin > 0 && s[begin - 1] == '-' && (begin < 2 || !(is_digit(s[begin - 2]) || is_alpha(s[begin - 2]))))
            negative = true;
        // unit exponents (cm-1, s^-1, m^2) belong to the unit
        const char prev = begin > 0 ? s[begin - 1] : ' ';
        const char prev2 = begin > 1 ? s[begin - 2] : ' ';
        const bool glued = is_alpha(prev) || prev == '_' || prev == '^' ||
                           (prev == '-' && (is_alpha(prev2) || prev2 == '^'));

        std::string digits;
        std::size_t j = i;
        while (j < n && is_digit(s[j]))
            digits.push_back(s[j++]);
        // 1,234,567 style groups, only after a 1-3 digit lead
        if (!digits.empty() && digits.size() <= 3) {
            while (j + 3 < n + 0 && s[j] == ',' && is_digit(s[j + 1]) && is_digit(s[j + 2]) && is_digit(s[j + 3])
                   && (j + 4 >= n || !is_digit(s[j + 4]))) {
                digits.append(s.substr(j + 1, 3));
                j += 4;
            }
        }
        if (j < n && s[j] == '.' && j + 1 < n && is_digit(s[j + 1])) {
            digits.push_back('.');
            ++j;
            while (j < n && is_digit(s[j]))
                digits.push_back(s[j++]);
        }
        if (j + 1 < n && (s[j] == 'e' || s[j] == 'E')) {
            std::size_t k = j + 1;
            if (k < n && (s[k] == '+' || s[k] == '-'))
                ++k;
            if (k < n && is_digit(s[k])) {
                digits.append(s.substr(j, k - j));
                while (k < n && is_digit(s[k]))
                    digits.push_back(s[k++]);
                j = k;
            }
        }
        i = j;
        if (glued)
            continue;
        double v = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
        if (ec != std::errc{} || !std::isfinite(v))
            continue;
        out.push_back(negative ? -v : v);
    }
    return out;
}

std::optional<JudgeVerdict> judge_local_numeric(const QaItem& item, double tolerance)
{
    const auto truth = extract_numbers(item.ground_truth);
    const auto pred = extract_numbers(item.prediction);
    if (truth.size() != 1 || pred.size() != 1)
        return std::nullopt;
    const double t = truth[0], p = pred[0];
    JudgeVerdict v;
    v.kind = JudgeKind::LocalNumeric;
    if (t == 0.0)
        v.correct = p == 0.0;
    else
        // 1e-12 slack absorbs the representation error of the tolerance product
        v.correct = std::abs(p - t) <= tolerance * std::abs(t) * (1.0 + 1e-12);
    return v;
}

std::optional<bool> parse_verdict(std::string_view content)
{
    const std::string s = lower(trim(content));
    if (s == "true")
        return true;
    if (s == "false")
        return false;
    return std::nullopt;
}

std::string judge_request_body(const EndpointConfig& cfg, const std::string& prompt)
{
    nlohmann::json body{{"model", cfg.model},
                        {"temperature", 0},
                        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};
    return body.dump();
}

Transport make_http_transport(const EndpointConfig& cfg)
{
    return [cfg](const std::string& body) -> HttpResponse {
        const char* key = std::getenv(cfg.api_key_env.c_str());
        if (!key || !*key)
            throw Error(ErrorCode::JudgeUnavailable, "environment variable " + cfg.api_key_env + " is not set");
        httplib::Client client(cfg.base_url);
        client.set_connection_timeout(cfg.timeout);
        client.set_read_timeout(cfg.timeout);
        httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};
        auto res = client.Post(cfg.path, headers, body, "application/json");
        if (!res)
            throw std::runtime_error("transport error: " + httplib::to_string(res.error()));
        return {res->status, res->body};
    };
}

JudgeVerdict judge_remote(const QaItem& item, const EndpointConfig& cfg, const Transport& transport)
{
    if (!transport)
        throw Error(ErrorCode::JudgeUnavailable, "no transport configured");
    const std::string body = judge_request_body(cfg, build_judge_prompt(item));
    const int attempts = std::max(1, cfg.max_attempts);
    std::optional<std::string> last_content;
    std::string last_error;
    auto delay = cfg.backoff;
    for (int a = 0; a < attempts; ++a) {
        if (a > 0) {
            if (delay.count() > 0)
                std::this_thread::sleep_for(delay);
            delay *= 2;
        }
        HttpResponse res;
        try {
            res = transport(body);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::JudgeUnavailable)
                throw;
            last_error = e.what();
            last_content.reset();
            continue;
        } catch (const std::exception& e) {
            last_error = e.what();
            last_content.reset();
            continue;
        }
        if (res.status != 200) {
            last_error = "HTTP " + std::to_string(res.status);
            last_content.reset();
            continue;
        }
        std::string content;
        try {
            const auto j = nlohmann::json::parse(res.body);
            content = j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const std::exception&) {
            last_error = "unreadable completion body";
            last_content.reset();
            continue;
        }
        last_content = content;
        if (auto verdict = parse_verdict(content)) {
            JudgeVerdict v;
            v.correct = *verdict;
            v.kind = JudgeKind::Remote;
            v.raw_response = content;
            v.retries = a;
            return v;
        }
    }
    if (last_content)
        throw Error(ErrorCode::MalformedVerdict, "judge replied '" + *last_content + "' after " + std::to_string(attempts)
                                                     + " attempts");
    throw Error(ErrorCode::JudgeUnavailable, last_error + " after " + std::to_string(attempts) + " attempts");
}

std::vector<JudgeOutcome> judge_all(const std::vector<QaItem>& items, JudgeMode mode, const EndpointConfig& cfg,
                                    const Transport& transport)
{
    std::vector<JudgeOutcome> out(items.size());
    std::vector<std::size_t> remote;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (mode != JudgeMode::Remote) {
            if (auto v = judge_local_numeric(items[i])) {
                out[i].verdict = v;
                continue;
            }
        }
        if (mode == JudgeMode::Local)
            out[i].error = "NotApplicable: not a single-number answer";
        else
            remote.push_back(i);
    }
    if (remote.empty())
        return out;
    const Transport t = transport ? transport : make_http_transport(cfg);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < remote.size();) {
            const std::size_t i = remote[k];
            try {
                out[i].verdict = judge_remote(items[i], cfg, t);
            } catch (const std::exception& e) {
                out[i].error = e.what();
            }
        }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(cfg.concurrency, 1, remote.size());
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < n_threads; ++w)
        pool.emplace_back(worker);
    worker();
    for (auto& th : pool)
        th.join();
    return out;
}

AccuracyReport accuracy_report(const std::vector<std::pair<QaItem, std::optional<JudgeVerdict>>>& verdicts,
                               OverallMode mode, std::string model)
{
    AccuracyReport r;
    r.model = std::move(model);
    r.mode = mode;
    for (const auto& [item, v] : verdicts) {
        if (!v) {
            ++r.unjudged;
            continue;
        }
        auto& cell = r.cells[AccuracyReport::cell_index(item.language, item.category)];
        ++cell.total;
        if (v->correct)
            ++cell.correct;
    }
    if (mode == OverallMode::Pooled) {
        std::size_t c = 0, t = 0;
        for (const auto& cell : r.cells) {
            c += cell.correct;
            t += cell.total;
        }
        if (t)
            r.overall = double(c) / double(t);
    } else {
        double sum = 0;
        int present = 0;
        for (const auto& cell : r.cells)
            if (auto a = cell.accuracy()) {
                sum += *a;
                ++present;
            }
        if (present)
            r.overall = sum / present;
    }
    return r;
}

std::string accuracy_markdown(const std::vector<AccuracyReport>& reports)
{
    std::ostringstream md;
    md << "| Model | en L0 | en L1 | zh L0 | zh L1 | Overall |\n";
    md << "|---|---|---|---|---|---|\n";
    for (const auto& r : reports) {
        md << "| " << r.model;
        for (const auto& cell : r.cells)
            md << " | " << format_acc(cell.accuracy());
        md << " | " << format_acc(r.overall) << " |\n";
    }
    return md.str();
}

std::string accuracy_csv(const std::vector<AccuracyReport>& reports)
{
    std::ostringstream csv;
    csv << "model,en_L0,en_L1,zh_L0,zh_L1,overall\n";
    for (const auto& r : reports) {
        std::string name = r.model;
        if (name.find_first_of(",\"") != std::string::npos) {
            std::string q = "\"";
            for (char c : name)
                q += c == '"' ? std::string("\"\"") : std::string(1, c);
            name = q + "\"";
        }
        csv << name;
        for (const auto& cell : r.cells) {
            const auto a = cell.accuracy();
            csv << ',' << (a ? format_acc(a) : std::string{});
        }
        csv << ',' << (r.overall ? format_acc(r.overall) : std::string{}) << '\n';
    }
    return csv.str();
}

} // namespace specfid
