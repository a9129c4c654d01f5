#include "specfid/cli/commands.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "specfid/core/curve_io.hpp"
#include "specfid/reconstruct/render_svg.hpp"
#include "specfid/syngen/syngen.hpp"
#include "specfid/wirefmt/wirefmt.hpp"

namespace specfid::cli {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn)
{
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const unsigned n = std::min<unsigned>(workers, static_cast<unsigned>(count));
    for (unsigned w = 0; w < n; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++)
                fn(i);
        });
    for (auto& t : pool)
        t.join();
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fixed4(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string column_name(MetricKind k)
{
    switch (k) {
    case MetricKind::Chamfer: return "Score-Chamfer Distance";
    case MetricKind::Hausdorff: return "Score-Hausdorff Distance";
    case MetricKind::Wasserstein: return "Score-Wasserstein Distance";
    }
    return "?";
}

std::string score_table(const std::vector<std::pair<std::string, std::array<double, 3>>>& rows,
                        const std::vector<MetricKind>& metrics)
{
    std::ostringstream md;
    md << "| Model |";
    for (auto k : metrics)
        md << ' ' << column_name(k) << " |";
    md << "\n|---|";
    for (std::size_t i = 0; i < metrics.size(); ++i)
        md << "---|";
    md << '\n';
    for (const auto& [label, s] : rows) {
        md << "| " << label << " |";
        for (auto k : metrics)
            md << ' ' << fixed4(s[static_cast<std::size_t>(k)]) << " |";
        md << '\n';
    }
    return md.str();
}

json curves_json(const std::vector<SpectralCurve>& curves)
{
    json arr = json::array();
    for (const auto& c : curves)
        arr.push_back(c);
    return arr;
}

std::string pretty(const json& j) { return j.dump(2) + "\n"; }

bool is_bookkeeping(const fs::path& p)
{
    const std::string name = p.filename().string();
    return name == "manifest.json" || name == "summary.json" || name == "qc.json" || name == "ablation.json"
           || name == "accuracy.json" || name.find(".report.json") != std::string::npos
           || name.find(".sampled.json") != std::string::npos || name.find(".reconstructed.json") != std::string::npos;
}

RunManifest make_manifest(const CommonOptions& common, std::uint64_t seed, Clock::time_point t0)
{
    RunManifest m;
    m.command_line = common.command_line;
    m.config = common.config;
    m.master_seed = seed;
    m.wall_time_s = seconds_since(t0);
    return m;
}

void digest_inputs(RunManifest& m, const std::vector<fs::path>& files)
{
    for (const auto& f : files) {
        try {
            m.input_digests[f.string()] = sha256_hex(read_text_file(f));
        } catch (const Error&) {
            m.input_digests[f.string()] = "unreadable";
        }
    }
}

} // namespace

int exit_code_for(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidSpec: return kConfigError;
    case ErrorCode::ExhaustedRetries:
    case ErrorCode::JudgeUnavailable:
    case ErrorCode::MalformedVerdict: return kPartialFailure;
    default: return kInputError;
    }
}

std::string sha256_hex(std::string_view data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

void to_json(nlohmann::json& j, const RunManifest& m)
{
    j = json{{"command_line", m.command_line},   {"config", m.config},
             {"master_seed", m.master_seed},     {"tool_version", m.tool_version},
             {"input_digests", m.input_digests}, {"output_digests", m.output_digests},
             {"wall_time_s", m.wall_time_s}};
}

void OutputDir::write(const std::string& relative, const std::string& text)
{
    write_text_file(root_ / relative, text);
    digests_[relative] = sha256_hex(text);
}

void OutputDir::write_manifest(RunManifest m) const
{
    m.output_digests = digests_;
    write_text_file(root_ / "manifest.json", pretty(json(m)));
}

std::vector<fs::path> list_curve_inputs(const fs::path& input)
{
    if (!fs::exists(input))
        throw Error(ErrorCode::InvalidInput, input.string() + " does not exist");
    if (!fs::is_directory(input))
        return {input};
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(input)) {
        if (!e.is_regular_file())
            continue;
        std::string ext = e.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if ((ext == ".json" || ext == ".csv") && !is_bookkeeping(e.path()))
            out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

PipelineConfig pipeline_config_for(std::optional<SpectrumType> type, const SamplingConfig& sampling, const SgConfig& sg)
{
    PipelineConfig cfg;
    cfg.sg = sg;
    cfg.sampling = sampling;
    cfg.stick = type && is_stick_type(*type);
    cfg.smooth = !cfg.stick;
    return cfg;
}

unsigned resolve_workers(unsigned requested)
{
    if (requested)
        return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

// ---- pipeline ----------------------------------------------------------

namespace {

struct FileOutcome {
    std::string stem;
    std::string sampled, reconstructed, report; // serialized outputs
    std::vector<FidelityReport> reports;
    std::string error;
    int error_code = kOk;
};

FileOutcome pipeline_file(const fs::path& path, const PipelineOptions& opts)
{
    FileOutcome o;
    o.stem = path.stem().string();
    try {
        CurveFile file = load_curve_file(path);
        if (file.curves.empty())
            throw Error(ErrorCode::EmptyCurve, "no curves in file");
        const auto type = opts.type ? opts.type : file.type;
        PipelineConfig cfg = pipeline_config_for(type, opts.sampling, opts.sg);
        cfg.smooth = cfg.smooth && opts.smooth;
        cfg.interpolant = opts.interpolant;
        std::vector<SpectralCurve> sampled, rec;
        json per_curve = json::array();
        for (const auto& c : file.curves) {
            PipelineResult r = run_pipeline(c, cfg);
            FidelityReport rep = fidelity_report(r.original, r.reconstructed, opts.score);
            rep.reduction_ratio = r.sample.merged.reduction_ratio;
            std::vector<std::string> warnings = r.warnings;
            warnings.insert(warnings.end(), r.sample.warnings.begin(), r.sample.warnings.end());
            per_curve.push_back({{"name", c.name},
                                 {"n_in", r.original.size()},
                                 {"n_out", r.sample.merged.sampled.size()},
                                 {"epsilon_used", r.sample.epsilon_used},
                                 {"report", rep},
                                 {"warnings", warnings}});
            sampled.push_back(r.sample.merged.sampled);
            rec.push_back(std::move(r.reconstructed));
            o.reports.push_back(rep);
        }
        json report{{"file", path.filename().string()}, {"curves", std::move(per_curve)}};
        if (type)
            report["type"] = std::string(to_string(*type));
        o.sampled = pretty(curves_json(sampled));
        o.reconstructed = pretty(curves_json(rec));
        o.report = pretty(report);
    } catch (const Error& e) {
        o.error = e.what();
        o.error_code = exit_code_for(e.code());
        o.reports.clear();
    } catch (const std::exception& e) {
        o.error = e.what();
        o.error_code = kInputError;
        o.reports.clear();
    }
    return o;
}

} // namespace

int cmd_pipeline(const PipelineOptions& opts, std::ostream& log)
{
    const auto t0 = Clock::now();
    try {
        opts.sampling.validate();
        validate(opts.sg);
    } catch (const Error& e) {
        log << e.what() << '\n';
        return kConfigError;
    }
    std::vector<fs::path> inputs;
    try {
        inputs = list_curve_inputs(opts.input);
    } catch (const Error& e) {
        log << e.what() << '\n';
        return kInputError;
    }

    std::vector<FileOutcome> outcomes(inputs.size());
    parallel_for(inputs.size(), resolve_workers(opts.common.workers),
                 [&](std::size_t i) { outcomes[i] = pipeline_file(inputs[i], opts); });

    OutputDir out(opts.out);
    json failed = json::array();
    std::size_t curves = 0;
    double sum[3] = {0, 0, 0}, mn[3], sum_r = 0;
    std::fill(mn, mn + 3, std::numeric_limits<double>::infinity());
    int worst = kOk;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        if (!o.error.empty()) {
            failed.push_back({{"file", inputs[i].filename().string()}, {"error", o.error}});
            log << inputs[i].string() << ": " << o.error << '\n';
            worst = kPartialFailure;
            continue;
        }
        out.write(o.stem + ".sampled.json", o.sampled);
        out.write(o.stem + ".reconstructed.json", o.reconstructed);
        out.write(o.stem + ".report.json", o.report);
        for (const auto& r : o.reports) {
            const double s[3] = {r.score_cd, r.score_hd, r.score_wd};
            for (int k = 0; k < 3; ++k) {
                sum[k] += s[k];
                mn[k] = std::min(mn[k], s[k]);
            }
            sum_r += r.reduction_ratio.value_or(0.0);
            ++curves;
        }
    }
    json summary{{"files", inputs.size()}, {"curves", curves}, {"failed", failed}};
    if (curves) {
        const double n = double(curves);
        summary["mean"] = {{"score_cd", sum[0] / n}, {"score_hd", sum[1] / n}, {"score_wd", sum[2] / n}};
        summary["min"] = {{"score_cd", mn[0]}, {"score_hd", mn[1]}, {"score_wd", mn[2]}};
        summary["mean_reduction_ratio"] = sum_r / n;
    }
    out.write("summary.json", pretty(summary));
    RunManifest m = make_manifest(opts.common, opts.seed, t0);
    digest_inputs(m, inputs);
    out.write_manifest(std::move(m));

    if (inputs.empty()) {
        log << "no curve files under " << opts.input.string() << '\n';
        return kNothingToDo;
    }
    if (worst != kOk && failed.size() == inputs.size())
        return kInputError;
    return worst;
}

// ---- ablation ----------------------------------------------------------

namespace {

struct AblationJob {
    SpectralCurve curve;
    std::optional<SpectrumType> type;
};

struct AblationOutcome {
    FidelityReport direct, wire;
    double reduction_ratio = 0;
    std::size_t sampled_bytes = 0, full_bytes = 0;
    bool ok = false;
};

AblationOutcome ablate_one(const AblationJob& job, double budget_fraction)
{
    AblationOutcome o;
    SamplingConfig sampling;
    sampling.budget_fraction = budget_fraction;
    const PipelineConfig cfg = pipeline_config_for(job.type, sampling);
    try {
        PipelineResult r = run_pipeline(job.curve, cfg);
        o.direct = fidelity_report(r.original, r.reconstructed);
        o.reduction_ratio = r.sample.merged.reduction_ratio;

        SubplotAnswer sampled{"a", {r.sample.merged.sampled}, {}};
        SubplotAnswer full{"a", {r.original}, {}};
        const std::string text = serialize_subplot(sampled);
        o.sampled_bytes = text.size();
        o.full_bytes = serialize_subplot(full).size();
        const ParsedAnswer parsed = parse_answer(text);
        const SpectralCurve& line = select_subplot(parsed, "a").lines.at(0);
        const SpectralCurve rec = reconstruct_on_grid(line, r.original.x(), interpolant_for(cfg));
        o.wire = fidelity_report(r.original, rec);
        o.ok = true;
    } catch (const std::exception&) {
        o.ok = false;
    }
    return o;
}

} // namespace

AblationResult run_ablation(const AblationOptions& opts)
{
    if (!(opts.budget_fraction > 0.0 && opts.budget_fraction <= 1.0))
        throw Error(ErrorCode::InvalidConfig, "budget fraction must be in (0, 1]");
    std::vector<AblationJob> jobs;
    std::size_t load_failures = 0;
    if (opts.dataset) {
        for (const auto& f : list_curve_inputs(*opts.dataset)) {
            try {
                CurveFile file = load_curve_file(f);
                for (auto& c : file.curves)
                    jobs.push_back({std::move(c), file.type});
            } catch (const Error&) {
                ++load_failures;
            }
        }
    } else {
        for (auto& g : fidelity_suite(opts.seed, opts.per_type))
            for (auto& c : g.curves)
                jobs.push_back({std::move(c), g.spec.type});
    }

    std::vector<AblationOutcome> outcomes(jobs.size());
    parallel_for(jobs.size(), resolve_workers(opts.common.workers),
                 [&](std::size_t i) { outcomes[i] = ablate_one(jobs[i], opts.budget_fraction); });

    AblationResult res;
    AblationRow direct{"Testset with sampling strategy"}, wire{"With sampling strategy (two-decimal answer)"};
    double sum_r = 0;
    std::size_t sampled_bytes = 0, full_bytes = 0;
    for (const auto& o : outcomes) {
        if (!o.ok) {
            ++res.failures;
            continue;
        }
        direct.cd += o.direct.score_cd;
        direct.hd += o.direct.score_hd;
        direct.wd += o.direct.score_wd;
        wire.cd += o.wire.score_cd;
        wire.hd += o.wire.score_hd;
        wire.wd += o.wire.score_wd;
        sum_r += o.reduction_ratio;
        sampled_bytes += o.sampled_bytes;
        full_bytes += o.full_bytes;
        ++direct.count;
    }
    res.failures += load_failures;
    wire.count = direct.count;
    if (direct.count) {
        const double n = double(direct.count);
        for (auto* row : {&direct, &wire}) {
            row->cd /= n;
            row->hd /= n;
            row->wd /= n;
        }
        res.mean_reduction_ratio = sum_r / n;
        res.answer_length_ratio = full_bytes ? double(sampled_bytes) / double(full_bytes) : 0.0;
    }
    res.rows = {direct, wire};
    return res;
}

std::string ablation_markdown(const AblationResult& r, const std::vector<MetricKind>& metrics)
{
    std::vector<std::pair<std::string, std::array<double, 3>>> rows;
    for (const auto& row : r.rows)
        rows.push_back({row.label, {row.cd, row.hd, row.wd}});
    return score_table(rows, metrics);
}

int cmd_ablation(const AblationOptions& opts, std::ostream& out, std::ostream& log)
{
    const auto t0 = Clock::now();
    if (opts.metrics.empty()) {
        log << "no metric selected\n";
        return kConfigError;
    }
    AblationResult r;
    try {
        r = run_ablation(opts);
    } catch (const Error& e) {
        log << e.what() << '\n';
        return exit_code_for(e.code());
    }
    const std::string md = ablation_markdown(r, opts.metrics);
    out << md;
    const std::size_t n = r.rows.empty() ? 0 : r.rows.front().count;
    log << n << " curves, mean reduction ratio " << fixed4(r.mean_reduction_ratio) << ", answer length ratio "
        << fixed4(r.answer_length_ratio) << '\n';
    if (opts.out) {
        OutputDir dir(*opts.out);
        dir.write("ablation.md", md);
        json rows = json::array();
        for (const auto& row : r.rows)
            rows.push_back({{"label", row.label}, {"score_cd", row.cd}, {"score_hd", row.hd}, {"score_wd", row.wd},
                            {"count", row.count}});
        dir.write("ablation.json", pretty(json{{"rows", rows},
                                                 {"mean_reduction_ratio", r.mean_reduction_ratio},
                                                 {"answer_length_ratio", r.answer_length_ratio},
                                                 {"failures", r.failures}}));
        RunManifest m = make_manifest(opts.common, opts.seed, t0);
        if (opts.dataset)
            digest_inputs(m, list_curve_inputs(*opts.dataset));
        dir.write_manifest(std::move(m));
    }
    if (n == 0)
        return kNothingToDo;
    return r.failures ? kPartialFailure : kOk;
}

// ---- model outputs -----------------------------------------------------

namespace {

struct ScoreItem {
    std::string model;
    fs::path pred, truth;
};

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"')
                out.back().push_back(line[++i]);
            else if (c == '"')
                quoted = false;
            else
                out.back().push_back(c);
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else if (c != '\r') {
            out.back().push_back(c);
        }
    }
    return out;
}

std::vector<ScoreItem> score_items(const ModelScoreOptions& opts)
{
    std::vector<ScoreItem> items;
    if (opts.pairs_csv) {
        std::istringstream in(read_text_file(*opts.pairs_csv));
        std::string line;
        const fs::path base = opts.pairs_csv->parent_path();
        auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            auto f = split_csv_line(line);
            if (f.size() < 3)
                throw Error(ErrorCode::InvalidInput, "pairs CSV rows need model,pred,truth");
            if (items.empty() && f[0] == "model" && f[1] == "pred")
                continue;
            items.push_back({f[0], resolve(f[1]), resolve(f[2])});
        }
        return items;
    }
    if (!fs::is_directory(opts.pred_dir))
        throw Error(ErrorCode::InvalidInput, opts.pred_dir.string() + " is not a directory");
    std::vector<fs::path> models;
    for (const auto& e : fs::directory_iterator(opts.pred_dir))
        if (e.is_directory())
            models.push_back(e.path());
    std::sort(models.begin(), models.end());
    for (const auto& m : models) {
        std::vector<fs::path> preds;
        for (const auto& e : fs::directory_iterator(m))
            if (e.is_regular_file() && e.path().extension() == ".txt")
                preds.push_back(e.path());
        std::sort(preds.begin(), preds.end());
        for (const auto& p : preds)
            items.push_back({m.filename().string(), p, opts.truth_dir / (p.stem().string() + ".json")});
    }
    return items;
}

struct ItemScore {
    SubplotScore score;
    std::string error; // truth-side failure
};

ItemScore score_item(const ScoreItem& item, const ScoreOptions& sopts)
{
    ItemScore out;
    SubplotAnswer truth;
    try {
        truth = subplot_from_json(json::parse(read_text_file(item.truth)));
        if (truth.lines.empty())
            throw Error(ErrorCode::InvalidInput, "truth has no lines");
    } catch (const std::exception& e) {
        out.error = std::string("truth ") + item.truth.string() + ": " + e.what();
        return out;
    }
    SubplotAnswer pred;
    try {
        const ParsedAnswer parsed = parse_answer(read_text_file(item.pred));
        std::vector<Warning> notes = parsed.diagnostics.warnings;
        pred = select_subplot(parsed, truth.subplot_id, &notes);
        pred.diagnostics.insert(pred.diagnostics.begin(), notes.begin(), notes.end());
    } catch (const Error& e) {
        pred = SubplotAnswer{};
        pred.diagnostics.push_back({std::string(to_string(e.code())), 0, e.what()});
    }
    try {
        out.score = score_subplot_all(pred, truth, sopts);
    } catch (const std::exception& e) {
        out.score = SubplotScore{};
        out.score.diagnostics = pred.diagnostics;
        out.score.diagnostics.push_back({"scoring_failed", 0, e.what()});
    }
    return out;
}

} // namespace

ModelScoreResult score_model_outputs(const ModelScoreOptions& opts)
{
    const auto items = score_items(opts);
    std::vector<ItemScore> scores(items.size());
    parallel_for(items.size(), resolve_workers(opts.common.workers),
                 [&](std::size_t i) { scores[i] = score_item(items[i], opts.score); });

    ModelScoreResult res;
    res.details = json::array();
    for (std::size_t i = 0; i < items.size(); ++i) {
        json d{{"model", items[i].model}, {"pred", items[i].pred.filename().string()},
               {"truth", items[i].truth.filename().string()}};
        if (!scores[i].error.empty()) {
            d["error"] = scores[i].error;
            res.details.push_back(std::move(d));
            continue;
        }
        const auto& s = scores[i].score;
        d["score"] = s;
        res.details.push_back(std::move(d));
        auto it = std::find_if(res.rows.begin(), res.rows.end(), [&](const auto& r) { return r.model == items[i].model; });
        if (it == res.rows.end()) {
            res.rows.push_back({items[i].model});
            it = res.rows.end() - 1;
        }
        it->cd += s.score_cd;
        it->hd += s.score_hd;
        it->wd += s.score_wd;
        ++it->items;
        if (s.assignment.pairs.empty())
            ++it->zero_scored;
    }
    for (auto& r : res.rows) {
        r.cd /= double(r.items);
        r.hd /= double(r.items);
        r.wd /= double(r.items);
    }
    return res;
}

int cmd_score_model_outputs(const ModelScoreOptions& opts, std::ostream& out, std::ostream& log)
{
    const auto t0 = Clock::now();
    ModelScoreResult r;
    try {
        r = score_model_outputs(opts);
    } catch (const Error& e) {
        log << e.what() << '\n';
        return exit_code_for(e.code());
    }
    std::vector<std::pair<std::string, std::array<double, 3>>> rows;
    for (const auto& row : r.rows)
        rows.push_back({row.model, {row.cd, row.hd, row.wd}});
    const std::string md =
        score_table(rows, {MetricKind::Chamfer, MetricKind::Hausdorff, MetricKind::Wasserstein});
    out << md;
    std::size_t errors = 0;
    for (const auto& d : r.details)
        if (d.contains("error")) {
            ++errors;
            log << d["error"].get<std::string>() << '\n';
        }
    if (opts.out) {
        OutputDir dir(*opts.out);
        dir.write("scores.md", md);
        dir.write("scores.json", pretty(r.details));
        RunManifest m = make_manifest(opts.common, 0, t0);
        dir.write_manifest(std::move(m));
    }
    if (r.details.empty())
        return kNothingToDo;
    return errors ? kPartialFailure : kOk;
}

// ---- gen ---------------------------------------------------------------

int cmd_gen(const GenOptions& opts, std::ostream& log)
{
    const auto t0 = Clock::now();
    if (opts.count == 0) {
        log << "count is zero\n";
        return kNothingToDo;
    }
    if (!(opts.qc_fraction > 0.0 && opts.qc_fraction <= 1.0) || opts.max_lines < 1) {
        log << "qc fraction must be in (0, 1] and max lines >= 1\n";
        return kConfigError;
    }
    BatchOptions bo;
    bo.master_seed = opts.seed;
    bo.type = opts.type;
    bo.profile.max_lines = opts.max_lines;
    bo.workers = resolve_workers(opts.common.workers);
    BatchResult batch;
    try {
        batch = run_batch(opts.count, opts.qc_fraction, default_qc_predicate, bo);
    } catch (const Error& e) {
        log << e.what() << '\n';
        return exit_code_for(e.code());
    }

    const std::size_t n = batch.dataset.size();
    std::vector<std::string> curve_text(n), svg(n), train(n);
    parallel_for(n, bo.workers, [&](std::size_t i) {
        const auto& g = batch.dataset[i];
        char stem[32];
        std::snprintf(stem, sizeof stem, "%05zu", g.index);
        curve_text[i] = pretty(json{{"spec", g.spec}, {"curves", curves_json(g.curves)}});
        svg[i] = render_svg(g.curves, g.spec.type);
        train[i] = emit_training_sample(answer_curves(g.curves, g.spec, true), "a", std::string(stem) + ".svg");
    });
    OutputDir out(opts.out);
    std::string jsonl;
    for (std::size_t i = 0; i < n; ++i) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "%05zu", batch.dataset[i].index);
        out.write(std::string(stem) + ".json", curve_text[i]);
        out.write(std::string(stem) + ".svg", svg[i]);
        jsonl += train[i] + "\n";
    }
    out.write("train.jsonl", jsonl);
    json qc = batch.report;
    qc["attempts"] = batch.attempts;
    qc["batch_seed"] = batch.batch_seed;
    qc["profile"] = kProfileVersion;
    out.write("qc.json", pretty(qc));
    out.write_manifest(make_manifest(opts.common, opts.seed, t0));
    log << n << " samples, QC pass rate " << fixed4(batch.report.pass_rate) << " after " << batch.attempts
        << " attempt(s)\n";
    return kOk;
}

// ---- QA ----------------------------------------------------------------

std::vector<QaItem> load_qa_items(const fs::path& jsonl)
{
    std::istringstream in(read_text_file(jsonl));
    std::vector<QaItem> items;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            items.push_back(qa_item_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::InvalidInput, jsonl.string() + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(ErrorCode::InvalidInput, jsonl.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (items.back().id.empty())
            items.back().id = std::to_string(line_no);
    }
    return items;
}

namespace {

void write_accuracy(OutputDir& dir, const std::vector<AccuracyReport>& reports)
{
    dir.write("accuracy.md", accuracy_markdown(reports));
    dir.write("accuracy.csv", accuracy_csv(reports));
    json arr = json::array();
    for (const auto& r : reports) {
        json cells = json::object();
        static const char* names[] = {"en_L0", "en_L1", "zh_L0", "zh_L1"};
        for (int k = 0; k < 4; ++k) {
            const auto a = r.cells[k].accuracy();
            cells[names[k]] = {{"correct", r.cells[k].correct},
                               {"total", r.cells[k].total},
                               {"accuracy", a ? json(*a) : json(nullptr)}};
        }
        arr.push_back({{"model", r.model},
                       {"cells", cells},
                       {"overall", r.overall ? json(*r.overall) : json(nullptr)},
                       {"overall_mode", r.mode == OverallMode::Pooled ? "pooled" : "mean"},
                       {"unjudged", r.unjudged}});
    }
    dir.write("accuracy.json", pretty(reports.size() == 1 ? arr[0] : arr));
}

} // namespace

int cmd_eval_qa(const EvalQaOptions& opts, std::ostream& out, std::ostream& log)
{
    const auto t0 = Clock::now();
    std::vector<QaItem> items;
    try {
        items = load_qa_items(opts.items);
    } catch (const Error& e) {
        log << e.what() << '\n';
        return kInputError;
    }
    if (items.empty()) {
        log << "no QA items in " << opts.items.string() << '\n';
        return kNothingToDo;
    }
    std::vector<JudgeOutcome> outcomes;
    try {
        outcomes = judge_all(items, opts.mode, opts.endpoint, opts.transport);
    } catch (const Error& e) {
        log << e.what() << '\n';
        return exit_code_for(e.code());
    }
    std::vector<std::pair<QaItem, std::optional<JudgeVerdict>>> pairs;
    std::string jsonl;
    std::size_t errors = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        json rec{{"item", items[i]}};
        if (outcomes[i].verdict)
            rec["verdict"] = *outcomes[i].verdict;
        else {
            rec["error"] = outcomes[i].error;
            if (opts.mode != JudgeMode::Local)
                ++errors;
        }
        jsonl += rec.dump() + "\n";
        pairs.emplace_back(items[i], outcomes[i].verdict);
    }
    const AccuracyReport report = accuracy_report(pairs, opts.overall, opts.model);
    OutputDir dir(opts.report_dir);
    dir.write("verdicts.jsonl", jsonl);
    write_accuracy(dir, {report});
    RunManifest m = make_manifest(opts.common, 0, t0);
    digest_inputs(m, {opts.items});
    dir.write_manifest(std::move(m));
    out << accuracy_markdown({report});
    if (report.unjudged)
        log << report.unjudged << " item(s) left unjudged\n";
    return errors ? kPartialFailure : kOk;
}

int cmd_report(const ReportOptions& opts, std::ostream& out, std::ostream& log)
{
    const auto t0 = Clock::now();
    if (opts.runs.empty()) {
        log << "no runs given\n";
        return kNothingToDo;
    }
    std::vector<AccuracyReport> reports;
    std::vector<fs::path> inputs;
    for (const auto& run : opts.runs) {
        try {
            std::string model = run.filename().string();
            const fs::path acc = run / "accuracy.json";
            if (fs::exists(acc)) {
                const json a = json::parse(read_text_file(acc));
                if (a.is_object() && a.contains("model"))
                    model = a["model"].get<std::string>();
            }
            const fs::path verdicts = run / "verdicts.jsonl";
            inputs.push_back(verdicts);
            std::istringstream in(read_text_file(verdicts));
            std::vector<std::pair<QaItem, std::optional<JudgeVerdict>>> pairs;
            std::string line;
            while (std::getline(in, line)) {
                if (line.find_first_not_of(" \t\r") == std::string::npos)
                    continue;
                const json rec = json::parse(line);
                std::optional<JudgeVerdict> v;
                if (rec.contains("verdict")) {
                    JudgeVerdict jv;
                    jv.correct = rec["verdict"].at("correct").get<bool>();
                    jv.kind = rec["verdict"].value("judge_kind", "") == "remote" ? JudgeKind::Remote
                                                                                 : JudgeKind::LocalNumeric;
                    v = jv;
                }
                pairs.emplace_back(qa_item_from_json(rec.at("item")), v);
            }
            reports.push_back(accuracy_report(pairs, opts.overall, model));
        } catch (const std::exception& e) {
            log << run.string() << ": " << e.what() << '\n';
            return kInputError;
        }
    }
    OutputDir dir(opts.out);
    write_accuracy(dir, reports);
    RunManifest m = make_manifest(opts.common, 0, t0);
    digest_inputs(m, inputs);
    dir.write_manifest(std::move(m));
    out << accuracy_markdown(reports);
    return kOk;
}

} // namespace specfid::cli
