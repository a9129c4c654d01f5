#include <algorithm>
#include <cctype>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "specfid/cli/commands.hpp"
#include "specfid/core/curve_io.hpp"
#include "specfid/reconstruct/render_svg.hpp"
#include "specfid/wirefmt/wirefmt.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace specfid;
using namespace specfid::cli;

namespace {

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

SpectrumType require_type(const std::string& text)
{
    auto t = parse_spectrum_type(text);
    if (!t)
        throw Error(ErrorCode::InvalidConfig, "unknown spectrum type '" + text + "'");
    return *t;
}

Interpolant parse_interpolant(const std::string& text)
{
    const std::string s = lower(text);
    if (s == "natural")
        return Interpolant::NaturalCubic;
    if (s == "monotone")
        return Interpolant::Monotone;
    if (s == "stick")
        return Interpolant::Stick;
    throw Error(ErrorCode::InvalidConfig, "interpolant must be natural, monotone or stick");
}

std::vector<MetricKind> metrics_from(const std::string& m)
{
    const std::string s = lower(m);
    if (s == "cd")
        return {MetricKind::Chamfer};
    if (s == "hd")
        return {MetricKind::Hausdorff};
    if (s == "wd")
        return {MetricKind::Wasserstein};
    if (s == "all")
        return {MetricKind::Chamfer, MetricKind::Hausdorff, MetricKind::Wasserstein};
    throw Error(ErrorCode::InvalidConfig, "metric must be cd, hd, wd or all");
}

void emit(const std::string& out, const std::string& text)
{
    if (out.empty() || out == "-")
        std::cout << text;
    else
        write_text_file(out, text);
}

std::vector<SpectralCurve> load_canonical(const std::string& path, std::vector<std::string>* notes = nullptr)
{
    std::vector<SpectralCurve> out;
    for (auto& c : load_curve_file(path).curves) {
        auto canon = canonicalize(c);
        if (notes && canon.dropped_nonfinite)
            notes->push_back(c.name + ": dropped " + std::to_string(canon.dropped_nonfinite) + " non-finite point(s)");
        if (notes && canon.collapsed_duplicates)
            notes->push_back(c.name + ": merged " + std::to_string(canon.collapsed_duplicates) + " duplicate x value(s)");
        out.push_back(std::move(canon.curve));
    }
    return out;
}

json curves_json(const std::vector<SpectralCurve>& curves)
{
    json arr = json::array();
    for (const auto& c : curves)
        arr.push_back(c);
    return arr;
}

/// Subplots from wire text or from JSON (a subplot object or curve schema).
std::vector<SubplotAnswer> load_subplots(const std::string& path, std::vector<Warning>& warnings)
{
    const std::string text = read_text_file(path);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
        try {
            return {subplot_from_json(json::parse(text))};
        } catch (const json::exception&) {
            // not JSON after all; fall through to the answer parser
        }
    }
    ParsedAnswer parsed = parse_answer(text);
    warnings.insert(warnings.end(), parsed.diagnostics.warnings.begin(), parsed.diagnostics.warnings.end());
    return parsed.subplots;
}

std::string join_args(int argc, char** argv)
{
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i)
            s.push_back(' ');
        s += argv[i];
    }
    return s;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectral curve sampling, reconstruction and scoring"};
    app.set_config("--config", "", "TOML file with option defaults; flags override it");
    app.require_subcommand(1);
    unsigned workers = 0;
    app.add_option("--workers", workers, "Worker threads (0: all cores)");

    // smooth
    auto* smooth = app.add_subcommand("smooth", "Savitzky-Golay smoothing of curve files");
    std::string sm_in, sm_out = "-";
    SgConfig sg;
    smooth->add_option("--in", sm_in, "Curve file (JSON or CSV)")->required();
    smooth->add_option("--out", sm_out, "Output JSON ('-' for stdout)");
    smooth->add_option("--window", sg.window, "Odd window length");
    smooth->add_option("--order", sg.poly_order, "Polynomial order");

    // sample
    auto* sample = app.add_subcommand("sample", "Uniform baseline plus RDP critical points");
    std::string sa_in, sa_out = "-", sa_stats;
    SamplingConfig sampling;
    double sa_eps = 0, sa_budget = 0;
    long sa_target = 0;
    sample->add_option("--in", sa_in, "Smoothed curve file")->required();
    sample->add_option("--out", sa_out, "Sampled curves JSON");
    sample->add_option("--stats", sa_stats, "Stats JSON (stderr when unset)");
    sample->add_option("--baseline-frac", sampling.baseline_fraction, "Uniform baseline fraction");
    auto* eps_opt = sample->add_option("--epsilon", sa_eps, "RDP threshold in unit-square coordinates");
    auto* tgt_opt = sample->add_option("--target-points", sa_target, "Point budget (autotunes epsilon)");
    auto* bud_opt = sample->add_option("--budget-frac", sa_budget, "Point budget as a fraction of N");
    eps_opt->excludes(tgt_opt)->excludes(bud_opt);
    tgt_opt->excludes(bud_opt);

    // reconstruct
    auto* recon = app.add_subcommand("reconstruct", "Cubic spline through sampled points");
    std::string rc_in, rc_out = "-", rc_grid = "original", rc_original, rc_kind = "natural";
    recon->add_option("--in", rc_in, "Sampled curves")->required();
    recon->add_option("--out", rc_out, "Reconstructed curves JSON");
    recon->add_option("--grid", rc_grid, "original | uniform:K");
    recon->add_option("--original", rc_original, "Curve file whose x grid is used for --grid original");
    recon->add_option("--interpolant", rc_kind, "natural | monotone | stick");

    // render
    auto* render = app.add_subcommand("render", "SVG figure of curve files");
    std::string rd_in, rd_out, rd_type = "IR";
    render->add_option("--in", rd_in, "Curve file")->required();
    render->add_option("--out", rd_out, "SVG file")->required();
    render->add_option("--type", rd_type, "Spectrum type (MS draws sticks)");

    // score
    auto* score = app.add_subcommand("score", "Fidelity scores of predicted vs. truth subplots");
    std::string sc_pred, sc_truth, sc_metric = "all", sc_subplot, sc_out = "-";
    bool strict_eq2 = false, penalize = false, raw_units = false;
    score->add_option("--pred", sc_pred, "Answer text or JSON")->required();
    score->add_option("--truth", sc_truth, "Answer text or JSON")->required();
    score->add_option("--metric", sc_metric, "cd | hd | wd | all");
    score->add_option("--subplot", sc_subplot, "Only this subplot id");
    score->add_option("--out", sc_out, "Report JSON");
    score->add_flag("--strict-eq2", strict_eq2, "Divide every distance by the squared diameter");
    score->add_flag("--no-normalize", raw_units, "Score in raw axis units instead of the joint unit square");
    score->add_flag("--penalize-unmatched", penalize, "Unmatched truth lines score 0");

    // parse
    auto* parse = app.add_subcommand("parse", "Read answer text into JSON");
    std::string pa_in, pa_subplot, pa_out = "-";
    parse->add_option("--in", pa_in, "Answer text")->required();
    parse->add_option("--subplot", pa_subplot, "Only this subplot id");
    parse->add_option("--out", pa_out, "Output JSON");

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
    GenOptions go;
    std::string gen_type = "all", gen_out;
    gen->add_option("--type", gen_type, "Spectrum type or 'all'");
    gen->add_option("--count", go.count, "Number of samples");
    gen->add_option("--qc-frac", go.qc_fraction, "Fraction checked per batch");
    gen->add_option("--seed", go.seed, "Master seed");
    gen->add_option("--max-lines", go.max_lines, "Curves per figure, up to");
    gen->add_option("--out", gen_out, "Output directory")->required();

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "smooth, sample, reconstruct and score curve files");
    PipelineOptions po;
    std::string pi_in, pi_out, pi_type;
    double pi_eps = 0, pi_budget = kDefaultBudgetFraction;
    bool pi_no_smooth = false;
    pipe->add_option("--in", pi_in, "Curve file or directory")->required();
    pipe->add_option("--out", pi_out, "Output directory")->required();
    pipe->add_option("--window", po.sg.window, "Smoothing window");
    pipe->add_option("--order", po.sg.poly_order, "Smoothing polynomial order");
    pipe->add_option("--baseline-frac", po.sampling.baseline_fraction, "Uniform baseline fraction");
    auto* pi_eps_opt = pipe->add_option("--epsilon", pi_eps, "Fixed RDP threshold instead of a budget");
    pipe->add_option("--budget-frac", pi_budget, "Point budget as a fraction of N")->excludes(pi_eps_opt);
    pipe->add_option("--type", pi_type, "Spectrum type for every input");
    std::string pi_interp;
    pipe->add_option("--interpolant", pi_interp, "natural | monotone | stick (default: by type)");
    pipe->add_option("--seed", po.seed, "Seed recorded in the manifest");
    pipe->add_flag("--no-smooth", pi_no_smooth, "Skip smoothing");
    pipe->add_flag("--strict-eq2", strict_eq2, "Divide every distance by the squared diameter");
    pipe->add_flag("--no-normalize", raw_units, "Score in raw axis units instead of the joint unit square");

    // ablation
    auto* abl = app.add_subcommand("ablation", "Sampling-strategy fidelity table");
    AblationOptions ao;
    std::string ab_dataset, ab_out, ab_metric = "all";
    abl->add_option("--dataset", ab_dataset, "Dataset directory (generated suite when unset)");
    abl->add_option("--seed", ao.seed, "Suite master seed");
    abl->add_option("--per-type", ao.per_type, "Suite curves per spectrum type");
    abl->add_option("--budget-frac", ao.budget_fraction, "Point budget as a fraction of N");
    abl->add_option("--metric", ab_metric, "cd | hd | wd | all");
    abl->add_option("--out", ab_out, "Output directory");

    // score-model-outputs
    auto* smo = app.add_subcommand("score-model-outputs", "Score directories of model answers");
    ModelScoreOptions mo;
    std::string mo_pred, mo_truth, mo_pairs, mo_out;
    smo->add_option("--pred", mo_pred, "Directory of MODEL/NAME.txt");
    smo->add_option("--truth", mo_truth, "Directory of NAME.json");
    smo->add_option("--pairs", mo_pairs, "CSV of model,pred,truth replacing the directory layout");
    smo->add_option("--out", mo_out, "Output directory");
    smo->add_flag("--strict-eq2", strict_eq2, "Divide every distance by the squared diameter");
    smo->add_flag("--no-normalize", raw_units, "Score in raw axis units instead of the joint unit square");
    smo->add_flag("--penalize-unmatched", penalize, "Unmatched truth lines score 0");

    // eval-qa
    auto* qa = app.add_subcommand("eval-qa", "Judge QA predictions");
    EvalQaOptions qo;
    std::string qa_items, qa_judge = "auto", qa_report, qa_overall = "mean";
    qa->add_option("--items", qa_items, "JSONL items")->required();
    qa->add_option("--judge", qa_judge, "local | remote | auto");
    qa->add_option("--report", qa_report, "Report directory")->required();
    qa->add_option("--overall", qa_overall, "mean | pooled");
    qa->add_option("--model", qo.model, "Row label");
    qa->add_option("--endpoint", qo.endpoint.base_url, "Judge base URL");
    qa->add_option("--endpoint-path", qo.endpoint.path, "Chat-completions path");
    qa->add_option("--judge-model", qo.endpoint.model, "Judge model name");
    qa->add_option("--api-key-env", qo.endpoint.api_key_env, "Environment variable holding the key");
    qa->add_option("--concurrency", qo.endpoint.concurrency, "Concurrent judge requests");

    // report
    auto* rep = app.add_subcommand("report", "Accuracy table over eval-qa runs");
    ReportOptions ro;
    std::string ro_out, ro_overall = "mean";
    std::vector<std::string> ro_runs;
    rep->add_option("runs", ro_runs, "eval-qa report directories")->required();
    rep->add_option("--out", ro_out, "Output directory")->required();
    rep->add_option("--overall", ro_overall, "mean | pooled");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    CommonOptions common;
    common.command_line = join_args(argc, argv);
    common.config = app.config_to_str(true, false);
    common.workers = workers;

    ScoreOptions sopts;
    sopts.mode = strict_eq2 ? ScoreMode::StrictSquared : ScoreMode::Dimensional;
    sopts.penalize_unmatched = penalize;
    sopts.normalize = !raw_units;

    try {
        if (*smooth) {
            validate(sg);
            std::vector<SpectralCurve> out;
            for (const auto& c : load_canonical(sm_in)) {
                if (c.size() < sg.window) {
                    std::cerr << c.name << ": shorter than the window, left unsmoothed\n";
                    out.push_back(c);
                } else {
                    out.push_back(sg_smooth(c, sg));
                }
            }
            emit(sm_out, curves_json(out).dump(2) + "\n");
            return kOk;
        }
        if (*sample) {
            if (*eps_opt)
                sampling.epsilon = sa_eps;
            if (*tgt_opt)
                sampling.target_points = sa_target;
            if (*bud_opt)
                sampling.budget_fraction = sa_budget;
            sampling.validate();
            std::vector<SpectralCurve> out;
            json stats = json::array();
            for (const auto& c : load_canonical(sa_in)) {
                SampleResult r = sample_curve(c, sampling);
                stats.push_back({{"name", c.name},
                                 {"n_in", c.size()},
                                 {"n_out", r.merged.sampled.size()},
                                 {"reduction_ratio", r.merged.reduction_ratio},
                                 {"epsilon_used", r.epsilon_used},
                                 {"warnings", r.warnings}});
                out.push_back(std::move(r.merged.sampled));
            }
            emit(sa_out, curves_json(out).dump(2) + "\n");
            if (sa_stats.empty())
                std::cerr << stats.dump(2) << '\n';
            else
                write_text_file(sa_stats, stats.dump(2) + "\n");
            return kOk;
        }
        if (*recon) {
            const Interpolant kind = parse_interpolant(rc_kind);
            const auto sampled = load_canonical(rc_in);
            std::vector<SpectralCurve> originals;
            if (!rc_original.empty())
                originals = load_canonical(rc_original);
            std::vector<SpectralCurve> out;
            for (std::size_t i = 0; i < sampled.size(); ++i) {
                const auto& s = sampled[i];
                Vector<double> grid;
                if (rc_grid.rfind("uniform:", 0) == 0) {
                    const long k = std::stol(rc_grid.substr(8));
                    if (k < 2)
                        throw Error(ErrorCode::InvalidConfig, "uniform grid needs K >= 2");
                    grid = Vector<double>::LinSpaced(k, s.points(0, 0), s.points(s.size() - 1, 0));
                } else if (rc_grid == "original") {
                    if (i < originals.size())
                        grid = originals[i].x();
                    else
                        grid = s.x();
                } else {
                    throw Error(ErrorCode::InvalidConfig, "grid must be original or uniform:K");
                }
                out.push_back(reconstruct_on_grid(s, grid, kind));
            }
            emit(rc_out, curves_json(out).dump(2) + "\n");
            return kOk;
        }
        if (*render) {
            write_text_file(rd_out, render_svg(load_canonical(rd_in), require_type(rd_type)));
            return kOk;
        }
        if (*score) {
            const auto kinds = metrics_from(sc_metric);
            if (kinds.size() == 1)
                sopts.match_metric = kinds.front();
            std::vector<Warning> pw, tw;
            const auto preds = load_subplots(sc_pred, pw);
            const auto truths = load_subplots(sc_truth, tw);
            json subs = json::array();
            double sum[3] = {0, 0, 0};
            std::size_t n = 0;
            for (const auto& t : truths) {
                if (!sc_subplot.empty() && lower(t.subplot_id) != lower(sc_subplot))
                    continue;
                SubplotAnswer p;
                try {
                    ParsedAnswer tmp{preds, {}};
                    std::vector<Warning> notes;
                    p = select_subplot(tmp, t.subplot_id, &notes);
                    p.diagnostics.insert(p.diagnostics.end(), notes.begin(), notes.end());
                } catch (const Error& e) {
                    p.diagnostics.push_back({std::string(to_string(e.code())), 0, e.what()});
                }
                const SubplotScore s = score_subplot_all(p, t, sopts);
                json j = s;
                j["subplot_id"] = t.subplot_id;
                if (kinds.size() == 1) {
                    const std::string key = "score_" + lower(std::string(to_string(kinds.front())).substr(0, 1)) + "d";
                    j = json{{"subplot_id", t.subplot_id}, {key, s.score(kinds.front())}, {"pairs", j["pairs"]},
                             {"diagnostics", j["diagnostics"]}};
                }
                subs.push_back(std::move(j));
                sum[0] += s.score_cd;
                sum[1] += s.score_hd;
                sum[2] += s.score_wd;
                ++n;
            }
            if (n == 0)
                throw Error(ErrorCode::NoSubplotFound, "no truth subplot to score");
            json mean = json::object();
            static const char* keys[] = {"score_cd", "score_hd", "score_wd"};
            for (auto k : kinds)
                mean[keys[static_cast<int>(k)]] = sum[static_cast<int>(k)] / double(n);
            json out{{"subplots", subs}, {"mean", mean}, {"pred_warnings", pw}};
            emit(sc_out, out.dump(2) + "\n");
            return kOk;
        }
        if (*parse) {
            ParsedAnswer parsed = parse_answer(read_text_file(pa_in));
            json subs = json::array();
            if (!pa_subplot.empty()) {
                std::vector<Warning> notes;
                subs.push_back(select_subplot(parsed, pa_subplot, &notes));
                parsed.diagnostics.warnings.insert(parsed.diagnostics.warnings.end(), notes.begin(), notes.end());
            } else {
                for (const auto& s : parsed.subplots)
                    subs.push_back(s);
            }
            json out{{"subplots", subs},
                     {"warnings", parsed.diagnostics.warnings},
                     {"salvaged_points", parsed.diagnostics.salvaged_points},
                     {"dropped_fragments", parsed.diagnostics.dropped_fragments}};
            emit(pa_out, out.dump(2) + "\n");
            return kOk;
        }
        if (*gen) {
            go.common = common;
            go.out = gen_out;
            if (lower(gen_type) != "all")
                go.type = require_type(gen_type);
            return cmd_gen(go, std::cerr);
        }
        if (*pipe) {
            po.common = common;
            po.input = pi_in;
            po.out = pi_out;
            po.smooth = !pi_no_smooth;
            po.score = sopts;
            if (*pi_eps_opt)
                po.sampling.epsilon = pi_eps;
            else
                po.sampling.budget_fraction = pi_budget;
            if (!pi_type.empty())
                po.type = require_type(pi_type);
            if (!pi_interp.empty())
                po.interpolant = parse_interpolant(pi_interp);
            return cmd_pipeline(po, std::cerr);
        }
        if (*abl) {
            ao.common = common;
            ao.metrics = metrics_from(ab_metric);
            if (!ab_dataset.empty())
                ao.dataset = ab_dataset;
            if (!ab_out.empty())
                ao.out = ab_out;
            return cmd_ablation(ao, std::cout, std::cerr);
        }
        if (*smo) {
            mo.common = common;
            mo.score = sopts;
            if (mo_pairs.empty() && (mo_pred.empty() || mo_truth.empty()))
                throw Error(ErrorCode::InvalidConfig, "give --pred and --truth, or --pairs");
            mo.pred_dir = mo_pred;
            mo.truth_dir = mo_truth;
            if (!mo_pairs.empty())
                mo.pairs_csv = mo_pairs;
            if (!mo_out.empty())
                mo.out = mo_out;
            return cmd_score_model_outputs(mo, std::cout, std::cerr);
        }
        if (*qa) {
            qo.common = common;
            qo.items = qa_items;
            qo.report_dir = qa_report;
            const std::string j = lower(qa_judge);
            if (j == "local")
                qo.mode = JudgeMode::Local;
            else if (j == "remote")
                qo.mode = JudgeMode::Remote;
            else if (j == "auto")
                qo.mode = JudgeMode::Auto;
            else
                throw Error(ErrorCode::InvalidConfig, "judge must be local, remote or auto");
            if (lower(qa_overall) == "pooled")
                qo.overall = OverallMode::Pooled;
            else if (lower(qa_overall) != "mean")
                throw Error(ErrorCode::InvalidConfig, "overall must be mean or pooled");
            return cmd_eval_qa(qo, std::cout, std::cerr);
        }
        if (*rep) {
            ro.common = common;
            ro.out = ro_out;
            for (const auto& r : ro_runs)
                ro.runs.emplace_back(r);
            if (lower(ro_overall) == "pooled")
                ro.overall = OverallMode::Pooled;
            else if (lower(ro_overall) != "mean")
                throw Error(ErrorCode::InvalidConfig, "overall must be mean or pooled");
            return cmd_report(ro, std::cout, std::cerr);
        }
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return kInputError;
    }
    return kOk;
}
