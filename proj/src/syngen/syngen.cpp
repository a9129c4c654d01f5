#include "specfid/syngen/syngen.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <numbers>
#include <thread>

#include "specfid/syngen/rng.hpp"
#include "specfid/wirefmt/wirefmt.hpp"

namespace specfid {

std::string_view to_string(PeakShape s) noexcept
{
    switch (s) {
    case PeakShape::Gaussian: return "gaussian";
    case PeakShape::Lorentzian: return "lorentzian";
    case PeakShape::PseudoVoigt: return "pseudo_voigt";
    case PeakShape::Stick: return "stick";
    }
    return "?";
}

std::string_view to_string(BaselineKind b) noexcept
{
    switch (b) {
    case BaselineKind::Flat: return "flat";
    case BaselineKind::Linear: return "linear";
    case BaselineKind::BroadHump: return "broad_hump";
    }
    return "?";
}

void validate(const SynthSpec& s)
{
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidSpec, what); };
    if (s.n_points < 2)
        fail("n_points must be at least 2");
    if (!(s.x_hi > s.x_lo) || !std::isfinite(s.x_lo) || !std::isfinite(s.x_hi))
        fail("x_range must be finite with lo < hi");
    if (!(s.noise_sigma >= 0) || !std::isfinite(s.noise_sigma))
        fail("noise_sigma must be finite and >= 0");
    if (s.n_lines < 1)
        fail("n_lines must be at least 1");
    for (std::size_t k = 0; k < s.peaks.size(); ++k) {
        const Peak& p = s.peaks[k];
        if (!(p.center >= s.x_lo && p.center <= s.x_hi))
            fail("peak " + std::to_string(k) + " center outside x_range");
        if (!std::isfinite(p.height))
            fail("peak " + std::to_string(k) + " height is not finite");
        if (p.shape != PeakShape::Stick && !(p.width > 0))
            fail("peak " + std::to_string(k) + " width must be positive");
        if (p.shape == PeakShape::PseudoVoigt && !(p.eta >= 0 && p.eta <= 1))
            fail("peak " + std::to_string(k) + " eta must lie in [0, 1]");
    }
    if (s.baseline.kind == BaselineKind::BroadHump && !(s.baseline.hump_width > 0))
        fail("hump width must be positive");
}

double peak_value(const Peak& p, double x)
{
    const double hw = 0.5 * p.width;
    const double dx = x - p.center;
    const double gauss = std::exp(-std::numbers::ln2 * dx * dx / (hw * hw));
    const double lorentz = 1.0 / (1.0 + dx * dx / (hw * hw));
    switch (p.shape) {
    case PeakShape::Gaussian: return p.height * gauss;
    case PeakShape::Lorentzian: return p.height * lorentz;
    case PeakShape::PseudoVoigt: return p.height * (p.eta * lorentz + (1.0 - p.eta) * gauss);
    case PeakShape::Stick: return x == p.center ? p.height : 0.0;
    }
    return 0;
}

namespace {

struct AxisLabels {
    const char* x;
    const char* y;
};

AxisLabels labels_for(SpectrumType t, bool invert)
{
    switch (t) {
    case SpectrumType::NMR: return {"Chemical shift (ppm)", "Intensity (a.u.)"};
    case SpectrumType::IR: return {"Wavenumber (cm-1)", invert ? "Transmittance (%)" : "Absorbance (a.u.)"};
    case SpectrumType::XRD: return {"2theta (degree)", "Intensity (counts)"};
    case SpectrumType::Raman: return {"Raman shift (cm-1)", "Intensity (counts)"};
    case SpectrumType::MS: return {"m/z", "Relative abundance (%)"};
    case SpectrumType::UVVis: return {"Wavelength (nm)", "Absorbance"};
    case SpectrumType::XPS: return {"Binding energy (eV)", "Intensity (counts/s)"};
    }
    return {"x", "y"};
}

double baseline_value(const Baseline& b, double t, double x)
{
    double v = b.offset + b.slope * t;
    if (b.kind == BaselineKind::BroadHump) {
        const double d = (x - b.hump_center) / b.hump_width;
        v += b.hump_height * std::exp(-0.5 * d * d);
    }
    return v;
}

} // namespace

std::vector<SpectralCurve> gen_spectrum(const SynthSpec& spec)
{
    validate(spec);
    const Eigen::Index n = spec.n_points;
    const Vector<double> x = Vector<double>::LinSpaced(n, spec.x_lo, spec.x_hi);
    const double step = (spec.x_hi - spec.x_lo) / double(n - 1);
    const auto labels = labels_for(spec.type, spec.invert);

    Rng rng(splitmix64(spec.seed, 0x5EC7));
    std::vector<SpectralCurve> out;
    for (int line = 0; line < spec.n_lines; ++line) {
        std::vector<double> scale(spec.peaks.size(), 1.0);
        if (line > 0)
            for (double& s : scale)
                s = rng.uniform(0.6, 1.4);
        PointMatrix<double> pts(n, 2);
        pts.col(0) = x;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double t = double(i) / double(n - 1);
            pts(i, 1) = baseline_value(spec.baseline, t, x(i));
        }
        for (std::size_t k = 0; k < spec.peaks.size(); ++k) {
            const Peak& p = spec.peaks[k];
            if (p.shape == PeakShape::Stick) {
                const auto i = std::clamp<Eigen::Index>(std::llround((p.center - spec.x_lo) / step), 0, n - 1);
                pts(i, 1) += scale[k] * p.height;
                continue;
            }
            for (Eigen::Index i = 0; i < n; ++i)
                pts(i, 1) += scale[k] * peak_value(p, x(i));
        }
        if (spec.invert)
            pts.col(1) = (spec.invert_top - pts.col(1).array()).matrix();
        if (spec.noise_sigma > 0)
            for (Eigen::Index i = 0; i < n; ++i)
                pts(i, 1) += spec.noise_sigma * rng.normal();
        pts.col(1).array() += double(line) * spec.line_offset;

        SpectralCurve c(std::move(pts), "line " + std::to_string(line + 1));
        c.x_label = labels.x;
        c.y_label = labels.y;
        out.push_back(std::move(c));
    }
    return out;
}

namespace {

// Heights with one dominant peak and a long tail of small ones.
double tail_height(Rng& rng, double top, double min_share) { return top * rng.log_uniform(min_share, 1.0); }

double noise_for(Rng& rng, double top) { return top * rng.uniform(0.002, 0.01); }

void add_simple_peaks(SynthSpec& s, Rng& rng, int count, double c_lo, double c_hi, double w_lo, double w_hi,
                      double top, double min_share, PeakShape shape)
{
    for (int k = 0; k < count; ++k) {
        Peak p;
        p.center = rng.uniform(c_lo, c_hi);
        p.height = k == 0 ? top : tail_height(rng, top, min_share);
        p.width = rng.uniform(w_lo, w_hi);
        p.shape = shape;
        if (shape == PeakShape::PseudoVoigt)
            p.eta = rng.uniform(0.2, 0.8);
        s.peaks.push_back(p);
    }
}

} // namespace

SynthSpec sample_type_profile(SpectrumType type, std::uint64_t seed, const ProfileOptions& opts)
{
    Rng rng(seed);
    SynthSpec s;
    s.type = type;
    s.seed = seed;
    s.n_lines = opts.max_lines > 1 ? static_cast<int>(rng.uniform_int(1, opts.max_lines)) : 1;

    switch (type) {
    case SpectrumType::MS: {
        s.n_points = static_cast<int>(rng.uniform_int(2400, 3000));
        s.x_lo = 50;
        s.x_hi = 800;
        s.smooth = false;
        const int count = static_cast<int>(rng.uniform_int(5, 30));
        for (int k = 0; k < count; ++k) {
            Peak p;
            p.shape = PeakShape::Stick;
            p.center = std::round(rng.uniform(55, 795));
            p.height = k == 0 ? 100.0 : tail_height(rng, 100.0, 0.002);
            p.width = 0;
            s.peaks.push_back(p);
        }
        s.line_offset = 0;
        break;
    }
    case SpectrumType::UVVis: {
        s.n_points = static_cast<int>(rng.uniform_int(800, 3000));
        s.x_lo = 200;
        s.x_hi = 800;
        const double top = rng.uniform(0.3, 1.5);
        add_simple_peaks(s, rng, static_cast<int>(rng.uniform_int(1, 4)), 220, 760, 30, 120, top, 0.1, PeakShape::Gaussian);
        s.baseline = {BaselineKind::Linear, rng.uniform(0.01, 0.08), -rng.uniform(0.0, 0.05)};
        s.noise_sigma = noise_for(rng, top);
        s.line_offset = 0.1 * top;
        break;
    }
    case SpectrumType::IR: {
        s.n_points = static_cast<int>(rng.uniform_int(1500, 3000));
        s.x_lo = 400;
        s.x_hi = 4000;
        const double top = rng.uniform(40, 80);
        add_simple_peaks(s, rng, static_cast<int>(rng.uniform_int(5, 20)), 450, 3950, 20, 80, top, 0.05, PeakShape::Lorentzian);
        s.baseline = {BaselineKind::Linear, rng.uniform(0, 5), rng.uniform(-3, 3)};
        s.invert = rng.bernoulli(0.5);
        s.noise_sigma = noise_for(rng, top);
        s.line_offset = 0.2 * top;
        break;
    }
    case SpectrumType::Raman: {
        s.n_points = static_cast<int>(rng.uniform_int(1800, 3000));
        s.x_lo = 100;
        s.x_hi = 3500;
        const double top = rng.uniform(500, 5000);
        add_simple_peaks(s, rng, static_cast<int>(rng.uniform_int(3, 15)), 150, 3450, 15, 45, top, 0.02, PeakShape::Lorentzian);
        s.baseline.kind = BaselineKind::BroadHump;
        s.baseline.offset = rng.uniform(0, 0.05) * top;
        s.baseline.hump_height = rng.uniform(0, 0.3) * top;
        s.baseline.hump_center = rng.uniform(s.x_lo, s.x_hi);
        s.baseline.hump_width = rng.uniform(600, 1500);
        s.noise_sigma = noise_for(rng, top);
        s.line_offset = 0.3 * top;
        break;
    }
    case SpectrumType::XRD: {
        s.n_points = static_cast<int>(rng.uniform_int(2500, 3000));
        s.x_lo = 10;
        s.x_hi = 80;
        const double top = rng.uniform(1000, 10000);
        add_simple_peaks(s, rng, static_cast<int>(rng.uniform_int(5, 25)), 12, 78, 0.3, 0.49, top, 0.005, PeakShape::PseudoVoigt);
        s.baseline.kind = BaselineKind::BroadHump;
        s.baseline.offset = rng.uniform(0.01, 0.05) * top;
        s.baseline.hump_height = rng.uniform(0, 0.1) * top;
        s.baseline.hump_center = rng.uniform(15, 35);
        s.baseline.hump_width = rng.uniform(4, 10);
        s.noise_sigma = noise_for(rng, top);
        s.line_offset = 0.3 * top;
        break;
    }
    case SpectrumType::NMR: {
        s.n_points = static_cast<int>(rng.uniform_int(2400, 3000));
        s.x_lo = 0;
        s.x_hi = 12;
        const double top = 100;
        const int groups = static_cast<int>(rng.uniform_int(2, 10));
        for (int g = 0; g < groups; ++g) {
            const int comps = static_cast<int>(rng.uniform_int(1, 4));
            const double width = rng.uniform(0.05, 0.1);
            const double j = width * rng.uniform(1.2, 2.0);
            const double amp = g == 0 ? top : tail_height(rng, top, 0.02);
            const double mid = rng.uniform(0.5 + 0.5 * j * (comps - 1), 11.5 - 0.5 * j * (comps - 1));
            // binomial intensities 1, 1:1, 1:2:1, 1:3:3:1, tallest component = amp
            const double peak_binom = comps == 3 ? 2.0 : comps == 4 ? 3.0 : 1.0;
            double binom = 1;
            for (int c = 0; c < comps; ++c) {
                Peak p;
                p.shape = PeakShape::Lorentzian;
                p.center = mid + (c - 0.5 * (comps - 1)) * j;
                p.width = width;
                p.height = amp * binom / peak_binom;
                s.peaks.push_back(p);
                binom = binom * (comps - 1 - c) / (c + 1);
            }
        }
        s.noise_sigma = noise_for(rng, top);
        s.line_offset = 0.5 * top;
        break;
    }
    case SpectrumType::XPS: {
        s.n_points = static_cast<int>(rng.uniform_int(800, 3000));
        const double window = rng.uniform(20, 40);
        s.x_lo = std::round(rng.uniform(50, 1100));
        s.x_hi = s.x_lo + window;
        const double top = rng.uniform(2000, 20000);
        add_simple_peaks(s, rng, static_cast<int>(rng.uniform_int(1, 4)), s.x_lo + 3, s.x_hi - 3, 0.8, 2.5, top, 0.1,
                         PeakShape::PseudoVoigt);
        s.baseline = {BaselineKind::Linear, rng.uniform(0.05, 0.3) * top, rng.uniform(0.05, 0.4) * top};
        s.noise_sigma = noise_for(rng, top);
        s.line_offset = 0.3 * top;
        break;
    }
    }
    validate(s);
    return s;
}

void to_json(nlohmann::json& j, const SynthSpec& s)
{
    nlohmann::json peaks = nlohmann::json::array();
    for (const auto& p : s.peaks) {
        nlohmann::json q{{"center", p.center}, {"height", p.height}, {"shape", to_string(p.shape)}};
        if (p.shape != PeakShape::Stick)
            q["width"] = p.width;
        if (p.shape == PeakShape::PseudoVoigt)
            q["eta"] = p.eta;
        peaks.push_back(std::move(q));
    }
    j = nlohmann::json{{"profile", kProfileVersion},
                       {"type", to_string(s.type)},
                       {"seed", s.seed},
                       {"n_points", s.n_points},
                       {"x_range", {s.x_lo, s.x_hi}},
                       {"n_lines", s.n_lines},
                       {"line_offset", s.line_offset},
                       {"noise_sigma", s.noise_sigma},
                       {"invert", s.invert},
                       {"smooth", s.smooth},
                       {"baseline",
                        {{"kind", to_string(s.baseline.kind)},
                         {"offset", s.baseline.offset},
                         {"slope", s.baseline.slope},
                         {"hump_height", s.baseline.hump_height},
                         {"hump_center", s.baseline.hump_center},
                         {"hump_width", s.baseline.hump_width}}},
                       {"peaks", std::move(peaks)}};
}

void to_json(nlohmann::json& j, const BatchQcReport& r)
{
    j = nlohmann::json{{"batch_size", r.batch_size}, {"sampled_fraction", r.sampled_fraction},
                       {"pass_count", r.pass_count}, {"fail_count", r.fail_count},
                       {"pass_rate", r.pass_rate},   {"accepted", r.accepted}};
}

GeneratedSample generate_sample(std::uint64_t batch_seed, std::size_t index, const BatchOptions& opts)
{
    GeneratedSample g;
    g.index = index;
    const SpectrumType t = opts.type ? *opts.type : kAllSpectrumTypes[index % kAllSpectrumTypes.size()];
    g.spec = sample_type_profile(t, splitmix64(batch_seed, index), opts.profile);
    g.curves = gen_spectrum(g.spec);
    return g;
}

namespace {

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

} // namespace

BatchResult run_batch(std::size_t count, double qc_fraction, const QcPredicate& predicate, const BatchOptions& opts)
{
    if (count < 1)
        throw Error(ErrorCode::InvalidConfig, "batch count must be at least 1");
    if (!(qc_fraction > 0 && qc_fraction <= 1))
        throw Error(ErrorCode::InvalidConfig, "qc fraction must lie in (0, 1]");
    if (opts.max_attempts < 1)
        throw Error(ErrorCode::InvalidConfig, "max attempts must be at least 1");

    BatchResult r;
    for (int attempt = 0; attempt < opts.max_attempts; ++attempt) {
        r.attempts = attempt + 1;
        r.batch_seed = splitmix64(opts.master_seed, static_cast<std::uint64_t>(attempt));
        r.dataset.assign(count, {});
        parallel_for(count, opts.workers, [&](std::size_t i) { r.dataset[i] = generate_sample(r.batch_seed, i, opts); });

        // partial Fisher-Yates over the sample indices
        const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(qc_fraction * double(count) - 1e-9)), 1, count);
        std::vector<std::size_t> order(count);
        for (std::size_t i = 0; i < count; ++i)
            order[i] = i;
        Rng pick(splitmix64(r.batch_seed, 0xC0C0C0C0ull));
        for (std::size_t i = 0; i < k; ++i)
            std::swap(order[i], order[static_cast<std::size_t>(pick.uniform_int(static_cast<long>(i), static_cast<long>(count - 1)))]);

        std::vector<char> pass(k, 0);
        parallel_for(k, opts.workers, [&](std::size_t i) { pass[i] = predicate(r.dataset[order[i]]) ? 1 : 0; });

        BatchQcReport& q = r.report;
        q.batch_size = count;
        q.sampled_fraction = double(k) / double(count);
        q.pass_count = static_cast<std::size_t>(std::count(pass.begin(), pass.end(), 1));
        q.fail_count = k - q.pass_count;
        q.pass_rate = double(q.pass_count) / double(k);
        q.accepted = q.pass_rate > 0.95;
        if (q.accepted)
            return r;
    }
    throw Error(ErrorCode::ExhaustedRetries, "no batch passed quality control in " + std::to_string(opts.max_attempts) +
                                                 " attempt(s); last pass rate " + std::to_string(r.report.pass_rate));
}

PipelineConfig training_pipeline_config(const SynthSpec& spec)
{
    PipelineConfig cfg;
    cfg.sampling.budget_fraction = 0.067;
    cfg.smooth = spec.smooth;
    cfg.stick = is_stick_type(spec.type);
    return cfg;
}

std::vector<SpectralCurve> answer_curves(const std::vector<SpectralCurve>& curves, const SynthSpec& spec, bool sampled)
{
    if (!sampled)
        return curves;
    const PipelineConfig cfg = training_pipeline_config(spec);
    std::vector<SpectralCurve> out;
    for (const auto& c : curves)
        out.push_back(run_pipeline(c, cfg).sample.merged.sampled);
    return out;
}

namespace {

double quantize2(double v)
{
    const std::string s = format_two_decimals(v);
    double q = 0;
    std::from_chars(s.data(), s.data() + s.size(), q);
    return q;
}

} // namespace

std::string emit_training_sample(const std::vector<SpectralCurve>& curves, const std::string& subplot_id,
                                 const std::string& image_path)
{
    if (curves.empty())
        throw Error(ErrorCode::EmptyAnswer, "training sample needs at least one curve");
    SubplotAnswer answer;
    answer.subplot_id = subplot_id;
    for (const auto& c : curves) {
        PointMatrix<double> q = c.points;
        q = q.unaryExpr([](double v) { return quantize2(v); });
        answer.lines.push_back(canonicalize(c.with_points(std::move(q))).curve);
    }
    nlohmann::json rec{{"conversations",
                        {{{"from", "human"}, {"value", "<image>Underlying data for subplot " + subplot_id + ":"}},
                         {{"from", "gpt"}, {"value", serialize_subplot(answer)}}}},
                       {"images", {image_path}}};
    return rec.dump();
}

bool default_qc_predicate(const GeneratedSample& s)
{
    for (const auto& p : s.spec.peaks)
        if (!(p.center >= s.spec.x_lo && p.center <= s.spec.x_hi))
            return false;
    for (const auto& c : s.curves)
        if (!c.points.allFinite() || c.size() != s.spec.n_points)
            return false;
    try {
        const auto rec = nlohmann::json::parse(emit_training_sample(answer_curves(s.curves, s.spec, true), "A", "qc.svg"));
        const auto parsed = parse_answer(rec["conversations"][1]["value"].get<std::string>());
        return parsed.diagnostics.warnings.empty() && parsed.subplots.size() == 1 &&
               parsed.subplots[0].lines.size() == s.curves.size();
    } catch (const Error&) {
        return false;
    }
}

std::vector<GeneratedSample> fidelity_suite(std::uint64_t master_seed, std::size_t per_type)
{
    std::vector<GeneratedSample> out;
    out.reserve(per_type * kAllSpectrumTypes.size());
    for (std::size_t t = 0; t < kAllSpectrumTypes.size(); ++t) {
        for (std::size_t i = 0; i < per_type; ++i) {
            GeneratedSample g;
            g.index = out.size();
            g.spec = sample_type_profile(kAllSpectrumTypes[t], splitmix64(master_seed, g.index));
            g.curves = gen_spectrum(g.spec);
            out.push_back(std::move(g));
        }
    }
    return out;
}

} // namespace specfid
