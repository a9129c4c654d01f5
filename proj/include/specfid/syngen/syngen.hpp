#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "specfid/core/curve.hpp"
#include "specfid/core/spectrum_type.hpp"
#include "specfid/reconstruct/pipeline.hpp"

namespace specfid {

inline constexpr std::string_view kProfileVersion = "profile_v1";

enum class PeakShape { Gaussian, Lorentzian, PseudoVoigt, Stick };
enum class BaselineKind { Flat, Linear, BroadHump };

std::string_view to_string(PeakShape s) noexcept;
std::string_view to_string(BaselineKind b) noexcept;

/// width is the full width at half maximum; eta is the Lorentzian share of a
/// pseudo-Voigt.
struct Peak {
    double center = 0;
    double height = 1;
    double width = 1;
    PeakShape shape = PeakShape::Gaussian;
    double eta = 0.5;
};

/// offset + slope*t (t in [0, 1] across x_range) + a Gaussian hump.
struct Baseline {
    BaselineKind kind = BaselineKind::Flat;
    double offset = 0;
    double slope = 0;
    double hump_height = 0;
    double hump_center = 0;
    double hump_width = 1;
};

struct SynthSpec {
    SpectrumType type = SpectrumType::UVVis;
    std::uint64_t seed = 0;
    int n_points = 1000;
    std::vector<Peak> peaks;
    Baseline baseline;
    double noise_sigma = 0;
    double x_lo = 0, x_hi = 1;
    int n_lines = 1;
    double line_offset = 0; // vertical shift between consecutive lines
    bool invert = false;    // transmittance-style: y = invert_top - signal
    double invert_top = 100;
    bool smooth = true;     // pipeline hint; off for stick spectra
};

/// Throws InvalidSpec when a field is out of range.
void validate(const SynthSpec& spec);

double peak_value(const Peak& p, double x);

/// n_lines curves on a uniform grid. Line k > 0 rescales each peak by a
/// factor drawn from the SynthSpec seed and is shifted by k * line_offset.
std::vector<SpectralCurve> gen_spectrum(const SynthSpec& spec);

struct ProfileOptions {
    int max_lines = 1;
};

/// One draw from the type's profile_v1 distribution.
SynthSpec sample_type_profile(SpectrumType type, std::uint64_t seed, const ProfileOptions& opts = {});

void to_json(nlohmann::json& j, const SynthSpec& s);

struct GeneratedSample {
    std::size_t index = 0;
    SynthSpec spec;
    std::vector<SpectralCurve> curves;
};

struct BatchQcReport {
    std::size_t batch_size = 0;
    double sampled_fraction = 0;
    std::size_t pass_count = 0;
    std::size_t fail_count = 0;
    double pass_rate = 0;
    bool accepted = false;
};

void to_json(nlohmann::json& j, const BatchQcReport& r);

using QcPredicate = std::function<bool(const GeneratedSample&)>;

struct BatchOptions {
    std::uint64_t master_seed = 2024;
    std::optional<SpectrumType> type; // cycle through all seven when unset
    ProfileOptions profile;
    int max_attempts = 5;
    unsigned workers = 1;
};

struct BatchResult {
    std::vector<GeneratedSample> dataset;
    BatchQcReport report;
    int attempts = 0;
    std::uint64_t batch_seed = 0;
};

/// Sample i of a batch: type (fixed, or cycling), seed splitmix64(batch_seed, i).
GeneratedSample generate_sample(std::uint64_t batch_seed, std::size_t index, const BatchOptions& opts);

/// Generates `count` samples, checks a random qc_fraction subset with the
/// predicate and accepts the batch when the pass rate exceeds 0.95. A
/// rejected batch is discarded and regenerated from a fresh batch seed;
/// ExhaustedRetries after max_attempts.
BatchResult run_batch(std::size_t count, double qc_fraction, const QcPredicate& predicate, const BatchOptions& opts = {});

/// Finite values, peak centers inside the range, and a clean wire round trip
/// of the training answer.
bool default_qc_predicate(const GeneratedSample& s);

/// Pipeline settings used for training answers and the fidelity suite.
PipelineConfig training_pipeline_config(const SynthSpec& spec);

/// Curves as they appear in a training answer: pipeline-sampled points when
/// `sampled`, every point otherwise.
std::vector<SpectralCurve> answer_curves(const std::vector<SpectralCurve>& curves, const SynthSpec& spec, bool sampled);

/// {"conversations": [human, gpt], "images": [image_path]} as compact JSON.
/// Values are quantized to two decimals and re-canonicalized first so the
/// answer re-parses without warnings.
std::string emit_training_sample(const std::vector<SpectralCurve>& curves, const std::string& subplot_id,
                                 const std::string& image_path);

/// Single-line curves, `per_type` for each of the seven types, seeded from master_seed.
std::vector<GeneratedSample> fidelity_suite(std::uint64_t master_seed, std::size_t per_type = 100);

} // namespace specfid
