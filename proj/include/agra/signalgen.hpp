#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "agra/errors.hpp"
#include "agra/mat.hpp"
#include "agra/parallel.hpp"
#include "agra/rng.hpp"

namespace agra {

inline constexpr double kPi = 3.14159265358979323846;

// Sub-stream purposes hung off the corpus seed.
namespace stream {
inline constexpr std::uint64_t kIdeal = 1;
inline constexpr std::uint64_t kPerturb = 2;
inline constexpr std::uint64_t kSplit = 3;
}  // namespace stream

enum class Split { train, test };

inline std::string to_string(Split s) { return s == Split::train ? "train" : "test"; }

inline Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    throw std::invalid_argument("unknown split: " + s);
}

// A localized oscillatory bump added to one dimension of a signal.
struct Perturbation {
    int dim = 0;              // {0, 1}
    int center = 0;           // time index in [0, T)
    double width = 1.0;       // Gaussian envelope width, time steps
    double amplitude = 0.0;   // signed, nonzero
    double carrier_freq = 0;  // cycles per time step

    friend bool operator==(const Perturbation&, const Perturbation&) = default;
};

struct Example {
    int id = 0;
    Signal ideal;
    Signal perturbed;
    std::vector<Perturbation> perturbations;
    double score = 0.0;  // in [0, 10]
    Split split = Split::train;

    friend bool operator==(const Example&, const Example&) = default;
};

struct CorpusConfig {
    int n_examples = 1000;
    double train_fraction = 0.75;
    int signal_length = 700;  // T
    double period0 = 100.0;   // sinusoid period of dimension 0, samples
    double period1 = 160.0;   // sinusoid period of dimension 1, samples
    double base_noise_sigma = 0.02;
    int max_perturbations = 8;
    double amplitude_min = 0.5;  // |amplitude| range; sign drawn separately
    double amplitude_max = 1.5;
    double width_min = 3.0;
    double width_max = 8.0;
    double carrier_min = 0.15;
    double carrier_max = 0.35;
    // Score saturation constant M_ref: an MSE of score_ref_mse (or more) maps
    // to score 10. Default calibrated so the maximum-MSE example of the
    // default-seed 1000-example corpus lands at ~10.
    double score_ref_mse = 0.085;
    std::uint64_t seed = 1;

    void validate() const {
        if (n_examples <= 0) throw std::invalid_argument("n_examples must be > 0");
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            throw std::invalid_argument("train_fraction must be in (0, 1)");
        if (signal_length <= 0) throw std::invalid_argument("signal_length must be > 0");
        if (period0 <= 0.0 || period1 <= 0.0) throw std::invalid_argument("periods must be > 0");
        if (period0 == period1) throw std::invalid_argument("periods must differ");
        if (base_noise_sigma < 0.0) throw std::invalid_argument("base_noise_sigma must be >= 0");
        if (max_perturbations < 0) throw std::invalid_argument("max_perturbations must be >= 0");
        if (!(amplitude_min > 0.0 && amplitude_max >= amplitude_min))
            throw std::invalid_argument("bad amplitude range");
        if (!(width_min > 0.0 && width_max >= width_min))
            throw std::invalid_argument("bad width range");
        if (!(carrier_min > 0.0 && carrier_max >= carrier_min))
            throw std::invalid_argument("bad carrier range");
        if (score_ref_mse <= 0.0) throw std::invalid_argument("score_ref_mse must be > 0");
    }
};

struct Corpus {
    CorpusConfig config;
    std::vector<Example> examples;

    friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Two sinusoids with distinct periods plus white Gaussian noise.
inline Signal generate_ideal(const CorpusConfig& cfg, Rng& rng) {
    const int T = cfg.signal_length;
    Signal s(2, static_cast<std::size_t>(T));
    const double periods[2] = {cfg.period0, cfg.period1};
    for (int d = 0; d < 2; ++d) {
        double* row = s.row(d);
        for (int t = 0; t < T; ++t) {
            double v = std::sin(2.0 * kPi * t / periods[d]);
            if (cfg.base_noise_sigma > 0.0) v += rng.normal(0.0, cfg.base_noise_sigma);
            row[t] = v;
        }
    }
    return s;
}

inline double perturbation_term(const Perturbation& p, int t) {
    const double u = static_cast<double>(t) - static_cast<double>(p.center);
    return p.amplitude * std::exp(-u * u / (2.0 * p.width * p.width)) *
           std::sin(2.0 * kPi * p.carrier_freq * u);
}

// Draws 0..max_perturbations localized oscillatory bumps and adds them to a
// copy of the ideal signal. Returns the perturbed signal and the exact list.
inline std::pair<Signal, std::vector<Perturbation>> perturb(const Signal& ideal,
                                                            const CorpusConfig& cfg, Rng& rng) {
    const int T = cfg.signal_length;
    Signal out = ideal;
    const int k = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(cfg.max_perturbations) + 1));
    std::vector<Perturbation> applied;
    applied.reserve(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        Perturbation p;
        p.dim = static_cast<int>(rng.uniform_below(2));
        p.center = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(T)));
        double magnitude = rng.uniform(cfg.amplitude_min, cfg.amplitude_max);
        p.amplitude = rng.uniform() < 0.5 ? magnitude : -magnitude;
        p.width = rng.uniform(cfg.width_min, cfg.width_max);
        p.carrier_freq = rng.uniform(cfg.carrier_min, cfg.carrier_max);
        double* row = out.row(static_cast<std::size_t>(p.dim));
        for (int t = 0; t < T; ++t) row[t] += perturbation_term(p, t);
        applied.push_back(p);
    }
    return {std::move(out), std::move(applied)};
}

// Raw mean squared deviation over all 2T entries.
inline double signal_mse(const Signal& a, const Signal& b) {
    require_same_shape(a, b, "signal_mse");
    double acc = 0.0;
    const auto& da = a.data();
    const auto& db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) {
        double d = da[i] - db[i];
        acc += d * d;
    }
    return acc / static_cast<double>(da.size());
}

// Quality score in [0, 10]: linear in the MSE, saturating at score_ref_mse.
inline double score(const Signal& ideal, const Signal& perturbed, const CorpusConfig& cfg) {
    double m = signal_mse(perturbed, ideal);
    return std::min(10.0, 10.0 * m / cfg.score_ref_mse);
}

inline Example make_example(const CorpusConfig& cfg, int id, Split split) {
    Rng ideal_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(id), stream::kIdeal));
    Rng perturb_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(id), stream::kPerturb));
    Example e;
    e.id = id;
    e.split = split;
    e.ideal = generate_ideal(cfg, ideal_rng);
    auto [perturbed, applied] = perturb(e.ideal, cfg, perturb_rng);
    e.perturbed = std::move(perturbed);
    e.perturbations = std::move(applied);
    e.score = score(e.ideal, e.perturbed, cfg);
    return e;
}

// Deterministic in cfg alone. Each example owns sub-streams keyed by
// (seed, id), so any jobs count produces the identical corpus.
inline Corpus build_corpus(const CorpusConfig& cfg, int jobs = 1) {
    cfg.validate();
    const int n = cfg.n_examples;
    // Uniformly random split with exactly round(n * train_fraction) train ids.
    std::vector<Split> split(static_cast<std::size_t>(n), Split::test);
    {
        std::vector<int> ids(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
        Rng split_rng(derive_seed(cfg.seed, stream::kSplit));
        for (std::size_t i = ids.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(split_rng.uniform_below(i));
            std::swap(ids[i - 1], ids[j]);
        }
        auto n_train = static_cast<std::size_t>(
            std::llround(cfg.train_fraction * static_cast<double>(n)));
        for (std::size_t i = 0; i < n_train && i < ids.size(); ++i)
            split[static_cast<std::size_t>(ids[i])] = Split::train;
    }
    Corpus corpus;
    corpus.config = cfg;
    corpus.examples.resize(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), jobs, [&](std::size_t i) {
        corpus.examples[i] = make_example(cfg, static_cast<int>(i), split[i]);
    });
    return corpus;
}

inline std::size_t count_split(const Corpus& corpus, Split split) {
    std::size_t n = 0;
    for (const auto& e : corpus.examples)
        if (e.split == split) ++n;
    return n;
}

}  // namespace agra
