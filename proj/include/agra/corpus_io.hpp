#pragma once

#include <filesystem>
#include <string>

#include "agra/json_io.hpp"
#include "agra/signalgen.hpp"

namespace agra {

inline constexpr int kCorpusFormatVersion = 1;
inline constexpr const char* kCorpusKind = "agra-corpus";

inline Json corpus_config_to_json(const CorpusConfig& c) {
    Json j;
    j["n_examples"] = c.n_examples;
    j["train_fraction"] = c.train_fraction;
    j["signal_length"] = c.signal_length;
    j["period0"] = c.period0;
    j["period1"] = c.period1;
    j["base_noise_sigma"] = c.base_noise_sigma;
    j["max_perturbations"] = c.max_perturbations;
    j["amplitude_min"] = c.amplitude_min;
    j["amplitude_max"] = c.amplitude_max;
    j["width_min"] = c.width_min;
    j["width_max"] = c.width_max;
    j["carrier_min"] = c.carrier_min;
    j["carrier_max"] = c.carrier_max;
    j["score_ref_mse"] = c.score_ref_mse;
    j["seed"] = c.seed;
    return j;
}

inline CorpusConfig corpus_config_from_json(const Json& j) {
    CorpusConfig c;
    c.n_examples = j.at("n_examples").get<int>();
    c.train_fraction = j.at("train_fraction").get<double>();
    c.signal_length = j.at("signal_length").get<int>();
    c.period0 = j.at("period0").get<double>();
    c.period1 = j.at("period1").get<double>();
    c.base_noise_sigma = j.at("base_noise_sigma").get<double>();
    c.max_perturbations = j.at("max_perturbations").get<int>();
    c.amplitude_min = j.at("amplitude_min").get<double>();
    c.amplitude_max = j.at("amplitude_max").get<double>();
    c.width_min = j.at("width_min").get<double>();
    c.width_max = j.at("width_max").get<double>();
    c.carrier_min = j.at("carrier_min").get<double>();
    c.carrier_max = j.at("carrier_max").get<double>();
    c.score_ref_mse = j.at("score_ref_mse").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

inline Json corpus_payload(const Corpus& corpus) {
    Json j;
    j["config"] = corpus_config_to_json(corpus.config);
    Json examples = Json::array();
    for (const auto& e : corpus.examples) {
        Json je;
        je["id"] = e.id;
        je["split"] = to_string(e.split);
        je["score"] = e.score;
        Json perts = Json::array();
        for (const auto& p : e.perturbations) {
            Json jp;
            jp["dim"] = p.dim;
            jp["center"] = p.center;
            jp["width"] = p.width;
            jp["amplitude"] = p.amplitude;
            jp["carrier_freq"] = p.carrier_freq;
            perts.push_back(std::move(jp));
        }
        je["perturbations"] = std::move(perts);
        je["ideal"] = mat_to_json(e.ideal);
        je["perturbed"] = mat_to_json(e.perturbed);
        examples.push_back(std::move(je));
    }
    j["examples"] = std::move(examples);
    return j;
}

// Stable content id other artifacts record to prove lineage.
inline std::string corpus_checksum(const Corpus& corpus) {
    return checksum_hex(corpus_payload(corpus).dump());
}

inline void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    write_envelope(path, kCorpusKind, kCorpusFormatVersion, corpus_payload(corpus));
}

inline Corpus load_corpus(const std::filesystem::path& path) {
    Envelope env = read_envelope(path, kCorpusKind, kCorpusFormatVersion);
    Corpus corpus;
    corpus.config = corpus_config_from_json(env.payload.at("config"));
    corpus.config.validate();
    const int T = corpus.config.signal_length;
    for (const auto& je : env.payload.at("examples")) {
        Example e;
        e.id = je.at("id").get<int>();
        e.split = split_from_string(je.at("split").get<std::string>());
        e.score = je.at("score").get<double>();
        for (const auto& jp : je.at("perturbations")) {
            Perturbation p;
            p.dim = jp.at("dim").get<int>();
            p.center = jp.at("center").get<int>();
            p.width = jp.at("width").get<double>();
            p.amplitude = jp.at("amplitude").get<double>();
            p.carrier_freq = jp.at("carrier_freq").get<double>();
            e.perturbations.push_back(p);
        }
        e.ideal = mat_from_json(je.at("ideal"));
        e.perturbed = mat_from_json(je.at("perturbed"));
        if (e.ideal.rows() != 2 || e.ideal.cols() != static_cast<std::size_t>(T) ||
            !e.perturbed.same_shape(e.ideal))
            throw IntegrityError("corpus example " + std::to_string(e.id) + ": bad signal shape");
        if (!e.ideal.all_finite() || !e.perturbed.all_finite())
            throw IntegrityError("corpus example " + std::to_string(e.id) + ": non-finite values");
        corpus.examples.push_back(std::move(e));
    }
    return corpus;
}

}  // namespace agra
