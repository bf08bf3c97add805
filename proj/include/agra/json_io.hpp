#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "agra/checksum.hpp"
#include "agra/errors.hpp"
#include "agra/mat.hpp"

namespace agra {

using Json = nlohmann::ordered_json;

// Every artifact is a JSON document {kind, format_version, checksum, payload}
// where checksum covers the serialized payload. Key order is fixed, floats
// use shortest round-trip encoding, so equal data means equal bytes.
inline std::string envelope_to_string(const std::string& kind, int version, const Json& payload) {
    std::string body = payload.dump();
    Json doc;
    doc["kind"] = kind;
    doc["format_version"] = version;
    doc["checksum"] = checksum_hex(body);
    doc["payload"] = payload;
    return doc.dump(1);
}

inline void write_envelope(const std::filesystem::path& path, const std::string& kind, int version,
                           const Json& payload) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << envelope_to_string(kind, version, payload) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

struct Envelope {
    std::string checksum;
    Json payload;
};

inline Envelope read_envelope(const std::filesystem::path& path, const std::string& kind,
                              int expected_version) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    Json doc;
    try {
        doc = Json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw IoError("parse error in " + path.string() + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("kind") || !doc.contains("format_version") ||
        !doc.contains("checksum") || !doc.contains("payload"))
        throw IoError("not an artifact file: " + path.string());
    if (doc["kind"].get<std::string>() != kind)
        throw IntegrityError("expected kind '" + kind + "', found '" +
                             doc["kind"].get<std::string>() + "' in " + path.string());
    if (doc["format_version"].get<int>() != expected_version)
        throw IntegrityError("unsupported format_version " +
                             std::to_string(doc["format_version"].get<int>()) + " in " +
                             path.string());
    Envelope env;
    env.payload = doc["payload"];
    env.checksum = doc["checksum"].get<std::string>();
    if (checksum_hex(env.payload.dump()) != env.checksum)
        throw IntegrityError("checksum mismatch in " + path.string());
    return env;
}

inline Json mat_to_json(const Mat& m) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Mat mat_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw IoError("matrix: expected nonempty array");
    std::size_t rows = j.size();
    std::size_t cols = j[0].size();
    Mat m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (j[r].size() != cols) throw IoError("matrix: ragged rows");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

inline Json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

inline double double_or_nan(const Json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

}  // namespace agra
