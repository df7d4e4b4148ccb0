/// @file record_io.cpp
/// @brief Line-delimited JSON exam streams, schema documents and fingerprints

#include "mmc/record_io.h"

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "mmc/error.h"

namespace mmc {

using json = nlohmann::json;

json SchemaToJson(const FeatureSchema& schema) {
    json j;
    j["categorical"] = json::array();
    for (const auto& f : schema.categorical) {
        j["categorical"].push_back(
            {{"name", f.name}, {"categories", f.categories}, {"allow_missing", f.allow_missing}});
    }
    j["continuous"] = json::array();
    for (const auto& f : schema.continuous) {
        j["continuous"].push_back({{"name", f.name}, {"unit", f.unit}});
    }
    j["latent_dim"] = schema.latent_dim;
    j["labels"] = schema.labels;
    return j;
}

FeatureSchema SchemaFromJson(const json& j) {
    FeatureSchema schema;
    try {
        for (const auto& f : j.at("categorical")) {
            schema.categorical.push_back({f.at("name").get<std::string>(),
                                          f.at("categories").get<std::vector<std::string>>(),
                                          f.value("allow_missing", true)});
        }
        for (const auto& f : j.at("continuous")) {
            schema.continuous.push_back(
                {f.at("name").get<std::string>(), f.value("unit", std::string())});
        }
        schema.latent_dim = j.at("latent_dim").get<int>();
        schema.labels = j.at("labels").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kParse, std::string("schema: ") + e.what());
    }
    schema.Validate();
    return schema;
}

json RecordToJson(const ExamRecord& record, const FeatureSchema& schema) {
    json j;
    j["exam_id"] = record.exam_id;
    j["timestamp"] = record.timestamp.ToString();
    json cat = json::object();
    for (std::size_t i = 0; i < schema.categorical.size() && i < record.categorical.size(); ++i) {
        const auto& v = record.categorical[i];
        cat[schema.categorical[i].name] = v ? json(*v) : json(nullptr);
    }
    j["categorical"] = std::move(cat);
    json cont = json::object();
    for (std::size_t i = 0; i < schema.continuous.size() && i < record.continuous.size(); ++i) {
        const auto& v = record.continuous[i];
        cont[schema.continuous[i].name] = v ? json(*v) : json(nullptr);
    }
    j["continuous"] = std::move(cont);
    j["latent"] = record.latent;
    j["predictions"] = record.predictions;
    if (record.HasGroundTruth()) {
        json gt = json::array();
        for (LabelState s : record.ground_truth) {
            if (s == LabelState::kUnknown) {
                gt.push_back(nullptr);
            } else {
                gt.push_back(s == LabelState::kPositive ? 1 : 0);
            }
        }
        j["ground_truth"] = std::move(gt);
    }
    return j;
}

ExamRecord RecordFromJson(const json& j, const FeatureSchema& schema) {
    ExamRecord r;
    try {
        r.exam_id = j.at("exam_id").get<std::string>();
        r.timestamp = Timestamp::Parse(j.at("timestamp").get<std::string>());
        const json& cat = j.at("categorical");
        for (const auto& f : schema.categorical) {
            auto it = cat.find(f.name);
            if (it == cat.end() || it->is_null()) {
                r.categorical.emplace_back(std::nullopt);
            } else {
                r.categorical.emplace_back(it->get<std::string>());
            }
        }
        const json& cont = j.at("continuous");
        for (const auto& f : schema.continuous) {
            auto it = cont.find(f.name);
            if (it == cont.end() || it->is_null()) {
                r.continuous.emplace_back(std::nullopt);
            } else {
                r.continuous.emplace_back(it->get<double>());
            }
        }
        r.latent = j.at("latent").get<std::vector<double>>();
        r.predictions = j.at("predictions").get<std::vector<double>>();
        if (auto it = j.find("ground_truth"); it != j.end() && !it->is_null()) {
            for (const auto& v : *it) {
                if (v.is_null()) {
                    r.ground_truth.push_back(LabelState::kUnknown);
                } else {
                    int b = v.is_boolean() ? (v.get<bool>() ? 1 : 0) : v.get<int>();
                    if (b != 0 && b != 1) {
                        throw Error(ErrorCode::kSchemaViolation, "ground_truth must be 0/1/null");
                    }
                    r.ground_truth.push_back(b ? LabelState::kPositive : LabelState::kNegative);
                }
            }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kParse, std::string("exam record: ") + e.what());
    }
    ValidateRecord(r, schema);
    return r;
}

std::string RecordToLine(const ExamRecord& record, const FeatureSchema& schema) {
    return RecordToJson(record, schema).dump();
}

std::vector<ExamRecord> ReadStream(const std::string& path, const FeatureSchema& schema) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::kIo, "cannot open stream '" + path + "'");
    }
    std::vector<ExamRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::kParse,
                        path + ":" + std::to_string(line_no) + ": " + e.what());
        }
        records.push_back(RecordFromJson(j, schema));
    }
    return records;
}

void WriteStream(const std::string& path, const std::vector<ExamRecord>& records,
                 const FeatureSchema& schema) {
    std::string out;
    for (const auto& r : records) {
        out += RecordToLine(r, schema);
        out += '\n';
    }
    WriteFileAtomic(path, out);
}

FeatureSchema ReadSchema(const std::string& path) {
    try {
        return SchemaFromJson(json::parse(ReadFile(path)));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::kParse, path + ": " + e.what());
    }
}

void WriteSchema(const std::string& path, const FeatureSchema& schema) {
    WriteFileAtomic(path, SchemaToJson(schema).dump(2) + "\n");
}

std::string SchemaSidecarPath(const std::string& stream_path) {
    return stream_path + ".schema.json";
}

void WriteFileAtomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::kIo, "cannot write '" + tmp + "'");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw Error(ErrorCode::kIo, "write failed for '" + tmp + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorCode::kIo, "cannot rename into '" + path + "'");
    }
}

std::string ReadFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string Fingerprint(std::span<const ExamRecord> exams) {
    if (exams.empty()) {
        throw Error(ErrorCode::kEmptyInput, "cannot fingerprint an empty exam list");
    }
    // Canonical form is independent of the schema: names are not needed
    // because metadata vectors are already in schema order.
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                                 &EVP_MD_CTX_free);
    EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
    for (const auto& r : exams) {
        json j;
        j["id"] = r.exam_id;
        j["ts"] = r.timestamp.ToString();
        json cat = json::array();
        for (const auto& v : r.categorical) cat.push_back(v ? json(*v) : json(nullptr));
        json cont = json::array();
        for (const auto& v : r.continuous) cont.push_back(v ? json(*v) : json(nullptr));
        j["c"] = std::move(cat);
        j["x"] = std::move(cont);
        j["z"] = r.latent;
        j["p"] = r.predictions;
        json gt = json::array();
        for (LabelState s : r.ground_truth) gt.push_back(static_cast<int>(s));
        j["y"] = std::move(gt);
        std::string line = j.dump();
        line += '\n';
        EVP_DigestUpdate(ctx.get(), line.data(), line.size());
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest, &len);
    std::string hex;
    hex.reserve(2 * len);
    static constexpr char kHex[] = "0123456789abcdef";
    for (unsigned int i = 0; i < len; ++i) {
        hex += kHex[digest[i] >> 4];
        hex += kHex[digest[i] & 0xF];
    }
    return "sha256:" + hex;
}

}  // namespace mmc
