#include "latsep/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace latsep {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError(path + ": cannot open for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& text, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ModelError(path + ": cannot open for writing");
    out << text;
    if (!out) throw ModelError(path + ": write failed");
}

namespace {

void validate_samples(const Signal& samples, const std::string& where) {
    if (samples.empty()) throw ModelError(where + ": empty samples");
    for (double v : samples) {
        if (!std::isfinite(v)) throw ModelError(where + ": non-finite sample");
    }
}

template <typename Record, typename FromJson>
std::vector<Record> read_jsonl(const std::string& path, FromJson from_json) {
    std::ifstream in(path);
    if (!in) throw ModelError(path + ": cannot open for reading");
    std::vector<Record> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            records.push_back(from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ModelError(path + ":" + std::to_string(lineno) + ": malformed line (" +
                             e.what() + ")");
        }
    }
    return records;
}

}  // namespace

std::vector<SignalRecord> read_signal_dataset(const std::string& path) {
    auto records = read_jsonl<SignalRecord>(path, [&](const nlohmann::json& j) {
        SignalRecord r;
        r.id = j.at("id").get<std::string>();
        r.class_name = j.value("class", "");
        r.samples = j.at("samples").get<Signal>();
        return r;
    });
    for (const auto& r : records) validate_samples(r.samples, path + " id=" + r.id);
    return records;
}

void write_signal_dataset(const std::vector<SignalRecord>& records,
                          const std::string& path) {
    std::string out;
    for (const auto& r : records) {
        nlohmann::json j;
        j["id"] = r.id;
        j["class"] = r.class_name;
        j["samples"] = r.samples;
        out += j.dump();
        out += '\n';
    }
    write_text_file(out, path);
}

std::vector<TokenRecord> read_token_dataset(const std::string& path) {
    return read_jsonl<TokenRecord>(path, [](const nlohmann::json& j) {
        TokenRecord r;
        r.id = j.at("id").get<std::string>();
        r.class_name = j.value("class", "");
        r.tokens = j.at("tokens").get<TokenSeq>();
        return r;
    });
}

void write_token_dataset(const std::vector<TokenRecord>& records,
                         const std::string& path) {
    std::string out;
    for (const auto& r : records) {
        nlohmann::json j;
        j["id"] = r.id;
        j["class"] = r.class_name;
        j["tokens"] = r.tokens;
        out += j.dump();
        out += '\n';
    }
    write_text_file(out, path);
}

std::vector<std::pair<Signal, Signal>> read_signal_pairs(const std::string& path) {
    const auto records = read_signal_dataset(path);
    if (records.size() % 2 != 0) {
        throw ModelError(path + ": paired dataset has an odd number of lines");
    }
    std::vector<std::pair<Signal, Signal>> pairs;
    pairs.reserve(records.size() / 2);
    for (std::size_t i = 0; i + 1 < records.size(); i += 2) {
        pairs.emplace_back(records[i].samples, records[i + 1].samples);
    }
    return pairs;
}

SignalRecord read_signal_file(const std::string& path) {
    try {
        const nlohmann::json j = nlohmann::json::parse(read_text_file(path));
        SignalRecord r;
        r.id = j.value("id", "");
        r.class_name = j.value("class", "");
        r.samples = j.at("samples").get<Signal>();
        validate_samples(r.samples, path);
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(path + ": malformed signal file (" + e.what() + ")");
    }
}

void write_signal_file(const SignalRecord& record, const std::string& path) {
    nlohmann::json j;
    j["id"] = record.id;
    j["class"] = record.class_name;
    j["samples"] = record.samples;
    write_text_file(j.dump(2) + "\n", path);
}

}  // namespace latsep
