#pragma once

#include <string>
#include <utility>
#include <vector>

#include "latsep/types.hpp"

namespace latsep {

// One line of a signal dataset file (JSON lines, one object per line:
// {"id": string, "class": string, "samples": [real]}).
struct SignalRecord {
    std::string id;
    std::string class_name;
    Signal samples;
};

// One line of a token dataset file ({"id": string, "class": string,
// "tokens": [int]}).
struct TokenRecord {
    std::string id;
    std::string class_name;
    TokenSeq tokens;
};

std::vector<SignalRecord> read_signal_dataset(const std::string& path);
void write_signal_dataset(const std::vector<SignalRecord>& records,
                          const std::string& path);

std::vector<TokenRecord> read_token_dataset(const std::string& path);
void write_token_dataset(const std::vector<TokenRecord>& records,
                         const std::string& path);

// Consecutive lines (2i, 2i+1) of a signal dataset form pair i.
std::vector<std::pair<Signal, Signal>> read_signal_pairs(const std::string& path);

// Single-signal JSON file {"id": string, "samples": [real]}.
SignalRecord read_signal_file(const std::string& path);
void write_signal_file(const SignalRecord& record, const std::string& path);

// Whole-file helpers; both throw ModelError on I/O failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& text, const std::string& path);

}  // namespace latsep
