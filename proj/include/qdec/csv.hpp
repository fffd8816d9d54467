// Copyright 2026 The qdec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <vector>

namespace qdec {

/// Shortest round-trip decimal form; locale independent, always '.'.
inline std::string format_number(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

inline std::string format_number(std::int64_t x) { return std::to_string(x); }
inline std::string format_number(int x) { return std::to_string(x); }
inline std::string format_number(std::uint64_t x) { return std::to_string(x); }

/// Minimal in-memory CSV table: header row plus numeric or text cells.
class CsvTable {
   public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    CsvTable &row() {
        rows_.emplace_back();
        return *this;
    }
    template <typename T>
    CsvTable &cell(T v) {
        rows_.back().push_back(format_number(v));
        return *this;
    }
    CsvTable &text(const std::string &s) {
        rows_.back().push_back(s);
        return *this;
    }

    const std::vector<std::string> &header() const { return header_; }
    std::size_t size() const { return rows_.size(); }

    std::string str() const {
        std::string out;
        append_line(out, header_);
        for (const auto &r : rows_) {
            append_line(out, r);
        }
        return out;
    }

   private:
    static void append_line(std::string &out, const std::vector<std::string> &cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) {
                out += ',';
            }
            out += cells[k];
        }
        out += '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace qdec
