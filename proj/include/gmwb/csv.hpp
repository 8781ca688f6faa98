#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

namespace gmwb {

using CsvField = std::variant<double, long long, std::string>;

/// RFC 4180 writer: CRLF rows, fields quoted only when needed, doubles at
/// 17 significant digits so values round-trip.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void row(const std::vector<CsvField>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << format(fields[i]);
        }
        out_ << "\r\n";
        ++rows_;
    }

    std::size_t rows() const { return rows_; }

    static std::string format(const CsvField& f) {
        if (const auto* d = std::get_if<double>(&f)) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", *d);
            return buf;
        }
        if (const auto* i = std::get_if<long long>(&f)) return std::to_string(*i);
        return quote(std::get<std::string>(f));
    }

    static std::string quote(const std::string& s) {
        if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + '"';
    }

private:
    std::ostream& out_;
    std::size_t rows_ = 0;
};

}  // namespace gmwb
