#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace oscifd {

/// RFC-4180 CSV writer with deterministic float formatting: 17 significant
/// digits ('.' decimal), which round-trips doubles exactly.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    static std::string format(double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return buf;
    }

    /// Quote a text field when RFC-4180 requires it.
    static std::string quote(const std::string& s) {
        if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            q += c;
            if (c == '"') q += '"';
        }
        q += '"';
        return q;
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << "\r\n";
    }

private:
    std::ostream& out_;
};

} // namespace oscifd
