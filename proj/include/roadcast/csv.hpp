#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

namespace roadcast::csv {

/// RFC-4180-style CSV reader: comma separated, double quotes for fields
/// containing commas/quotes/newlines, "" escapes a quote. Keeps the header
/// and resolves columns by name.
class Reader {
public:
    explicit Reader(std::istream& in);

    const std::vector<std::string>& header() const { return header_; }

    /// Column index by name; -1 if absent.
    int column(const std::string& name) const;

    /// Reads the next record into fields. Returns false at EOF.
    /// line() reports the 1-based physical line the record started on.
    bool next(std::vector<std::string>& fields);
    std::size_t line() const { return record_line_; }

private:
    bool read_record(std::vector<std::string>& fields);

    std::istream& in_;
    std::vector<std::string> header_;
    std::unordered_map<std::string, int> columns_;
    std::size_t line_ = 0;
    std::size_t record_line_ = 0;
};

/// Quotes a field if needed and writes one row.
void write_row(std::ostream& out, const std::vector<std::string>& fields);

std::string quote_if_needed(const std::string& field);

/// Shortest round-trip decimal text for a double (std::to_chars).
std::string format_double(double v);

}  // namespace roadcast::csv
