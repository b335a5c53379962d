#include "roadcast/csv.hpp"

#include <charconv>

namespace roadcast::csv {

Reader::Reader(std::istream& in) : in_(in) {
    std::vector<std::string> h;
    if (read_record(h)) {
        header_ = h;
        for (std::size_t i = 0; i < h.size(); ++i) columns_[h[i]] = static_cast<int>(i);
    }
}

int Reader::column(const std::string& name) const {
    auto it = columns_.find(name);
    return it == columns_.end() ? -1 : it->second;
}

bool Reader::next(std::vector<std::string>& fields) { return read_record(fields); }

bool Reader::read_record(std::vector<std::string>& fields) {
    fields.clear();
    int c = in_.get();
    if (c == EOF) return false;
    ++line_;
    record_line_ = line_;
    std::string cur;
    bool quoted = false;
    bool any = false;
    while (true) {
        if (c == EOF) {
            if (!any && cur.empty() && fields.empty()) return false;
            fields.push_back(cur);
            return true;
        }
        char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                int nx = in_.peek();
                if (nx == '"') {
                    cur.push_back('"');
                    in_.get();
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line_;
                cur.push_back(ch);
            }
        } else if (ch == '"' && cur.empty()) {
            quoted = true;
            any = true;
        } else if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
            any = true;
        } else if (ch == '\r') {
            // swallow; handled by the following '\n' if present
        } else if (ch == '\n') {
            fields.push_back(cur);
            return true;
        } else {
            cur.push_back(ch);
            any = true;
        }
        c = in_.get();
    }
}

std::string quote_if_needed(const std::string& f) {
    bool needs = false;
    for (char ch : f) {
        if (ch == ',' || ch == '"' || ch == '\n' || ch == '\r') {
            needs = true;
            break;
        }
    }
    if (!needs) return f;
    std::string out = "\"";
    for (char ch : f) {
        if (ch == '"') out += "\"\"";
        else out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.put(',');
        out << quote_if_needed(fields[i]);
    }
    out.put('\n');
}

std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace roadcast::csv
