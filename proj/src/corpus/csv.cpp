#include "emoperf/csv.hpp"

#include "emoperf/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace emoperf::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_line(std::string_view line, const std::string& where) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.emplace_back(was_quoted ? current : std::string(trim(current)));
            current.clear();
            was_quoted = false;
        } else {
            current.push_back(c);
        }
    }
    if (quoted) throw InputError(where + ": unterminated quoted field");
    fields.emplace_back(was_quoted ? current : std::string(trim(current)));
    return fields;
}

}  // namespace

std::optional<std::size_t> Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    return std::nullopt;
}

Table parse(std::string_view text, const std::string& source_name) {
    Table table;
    bool have_header = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
        const std::string_view stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') {
            if (end == text.size()) break;
            continue;
        }
        const std::string where = source_name + ":" + std::to_string(line_no);
        auto fields = split_line(line, where);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
        } else {
            if (fields.size() != table.header.size()) {
                throw InputError(where + " ('" + fields.front() + "'): expected " +
                                 std::to_string(table.header.size()) + " fields, found " + std::to_string(fields.size()));
            }
            table.rows.push_back(std::move(fields));
            table.line_numbers.push_back(line_no);
        }
        if (end == text.size()) break;
    }
    if (!have_header) throw InputError(source_name + ": missing header row");
    return table;
}

Table read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path.string());
}

double parse_real(std::string_view text, const std::string& context) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        throw InputError(context + ": not a number: '" + std::string(text) + "'");
    }
    if (!std::isfinite(value)) throw InputError(context + ": non-finite value '" + std::string(text) + "'");
    return value;
}

long long parse_int(std::string_view text, const std::string& context) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        throw InputError(context + ": not an integer: '" + std::string(text) + "'");
    }
    return value;
}

std::string format_real(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string join_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += escape(fields[i]);
    }
    return out;
}

}  // namespace emoperf::csv
