#include "gwrkit/csv.hpp"

#include "gwrkit/error.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace gwrkit::csv {

std::vector<Record> parse(std::string_view text) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

    std::vector<Record> records;
    Record current;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool record_has_content = false;

    auto finish_field = [&] {
        current.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
    };
    auto finish_record = [&] {
        finish_field();
        records.push_back(std::move(current));
        current.clear();
        record_has_content = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!field.empty() || field_was_quoted)
                throw DataError("csv: stray quote inside unquoted field at offset " + std::to_string(i));
            in_quotes = true;
            field_was_quoted = true;
            record_has_content = true;
            break;
        case ',':
            finish_field();
            record_has_content = true;
            break;
        case '\r':
            if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
            [[fallthrough]];
        case '\n':
            finish_record();
            break;
        default:
            if (field_was_quoted)
                throw DataError("csv: characters after closing quote at offset " + std::to_string(i));
            field.push_back(c);
            record_has_content = true;
        }
    }
    if (in_quotes) throw DataError("csv: unterminated quoted field");
    if (record_has_content || !field.empty()) finish_record();
    return records;
}

std::vector<Record> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::optional<double> parse_number(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0"; // folds -0 as well
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

void Writer::separator() {
    if (!at_row_start_) out_ << ',';
    at_row_start_ = false;
}

Writer& Writer::field(std::string_view text) {
    separator();
    out_ << escape(text);
    return *this;
}

Writer& Writer::field(double value) {
    separator();
    out_ << format_number(value);
    return *this;
}

Writer& Writer::field(long long value) {
    separator();
    out_ << value;
    return *this;
}

Writer& Writer::empty() {
    separator();
    return *this;
}

void Writer::end_row() {
    out_ << '\n';
    at_row_start_ = true;
}

void Writer::row(const std::vector<std::string>& fields) {
    for (const auto& f : fields) field(f);
    end_row();
}

} // namespace gwrkit::csv
