#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gwrkit::csv {

using Record = std::vector<std::string>;

/// Parses RFC-4180 text: quoted fields, doubled quotes, CRLF or LF line
/// endings, embedded newlines inside quotes. A trailing newline does not
/// produce an empty record. A UTF-8 byte-order mark is skipped.
std::vector<Record> parse(std::string_view text);

std::vector<Record> read_file(const std::filesystem::path& path);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

std::optional<double> parse_number(std::string_view text);

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

/// Row-oriented writer. Lines end with LF; output is byte-deterministic.
class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    Writer& field(std::string_view text);
    Writer& field(double value);
    Writer& field(long long value);
    Writer& field(std::size_t value) { return field(static_cast<long long>(value)); }
    Writer& field(int value) { return field(static_cast<long long>(value)); }
    Writer& empty();
    void end_row();

    void row(const std::vector<std::string>& fields);

private:
    void separator();

    std::ostream& out_;
    bool at_row_start_ = true;
};

} // namespace gwrkit::csv
