#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tripcast::csv {

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_line(std::string_view line);

std::string escape(std::string_view field);

/// Shortest representation that parses back to the identical double.
/// Non-finite values format as "nan", "inf" or "-inf".
std::string format_double(double v);

std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int64(std::string_view s);

std::string_view trim(std::string_view s);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  /// Column position by name, or nullopt.
  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name, std::string_view what) const;
};

/// Reads a headered CSV; blank lines are skipped. Throws DataError when the
/// stream fails.
Table read(std::istream& in);
Table read_file(const std::string& path);

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  Writer& field(std::string_view s);
  Writer& field(double v);
  Writer& field(std::int64_t v);
  Writer& field(int v) { return field(static_cast<std::int64_t>(v)); }
  Writer& field(std::size_t v) { return field(static_cast<std::int64_t>(v)); }
  /// Writes an empty field.
  Writer& blank();
  void end_row();

  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
  bool first_ = true;
};

}  // namespace tripcast::csv
