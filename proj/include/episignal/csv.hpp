#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace episignal::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line of each row, for error messages.
  std::vector<std::size_t> lines;

  /// Index of a header column, or -1.
  int column(const std::string& name) const;
};

/// RFC-4180-ish reader: comma separated, double-quote quoting, optional UTF-8 BOM.
/// Blank lines are skipped. Throws Io if the file cannot be opened.
Table read(const std::filesystem::path& path);
Table parse(const std::string& text);

/// Quotes a field when it contains a comma, quote or newline.
std::string escape(const std::string& field);

}  // namespace episignal::csv
