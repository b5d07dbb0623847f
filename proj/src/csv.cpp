#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tneb/dataset.hpp"

namespace tneb {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_double(const std::string& field, std::size_t row) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (!field.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || field.empty())
    throw IngestionError("row " + std::to_string(row) + ": cannot parse '" + field + "' as a number", row);
  if (!std::isfinite(value))
    throw IngestionError("row " + std::to_string(row) + ": non-finite value '" + field + "'", row);
  return value;
}

int parse_label(const std::string& field, std::size_t row) {
  const double value = parse_double(field, row);
  if (value < 0.0 || value != std::floor(value) || value > 2147483647.0)
    throw IngestionError("row " + std::to_string(row) + ": label '" + field + "' is not a nonnegative integer", row);
  return static_cast<int>(value);
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // rows[i] came from line i + 2
};

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw IngestionError("'" + path + "' is empty", 1);
  table.header = split_row(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_row(line);
    if (fields.size() != table.header.size())
      throw IngestionError("row " + std::to_string(line_no) + ": expected " + std::to_string(table.header.size()) +
                               " fields, found " + std::to_string(fields.size()),
                           line_no);
    table.rows.push_back(std::move(fields));
  }
  return table;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

PointSet load_csv(const std::string& path, const std::optional<std::string>& label_column) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw IngestionError("'" + path + "' is empty", 1);
  const auto header = split_row(line);
  std::optional<std::size_t> label_index;
  if (label_column) {
    const auto it = std::find(header.begin(), header.end(), *label_column);
    if (it == header.end()) throw IngestionError("no column named '" + *label_column + "'", 1);
    label_index = static_cast<std::size_t>(it - header.begin());
  }
  const std::size_t d = header.size() - (label_index ? 1 : 0);
  if (d == 0) throw IngestionError("no coordinate columns", 1);

  std::vector<double> values;
  Labels labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_row(line);
    if (fields.size() != header.size())
      throw IngestionError("row " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                               " fields, found " + std::to_string(fields.size()),
                           line_no);
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (label_index && j == *label_index)
        labels.push_back(parse_label(fields[j], line_no));
      else
        values.push_back(parse_double(fields[j], line_no));
    }
  }
  const std::size_t n = values.size() / d;
  if (n == 0) throw IngestionError("'" + path + "' has no data rows", line_no);

  PointSet ps;
  ps.points = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  if (label_index) ps.labels = std::move(labels);
  ps.name = std::filesystem::path(path).stem().string();
  ps.validate();
  return ps;
}

std::string to_csv(const PointSet& ps) {
  std::string text;
  for (std::size_t j = 0; j < ps.dim(); ++j) {
    if (j) text += ',';
    text += "x" + std::to_string(j);
  }
  if (ps.labels) text += ",label";
  text += '\n';
  for (Eigen::Index i = 0; i < ps.points.rows(); ++i) {
    for (Eigen::Index j = 0; j < ps.points.cols(); ++j) {
      if (j) text += ',';
      text += format_double(ps.points(i, j));
    }
    if (ps.labels) text += "," + std::to_string((*ps.labels)[static_cast<std::size_t>(i)]);
    text += '\n';
  }
  return text;
}

void save_csv(const PointSet& ps, const std::string& path) { write_text(to_csv(ps), path); }

Labels load_labels_csv(const std::string& path, const std::optional<std::string>& column) {
  const Table table = read_table(path);
  std::size_t index = table.header.size() - 1;
  if (column) {
    const auto it = std::find(table.header.begin(), table.header.end(), *column);
    if (it == table.header.end()) throw IngestionError("no column named '" + *column + "'", 1);
    index = static_cast<std::size_t>(it - table.header.begin());
  } else if (const auto it = std::find(table.header.begin(), table.header.end(), "label"); it != table.header.end()) {
    index = static_cast<std::size_t>(it - table.header.begin());
  }
  Labels labels;
  labels.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) labels.push_back(parse_label(table.rows[i][index], i + 2));
  return labels;
}

std::string labels_to_csv(const Labels& labels, const std::string& column) {
  std::string text = column + "\n";
  for (int l : labels) text += std::to_string(l) + "\n";
  return text;
}

void save_labels_csv(const Labels& labels, const std::string& path, const std::string& column) {
  write_text(labels_to_csv(labels, column), path);
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace tneb
