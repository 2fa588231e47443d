#include "semtex/features/external.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "semtex/core/error.hpp"

namespace semtex::features {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

std::vector<FeatureRow> ingest_external_features(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open feature file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  if (header.empty() || header[0] != "id") {
    throw IoError(path.string() + ":1: header must start with 'id'");
  }
  const std::size_t dim = header.size() - 1;

  std::vector<FeatureRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (cells.size() != header.size()) {
      throw IoError(where + ": expected " + std::to_string(header.size()) + " columns, got " +
                    std::to_string(cells.size()));
    }
    FeatureRow row;
    if (!parse_number(cells[0], row.id)) throw IoError(where + ": bad id '" + cells[0] + "'");
    row.values.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      if (!parse_number(cells[k + 1], row.values[k])) {
        throw IoError(where + ": bad value '" + cells[k + 1] + "' in column " + header[k + 1]);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_feature_csv(const std::filesystem::path& path, std::span<const FeatureRow> rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const std::size_t dim = rows.empty() ? 0 : rows.front().values.size();
  out << "id";
  for (std::size_t k = 0; k < dim; ++k) out << ",dim_" << k;
  out << '\n';
  out << std::setprecision(17);
  for (const auto& r : rows) {
    if (r.values.size() != dim) throw InvalidInput("ragged feature rows");
    out << r.id;
    for (double v : r.values) out << ',' << v;
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void attach_features(std::span<const FeatureRow> rows, std::span<TextureSample> samples) {
  std::map<std::int64_t, const FeatureRow*> by_id;
  for (const auto& r : rows) by_id[r.id] = &r;

  std::vector<std::int64_t> missing;
  std::map<std::int64_t, bool> used;
  for (const auto& s : samples) {
    if (!by_id.count(s.id)) missing.push_back(s.id);
    used[s.id] = true;
  }
  std::vector<std::int64_t> extra;
  for (const auto& r : rows) {
    if (!used.count(r.id)) extra.push_back(r.id);
  }
  if (!missing.empty() || !extra.empty()) {
    std::ostringstream msg;
    msg << "feature ids do not match dataset;";
    auto list = [&](const char* what, const std::vector<std::int64_t>& ids) {
      if (ids.empty()) return;
      msg << ' ' << what << ':';
      for (auto id : ids) msg << ' ' << id;
      msg << ';';
    };
    list("samples without features", missing);
    list("features without samples", extra);
    throw InvalidInput(msg.str());
  }
  for (auto& s : samples) s.features = by_id.at(s.id)->values;
}

}  // namespace semtex::features
