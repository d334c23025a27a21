#include "ordqr/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "ordqr/errors.hpp"

namespace ordqr {

OrdinalDataset::OrdinalDataset(std::vector<std::string> subject_ids, std::vector<Eigen::Index> offsets,
                               Eigen::VectorXi y, Eigen::MatrixXd x, Eigen::VectorXi time, int num_categories,
                               std::vector<std::string> covariate_names)
    : subject_ids_(std::move(subject_ids)),
      offsets_(std::move(offsets)),
      y_(std::move(y)),
      x_(std::move(x)),
      time_(std::move(time)),
      num_categories_(num_categories),
      covariate_names_(std::move(covariate_names)) {
  if (subject_ids_.empty()) throw DataError("dataset needs at least one subject");
  if (num_categories_ < 2) throw DataError("dataset needs at least two categories");
  if (x_.cols() < 1) throw DataError("dataset needs at least one covariate");
  if (offsets_.size() != subject_ids_.size() + 1 || offsets_.front() != 0 || offsets_.back() != y_.size())
    throw DataError("subject offsets do not partition the observations");
  for (std::size_t i = 0; i + 1 < offsets_.size(); ++i)
    if (offsets_[i + 1] <= offsets_[i]) throw DataError("subject '" + subject_ids_[i] + "' has no observations");
  if (x_.rows() != y_.size() || time_.size() != y_.size())
    throw DataError("covariate, category and time arrays differ in length");
  for (Eigen::Index r = 0; r < y_.size(); ++r)
    if (y_(r) < 1 || y_(r) > num_categories_)
      throw DataError("category " + std::to_string(y_(r)) + " outside 1.." + std::to_string(num_categories_));
  if (!x_.allFinite()) throw DataError("covariates must be finite");

  if (covariate_names_.empty())
    for (Eigen::Index k = 0; k < x_.cols(); ++k) covariate_names_.push_back("x" + std::to_string(k + 1));
  if (static_cast<Eigen::Index>(covariate_names_.size()) != x_.cols())
    throw DataError("covariate name count does not match covariate columns");

  subject_of_.resize(y_.size());
  for (Eigen::Index i = 0; i < num_subjects(); ++i)
    subject_of_.segment(offsets_[i], offsets_[i + 1] - offsets_[i]).setConstant(static_cast<int>(i));
}

std::vector<Eigen::Index> OrdinalDataset::category_counts() const {
  std::vector<Eigen::Index> counts(num_categories_, 0);
  for (Eigen::Index r = 0; r < y_.size(); ++r) ++counts[y_(r) - 1];
  return counts;
}

OrdinalDataset OrdinalDataset::with_covariates(Eigen::MatrixXd x) const {
  return OrdinalDataset(subject_ids_, offsets_, y_, std::move(x), time_, num_categories_, covariate_names_);
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  std::string out(s.substr(b, e - b + 1));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
bool parse_whole(const std::string& field, T& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && first != last;
}

}  // namespace

IngestResult ingest_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_fields(line);
      break;
    }
  }
  if (header.empty()) throw DataError(path.string() + ": empty file");

  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto subject_col = column(schema.subject_column);
  if (!subject_col) throw SchemaError("missing subject column '" + schema.subject_column + "'");
  const auto category_col = column(schema.category_column);
  if (!category_col) throw SchemaError("missing category column '" + schema.category_column + "'");
  const auto time_col = schema.time_column.empty() ? std::nullopt : column(schema.time_column);

  const std::size_t time_index = time_col.value_or(header.size());
  std::vector<std::string> covariate_names = schema.covariate_columns;
  std::vector<std::size_t> covariate_cols;
  if (covariate_names.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (c != *subject_col && c != *category_col && c != time_index) {
        covariate_names.push_back(header[c]);
        covariate_cols.push_back(c);
      }
  } else {
    for (const auto& name : covariate_names) {
      const auto col = column(name);
      if (!col) throw SchemaError("missing covariate column '" + name + "'");
      covariate_cols.push_back(*col);
    }
  }
  if (covariate_cols.empty()) throw SchemaError("no covariate columns");

  struct Row {
    int label;
    int time;
    std::vector<double> x;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<Row>> rows_by_subject;
  std::size_t data_rows = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    const std::string where = path.string() + ": row " + std::to_string(line_no);
    if (fields.size() != header.size())
      throw DataError(where + ": expected " + std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    Row row;
    if (!parse_whole(fields[*category_col], row.label))
      throw DataError(where + ": category '" + fields[*category_col] + "' is not an integer");
    if (!schema.category_levels.empty() &&
        std::find(schema.category_levels.begin(), schema.category_levels.end(), row.label) ==
            schema.category_levels.end())
      throw DataError(where + ": category " + std::to_string(row.label) + " is not a declared level");
    const std::string& subject = fields[*subject_col];
    if (subject.empty()) throw DataError(where + ": missing subject id");
    auto& subject_rows = rows_by_subject[subject];
    if (subject_rows.empty()) order.push_back(subject);
    if (time_col) {
      if (!parse_whole(fields[*time_col], row.time))
        throw DataError(where + ": time '" + fields[*time_col] + "' is not an integer");
    } else {
      row.time = static_cast<int>(subject_rows.size()) + 1;
    }
    for (std::size_t k = 0; k < covariate_cols.size(); ++k) {
      double value;
      if (!parse_whole(fields[covariate_cols[k]], value) || !std::isfinite(value))
        throw DataError(where + ": covariate '" + covariate_names[k] + "' value '" + fields[covariate_cols[k]] +
                        "' is not a finite number");
      row.x.push_back(value);
    }
    subject_rows.push_back(std::move(row));
    ++data_rows;
  }
  if (data_rows == 0) throw DataError(path.string() + ": no data rows");

  std::vector<int> levels = schema.category_levels;
  if (levels.empty()) {
    std::set<int> seen;
    for (const auto& [id, rows] : rows_by_subject)
      for (const auto& r : rows) seen.insert(r.label);
    levels.assign(seen.begin(), seen.end());
  } else {
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  }
  if (levels.size() < 2) throw DataError(path.string() + ": need at least two category levels");
  std::map<int, int> to_category;
  for (std::size_t c = 0; c < levels.size(); ++c) to_category[levels[c]] = static_cast<int>(c) + 1;

  const auto n = static_cast<Eigen::Index>(data_rows);
  const auto p = static_cast<Eigen::Index>(covariate_cols.size());
  Eigen::VectorXi y(n), time(n);
  Eigen::MatrixXd x(n, p);
  std::vector<Eigen::Index> offsets{0};
  Eigen::Index r = 0;
  for (const auto& id : order) {
    for (const auto& row : rows_by_subject[id]) {
      y(r) = to_category.at(row.label);
      time(r) = row.time;
      for (Eigen::Index k = 0; k < p; ++k) x(r, k) = row.x[k];
      ++r;
    }
    offsets.push_back(r);
  }

  IngestResult result{OrdinalDataset(order, std::move(offsets), std::move(y), std::move(x), std::move(time),
                                     static_cast<int>(levels.size()), covariate_names),
                      levels,
                      {}};
  const auto counts = result.dataset.category_counts();
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] == 0)
      result.warnings.push_back("category " + std::to_string(levels[c]) + " has no observations");
  return result;
}

void write_csv(const OrdinalDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "subject,time,y";
  for (const auto& name : data.covariate_names()) out << ',' << name;
  out << '\n';
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < data.num_subjects(); ++i) {
    const auto block = data.subject(i);
    for (Eigen::Index r = block.first; r < block.first + block.size; ++r) {
      out << block.id << ',' << data.time()(r) << ',' << data.y()(r);
      for (Eigen::Index k = 0; k < data.num_covariates(); ++k) out << ',' << data.x()(r, k);
      out << '\n';
    }
  }
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace ordqr
