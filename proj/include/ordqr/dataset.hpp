#ifndef ORDQR_DATASET_HPP
#define ORDQR_DATASET_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ordqr {

/// Observations of one subject: contiguous rows of the dataset's design.
struct SubjectBlock {
  std::string_view id;
  Eigen::Index first;  ///< first row in the flattened observation arrays
  Eigen::Index size;   ///< n_i
};

/// Longitudinal ordinal data, flattened subject-major.
///
/// Rows of `x`, `y` and `time` are grouped by subject; subject i owns rows
/// [offsets[i], offsets[i+1]). Categories are 1..C.
class OrdinalDataset {
 public:
  OrdinalDataset(std::vector<std::string> subject_ids, std::vector<Eigen::Index> offsets,
                 Eigen::VectorXi y, Eigen::MatrixXd x, Eigen::VectorXi time, int num_categories,
                 std::vector<std::string> covariate_names = {});

  Eigen::Index num_subjects() const { return static_cast<Eigen::Index>(subject_ids_.size()); }
  Eigen::Index num_observations() const { return y_.size(); }
  Eigen::Index num_covariates() const { return x_.cols(); }
  int num_categories() const { return num_categories_; }

  SubjectBlock subject(Eigen::Index i) const {
    return {subject_ids_[i], offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  /// Subject index of each observation row.
  const Eigen::VectorXi& subject_of() const { return subject_of_; }

  const Eigen::VectorXi& y() const { return y_; }
  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::VectorXi& time() const { return time_; }
  const std::vector<std::string>& subject_ids() const { return subject_ids_; }
  const std::vector<Eigen::Index>& offsets() const { return offsets_; }
  const std::vector<std::string>& covariate_names() const { return covariate_names_; }

  /// Observation count per category, index c-1.
  std::vector<Eigen::Index> category_counts() const;

  /// Same observations with covariates replaced (used for equivariance checks).
  OrdinalDataset with_covariates(Eigen::MatrixXd x) const;

 private:
  std::vector<std::string> subject_ids_;
  std::vector<Eigen::Index> offsets_;
  Eigen::VectorXi y_;
  Eigen::MatrixXd x_;
  Eigen::VectorXi time_;
  Eigen::VectorXi subject_of_;
  int num_categories_;
  std::vector<std::string> covariate_names_;
};

/// Column mapping for CSV ingestion.
struct CsvSchema {
  std::string subject_column = "subject";
  std::string category_column = "y";
  /// Optional; when absent, the within-subject row order is the time index.
  std::string time_column = "time";
  /// Empty means every remaining column.
  std::vector<std::string> covariate_columns;
  /// Declared raw category labels in increasing order. When empty the
  /// observed distinct labels are used.
  std::vector<int> category_levels;
};

struct IngestResult {
  OrdinalDataset dataset;
  /// raw_labels[c-1] is the file label mapped to category c.
  std::vector<int> raw_labels;
  std::vector<std::string> warnings;
};

IngestResult ingest_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

/// Writes the subject,time,y,x... schema read by ingest_csv. Values are
/// printed with round-trip precision.
void write_csv(const OrdinalDataset& data, const std::filesystem::path& path);

}  // namespace ordqr

#endif  // ORDQR_DATASET_HPP
