#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rejectsvm/dictionary.hpp"
#include "rejectsvm/evaluate.hpp"
#include "rejectsvm/losses.hpp"
#include "rejectsvm/theory_lab.hpp"
#include "rejectsvm/train.hpp"

namespace rsvm {

// CSV with a header row. Column "y" holds labels in {-1, +1}; every other
// column is a numeric feature, kept in file order.
struct Dataset {
  std::vector<std::string> feature_names;
  Matrix x;
  std::vector<int> y;  // empty when the file has no "y" column
};

// Throws DataError on unreadable files, ragged or missing cells, non-numeric
// values, bad labels, or a missing "y" column when labels are required.
Dataset read_dataset(const std::filesystem::path& path, bool require_labels);
Dataset parse_dataset(std::istream& in, bool require_labels, std::string_view source = "<stream>");

// Columns p, eta, then the features.
DiscreteDistribution read_distribution(const std::filesystem::path& path);
DiscreteDistribution parse_distribution(std::istream& in, std::string_view source = "<stream>");

// Dictionary from a spec string:
//   linear | const_linear | constant | rbf:KxL[:beta=B][:box=lo1,lo2,...,hi1,hi2,...] | custom:FILE[:beta=B]
// Lattice boxes default to the bounding box of `rows`; custom centers are a
// header-less numeric CSV, one center per line. Throws UsageError on an
// unknown or malformed spec.
Dictionary parse_dictionary_spec(std::string_view spec, const Matrix& rows);

// Plain-text model file; every number is written with 17 significant digits
// so that save -> load -> save is byte-identical.
void write_model(std::ostream& out, const Model& model);
Model parse_model(std::istream& in, std::string_view source = "<stream>");
void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

void write_predictions(std::ostream& out, std::span<const double> margins, std::span<const int> decisions);
void write_risk_report(std::ostream& out, const RiskReport& report);
void write_bound_report(std::ostream& out, const BoundReport& report);
void write_cv_table(std::ostream& out, const CvResult& cv);
void write_check_rows(std::ostream& out, std::span<const CheckRow> rows);

}  // namespace rsvm
