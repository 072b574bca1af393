#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "biberdist/features.hpp"
#include "biberdist/standardize.hpp"

namespace biberdist {

/// Header `doc_id,register,source,<feature ids>`, one row per document.
void write_feature_csv(std::ostream& out, const FeatureMatrix& m);
/// Reads the CSV written above. Columns must match the standard inventory.
FeatureMatrix read_feature_csv(std::istream& in);

/// One object per line: {"doc_id","register","source","features":{id: value}}.
void write_feature_jsonl(std::ostream& out, const FeatureMatrix& m);

/// Long format for distribution plots: source,doc_id,dimension,score.
void write_dimension_scores_long(std::ostream& out, const std::string& source,
                                 const std::vector<DimensionScores>& scores, bool header = true);

}  // namespace biberdist
