#pragma once

#include <string>
#include <vector>

#include "sag/data.hpp"

namespace sag {

/// Parses one question XML file (questionText, referenceAnswers,
/// studentAnswers with accuracy attributes) into canonical samples. The
/// 5-way accuracy labels are collapsed for coarser schemes; the first
/// reference answer is used. The domain is the question-id prefix before
/// the first '-'.
std::vector<Sample> parse_semeval_xml(const std::string& path,
                                      const LabelScheme& scheme);

/// Converts every .xml file under xml_dir (recursively, sorted order) into
/// one canonical TSV. Returns the number of samples written.
std::size_t convert_semeval_dir(const std::string& xml_dir,
                                const std::string& out_tsv,
                                const LabelScheme& scheme);

}  // namespace sag
