#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "mbl/linalg.hpp"

namespace mbl {

/// Parses LIBSVM text: one example per line, `<label> <idx>:<val> ...` with
/// 1-based strictly increasing indices. Labels 0/-1 map to -1 and 1/+1 to +1.
/// Blank lines and `#` comments are skipped. The dimension is the largest
/// index seen unless `dimension_override` (> 0) is given, in which case every
/// index must fit in it.
///
/// Errors are DataError with "<source>:<line>:<column>: ..." messages. An
/// input with no examples is an error.
Dataset parse_libsvm(std::istream& in, std::size_t dimension_override = 0,
                     const std::string& source = "<input>");
Dataset parse_libsvm(const std::filesystem::path& path, std::size_t dimension_override = 0);

/// Writes the dataset in the same format (labels "+1"/"-1", 1-based indices,
/// values with 17 significant digits so parsing reproduces them exactly).
void write_libsvm(std::ostream& out, const Dataset& data);

}  // namespace mbl
