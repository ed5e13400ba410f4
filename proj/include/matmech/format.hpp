// Number rendering shared by the CSV/JSON emitters.

#pragma once

#include <string>

namespace matmech {

/// %.17g rendering; non-finite values become "nan", "inf" or "-inf".
std::string format_double(double x);

/// Writes text to path, truncating. Throws IoError naming the path.
void write_text_file(const std::string& path, const std::string& text);

/// Reads a whole file. Throws IoError naming the path.
std::string read_text_file(const std::string& path);

}  // namespace matmech
