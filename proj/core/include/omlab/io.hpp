#pragma once

#include <string>
#include <vector>

namespace omlab::io {

// Rows of comma-separated numbers. Lines that do not parse as numbers (headers)
// are returned through `header` when it is non-null, otherwise skipped.
std::vector<std::vector<double>> read_numeric_csv(const std::string& path,
                                                  std::vector<std::string>* header = nullptr);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace omlab::io
