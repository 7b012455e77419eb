#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "swsgd/types.hpp"

namespace swsgd {

struct Trajectory;
class AffinePath;

/// Numeric CSV reader: skips blank lines, `#` comments and a non-numeric
/// header row. All rows must have the same number of columns.
Matrix read_csv_matrix(const std::filesystem::path& path);

/// Text before the first non-comment line, with the leading "# " removed.
std::string read_comment_header(const std::filesystem::path& path);

/// `# `-prefixed echo lines followed by rows
/// t,u_0..u_{d-1},sample_loss,grad_norm.
std::string trajectory_csv(const Trajectory& trajectory, const std::string& echo);

/// s,v_0..v_{d-1} at every knot.
std::string path_csv(const AffinePath& path, const std::string& echo);

std::string comment_block(const std::string& text);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace swsgd
