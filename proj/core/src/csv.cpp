#include "swsgd/csv.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "swsgd/document.hpp"
#include "swsgd/sgd.hpp"
#include "swsgd/trajectory.hpp"

namespace swsgd {
namespace {

bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    try {
      out.push_back(std::stod(cell, &used));
    } catch (const std::exception&) {
      return false;
    }
    while (used < cell.size() && (cell[used] == ' ' || cell[used] == '\r')) ++used;
    if (used != cell.size()) return false;
  }
  return !out.empty();
}

}  // namespace

Matrix read_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path.string());
  std::vector<std::vector<double>> rows;
  std::vector<double> row;
  std::string line;
  bool header_allowed = true;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line.front() == '#') continue;
    if (!parse_row(line, row)) {
      if (header_allowed) {
        header_allowed = false;
        continue;
      }
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": non-numeric row");
    }
    header_allowed = false;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DimensionError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(rows.front().size()) + " columns");
    }
    rows.push_back(row);
  }
  if (rows.empty()) throw std::runtime_error(path.string() + ": no data rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

std::string read_comment_header(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  std::string out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() != '#') break;
    line.erase(0, line.size() > 1 && line[1] == ' ' ? 2 : 1);
    out += line;
    out += '\n';
  }
  return out;
}

std::string comment_block(const std::string& text) {
  std::ostringstream out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out << "# " << line << '\n';
  return out.str();
}

std::string trajectory_csv(const Trajectory& trajectory, const std::string& echo) {
  std::ostringstream out;
  out << comment_block(echo);
  const auto d = trajectory.iterates.cols();
  out << 't';
  for (Eigen::Index j = 0; j < d; ++j) out << ",u" << j;
  out << ",sample_loss,grad_norm\n";
  for (Eigen::Index t = 0; t < trajectory.iterates.rows(); ++t) {
    out << t;
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << format_double(trajectory.iterates(t, j));
    out << ',' << format_double(trajectory.loss[t]) << ',' << format_double(trajectory.grad_norm[t])
        << '\n';
  }
  return out.str();
}

std::string path_csv(const AffinePath& path, const std::string& echo) {
  std::ostringstream out;
  out << comment_block(echo);
  const auto d = path.dim();
  out << 's';
  for (Eigen::Index j = 0; j < d; ++j) out << ",v" << j;
  out << '\n';
  for (Eigen::Index t = 0; t < path.knots().rows(); ++t) {
    out << format_double(path.step() * static_cast<double>(t));
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << format_double(path.knots()(t, j));
    out << '\n';
  }
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace swsgd
