#include "wave/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wave {

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::csv_error, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorKind::csv_error, "write failed for '" + path + "'");
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  for (auto& f : out) {
    while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
    while (!f.empty() && f.front() == ' ') f.erase(f.begin());
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string profile_csv(const PotentialSpec<double>& spec, const Profile<double>& p) {
  std::string s = "x";
  for (int j = 0; j < p.dim(); ++j) s += ",u" + std::to_string(j + 1);
  s += ",W,du_norm\n";
  const NodeMatrix<double> du = derivative(p);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    s += format_double(p.grid[i]);
    for (int j = 0; j < p.dim(); ++j) s += "," + format_double(p.values(j, i));
    s += "," + format_double(spec.eval_W(p.at(i)));
    s += "," + format_double(du.col(i).norm());
    s += "\n";
  }
  return s;
}

void write_profile_csv(const std::string& path, const PotentialSpec<double>& spec, const Profile<double>& p) {
  write_file(path, profile_csv(spec, p));
}

Profile<double> parse_profile_csv(const std::string& text, int dim, const Point<double>& well_b,
                                  const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::csv_error, source + ": empty file");
  const auto header = split_row(line);
  std::vector<std::string> expected{"x"};
  for (int j = 0; j < dim; ++j) expected.push_back("u" + std::to_string(j + 1));
  expected.push_back("W");
  expected.push_back("du_norm");
  for (std::size_t k = 0; k < std::max(header.size(), expected.size()); ++k) {
    if (k >= header.size()) throw Error(ErrorKind::csv_error, source + ": missing column '" + expected[k] + "'");
    if (k >= expected.size()) throw Error(ErrorKind::csv_error, source + ": unexpected column '" + header[k] + "'");
    if (header[k] != expected[k]) {
      throw Error(ErrorKind::csv_error, source + ": column " + std::to_string(k + 1) + " is '" + header[k] +
                                            "', expected '" + expected[k] + "'");
    }
  }

  std::vector<double> xs;
  std::vector<std::vector<double>> us;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_row(line);
    if (fields.size() != expected.size()) {
      throw Error(ErrorKind::csv_error, source + ":" + std::to_string(line_no) + ": expected " +
                                            std::to_string(expected.size()) + " fields, got " +
                                            std::to_string(fields.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const char* first = fields[k].data();
      const char* last = first + fields[k].size();
      auto [ptr, ec] = std::from_chars(first, last, row[k]);
      if (ec != std::errc() || ptr != last || fields[k].empty()) {
        throw Error(ErrorKind::csv_error, source + ":" + std::to_string(line_no) + ": column '" + expected[k] +
                                              "' is not a number: '" + fields[k] + "'");
      }
    }
    xs.push_back(row[0]);
    us.emplace_back(row.begin() + 1, row.begin() + 1 + dim);
  }
  if (xs.size() < 3) throw Error(ErrorKind::csv_error, source + ": fewer than 3 rows");

  Vector<double> x(static_cast<Eigen::Index>(xs.size()));
  NodeMatrix<double> v(dim, static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    x[static_cast<Eigen::Index>(i)] = xs[i];
    for (int j = 0; j < dim; ++j) v(j, static_cast<Eigen::Index>(i)) = us[i][j];
  }
  try {
    return Profile<double>{Grid<double>(std::move(x), Spacing::uniform), std::move(v), well_b};
  } catch (const Error& e) {
    throw Error(ErrorKind::csv_error, source + ": column 'x': " + e.what());
  }
}

Profile<double> read_profile_csv(const std::string& path, int dim, const Point<double>& well_b) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::csv_error, "cannot open profile CSV '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return parse_profile_csv(s.str(), dim, well_b, path);
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  std::string s;
  for (std::size_t k = 0; k < header.size(); ++k) s += (k ? "," : "") + header[k];
  s += "\n";
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) s += (k ? "," : "") + format_double(row[k]);
    s += "\n";
  }
  write_file(path, s);
}

}  // namespace wave
