#include "eurlab/povm_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "eurlab/error.hpp"
#include "eurlab/format.hpp"

namespace eurlab::io {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& token, std::size_t line_no) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw InvalidInput("line " + std::to_string(line_no) + ": cannot parse number '" + token + "'");
  }
  return value;
}

Complex parse_entry(const std::string& token, std::size_t line_no) {
  const auto comma = token.find(',');
  if (comma == std::string::npos) {
    throw InvalidInput("line " + std::to_string(line_no) + ": entry '" + token + "' is not re,im");
  }
  return {parse_double(token.substr(0, comma), line_no), parse_double(token.substr(comma + 1), line_no)};
}

struct Line {
  std::size_t number;
  std::string text;
};

std::vector<Line> meaningful_lines(const std::string& text) {
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  std::size_t n = 0;
  while (std::getline(in, raw)) {
    ++n;
    auto t = trim(raw);
    if (t.empty() || t.front() == '#') continue;
    lines.push_back({n, std::move(t)});
  }
  return lines;
}

Matrix parse_block(const std::vector<Line>& lines, std::size_t& pos) {
  if (pos >= lines.size()) throw InvalidInput("expected 'dim N' header, found end of input");
  std::istringstream header(lines[pos].text);
  std::string keyword;
  long long n = 0;
  header >> keyword >> n;
  if (keyword != "dim" || n <= 0) {
    throw InvalidInput("line " + std::to_string(lines[pos].number) + ": expected 'dim N'");
  }
  ++pos;
  Matrix m(n, n);
  for (long long r = 0; r < n; ++r, ++pos) {
    if (pos >= lines.size()) throw InvalidInput("operator truncated: expected " + std::to_string(n) + " rows");
    std::istringstream row(lines[pos].text);
    std::string token;
    long long c = 0;
    while (row >> token) {
      if (c >= n) throw InvalidInput("line " + std::to_string(lines[pos].number) + ": too many entries");
      m(r, c++) = parse_entry(token, lines[pos].number);
    }
    if (c != n) throw InvalidInput("line " + std::to_string(lines[pos].number) + ": too few entries");
  }
  if (!m.allFinite()) throw InvalidInput("operator has non-finite entries");
  return m;
}

}  // namespace

Matrix parse_operator(const std::string& text) {
  const auto lines = meaningful_lines(text);
  std::size_t pos = 0;
  Matrix m = parse_block(lines, pos);
  if (pos != lines.size()) throw InvalidInput("trailing content after operator");
  return m;
}

MatrixPovm parse_povm(const std::string& text) {
  const auto lines = meaningful_lines(text);
  MatrixPovm povm;
  std::size_t pos = 0;
  while (pos < lines.size()) {
    const std::string& t = lines[pos].text;
    if (t == "---") {
      ++pos;
      continue;
    }
    if (t.rfind("null:", 0) == 0) {
      const auto value = trim(t.substr(5));
      const double k = parse_double(value, lines[pos].number);
      if (k < 0 || k != static_cast<double>(static_cast<std::size_t>(k))) {
        throw InvalidInput("line " + std::to_string(lines[pos].number) + ": bad null index");
      }
      povm.null_index = static_cast<std::size_t>(k);
      if (++pos != lines.size()) throw InvalidInput("'null:' must be the last line");
      break;
    }
    povm.elements.push_back(parse_block(lines, pos));
  }
  if (povm.elements.empty()) throw InvalidInput("POVM file holds no operators");
  if (povm.null_index && *povm.null_index >= povm.elements.size()) {
    throw InvalidInput("null index " + std::to_string(*povm.null_index) + " out of range");
  }
  return povm;
}

MatrixPovm read_povm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open POVM file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_povm(buf.str());
}

void write_operator(std::ostream& out, const Matrix& op) {
  out << "dim " << op.rows() << '\n';
  for (Eigen::Index r = 0; r < op.rows(); ++r) {
    for (Eigen::Index c = 0; c < op.cols(); ++c) {
      if (c) out << ' ';
      out << format_double(op(r, c).real()) << ',' << format_double(op(r, c).imag());
    }
    out << '\n';
  }
}

void write_povm(std::ostream& out, const MatrixPovm& povm) {
  for (std::size_t i = 0; i < povm.elements.size(); ++i) {
    if (i) out << "---\n";
    write_operator(out, povm.elements[i]);
  }
  if (povm.null_index) out << "null: " << *povm.null_index << '\n';
}

std::string format_operator(const Matrix& op) {
  std::ostringstream out;
  write_operator(out, op);
  return out.str();
}

std::string format_povm(const MatrixPovm& povm) {
  std::ostringstream out;
  write_povm(out, povm);
  return out.str();
}

}  // namespace eurlab::io
