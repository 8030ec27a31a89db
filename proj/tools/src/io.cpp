#include "io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "smbm/error.hpp"

namespace smbm::cli {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), path_(path) {
  if (!out_) throw Error("cannot open " + path.string() + " for writing");
  for (const auto& h : header) cell(h);
  end_row();
}

void CsvWriter::separator() {
  if (!first_) out_ << ',';
  first_ = false;
}

CsvWriter& CsvWriter::cell(double v) {
  separator();
  out_ << format_number(v);
  return *this;
}

CsvWriter& CsvWriter::cell(long long v) {
  separator();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::cell(const std::string& text) {
  separator();
  if (text.find_first_of(",\"\n") == std::string::npos) {
    out_ << text;
  } else {
    out_ << '"';
    for (char c : text) {
      if (c == '"') out_ << '"';
      out_ << c;
    }
    out_ << '"';
  }
  return *this;
}

void CsvWriter::end_row() {
  out_ << '\n';
  first_ = true;
  if (!out_) throw Error("write to " + path_.string() + " failed");
}

namespace {

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  return s.substr(b);
}

double parse_double(const std::string& field, long line) {
  const std::string t = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ParseError("expected a number, got '" + t + "'", line);
  }
  return v;
}

}  // namespace

std::vector<ProbabilityPoint> read_fit_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open fit file " + path.string());
  std::string text;
  long line_no = 0;
  bool header = false;
  std::vector<ProbabilityPoint> points;
  while (std::getline(in, text)) {
    ++line_no;
    text = trim(text);
    if (text.empty()) continue;
    if (!header) {
      if (text != "v_bias,probability") {
        throw ParseError("fit file header must be 'v_bias,probability'", line_no);
      }
      header = true;
      continue;
    }
    const auto comma = text.find(',');
    if (comma == std::string::npos || text.find(',', comma + 1) != std::string::npos) {
      throw ParseError("expected two comma-separated fields", line_no);
    }
    ProbabilityPoint p;
    p.v_bias = parse_double(text.substr(0, comma), line_no);
    p.probability = parse_double(text.substr(comma + 1), line_no);
    if (!(p.probability >= 0.0 && p.probability <= 1.0)) {
      throw ParseError("probability must lie in [0, 1]", line_no);
    }
    points.push_back(p);
  }
  if (!header) throw ParseError("fit file is empty", line_no + 1);
  if (points.empty()) throw ParseError("fit file has a header but no data", line_no + 1);
  return points;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace smbm::cli
