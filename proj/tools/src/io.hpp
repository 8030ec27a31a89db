#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "smbm/device_model.hpp"

namespace smbm::cli {

// %.17g: round-trips every double.
std::string format_number(double v);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(long v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(const std::string& text);
  void end_row();

 private:
  void separator();

  std::ofstream out_;
  std::filesystem::path path_;
  bool first_ = true;
};

// Reads a "v_bias,probability" CSV (header required).
std::vector<ProbabilityPoint> read_fit_csv(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);

}  // namespace smbm::cli
